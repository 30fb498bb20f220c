#pragma once

// Run configuration and the end-to-end inference driver that fits each
// requested transition count and writes the analysis artifacts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/version.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "welltest/errors.hpp"
#include "welltest/io.hpp"
#include "welltest/optimize.hpp"
#include "welltest/posterior.hpp"
#include "welltest/sampler.hpp"
#include "welltest/selection.hpp"

namespace welltest {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

struct TauGrid {
    int points = 200;
    std::optional<double> min;  // default ln(min observation spacing) / 2
    std::optional<double> max;  // default ln(2 * test duration)
};

struct BridgeSettings {
    bool enabled = true;
    double reference_scale = 1.0;
    std::size_t reference_draws = 0;
};

/// Chain starting states. `Prior` draws them from the prior; `Optimize`
/// screens `candidates` prior draws per chain, runs a short Nelder-Mead from
/// the best `coarse` per chain and polishes the best results fully.
struct InitSettings {
    enum class Method { Prior, Optimize };
    Method method = Method::Prior;
    int candidates = 20;
    int coarse = 8;
    int max_iterations = 3000;
};

inline const char* to_string(InitSettings::Method m) { return m == InitSettings::Method::Prior ? "prior" : "optimize"; }

struct RunConfig {
    std::vector<std::size_t> models{1};
    std::string prior_preset = "standard";
    PriorSpec prior;
    std::optional<double> fixed_sigma_p;
    double sigma_p_upper = 5.0;
    double rate_noise_fraction = 0.05;
    double sigma_p0 = 10.0;
    bool infer_beta = true;
    mcmc::SamplerConfig sampler{3, 50000, 50, 1000};
    std::optional<std::uint64_t> seed;
    laplace::InversionScheme inversion;
    std::filesystem::path output_dir = "welltest_run";
    TauGrid tau;
    BridgeSettings bridge;
    InitSettings init;

    void validate() const {
        if (models.empty()) throw ConfigError("at least one transition count is required");
        for (auto n : models) {
            if (n < 1) throw ConfigError("transition counts must be at least 1");
        }
        if (sampler.iterations <= sampler.burn_in) throw ConfigError("iterations must exceed burn-in");
        if (tau.points < 2) throw ConfigError("tau grid needs at least two points");
        if (tau.min && tau.max && !(*tau.max > *tau.min)) throw ConfigError("tau grid max must exceed min");
        if (!(bridge.reference_scale > 0.0)) throw ConfigError("bridge reference scale must be positive");
        if (init.candidates < 1 || init.coarse < 1 || init.max_iterations < 1) {
            throw ConfigError("init candidates, coarse starts and iterations must be positive");
        }
        try {
            sampler.validate();
            prior.validate();
            inversion.validate();
            target_settings(1).validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }

    TargetSettings target_settings(std::size_t transitions) const {
        TargetSettings s;
        s.transitions = transitions;
        s.prior = prior;
        s.fixed_sigma_p = fixed_sigma_p;
        s.sigma_p_upper = sigma_p_upper;
        s.rate_noise_fraction = rate_noise_fraction;
        s.sigma_p0 = sigma_p0;
        s.infer_beta = infer_beta;
        s.scheme = inversion;
        return s;
    }
};

// ---------------------------------------------------------------------------
// JSON mapping

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; })) {
            throw ConfigError("unknown key `" + k + "` in " + where);
        }
    }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

inline Distribution parse_distribution(const json& j, const std::string& where) {
    if (!j.is_object() || j.size() != 1) throw ConfigError(where + " must hold exactly one of normal, gamma, uniform");
    const auto& [kind, args] = *j.items().begin();
    const std::string w = where + "." + kind;
    if (kind == "normal") {
        reject_unknown(args, {"mean", "sd"}, w);
        return Normal{get<double>(args, "mean", w), get<double>(args, "sd", w)};
    }
    if (kind == "gamma") {
        reject_unknown(args, {"shape", "rate"}, w);
        return Gamma{get<double>(args, "shape", w), get<double>(args, "rate", w)};
    }
    if (kind == "uniform") {
        reject_unknown(args, {"lower", "upper"}, w);
        return Uniform{get<double>(args, "lower", w), get<double>(args, "upper", w)};
    }
    throw ConfigError(where + ": unknown distribution `" + kind + "`");
}

inline json distribution_json(const Distribution& d) {
    return std::visit(
        [](const auto& v) -> json {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Normal>) {
                return {{"normal", {{"mean", v.mean}, {"sd", v.sd}}}};
            } else if constexpr (std::is_same_v<V, Gamma>) {
                return {{"gamma", {{"shape", v.shape}, {"rate", v.rate}}}};
            } else {
                return {{"uniform", {{"lower", v.lower}, {"upper", v.upper}}}};
            }
        },
        d);
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::get;
    RunConfig c;
    detail::reject_unknown(j, {"models", "prior", "noise", "infer_beta", "sampler", "inversion", "tau_grid", "bridge",
                               "init", "output_dir"},
                           "config");
    if (j.contains("models")) c.models = get<std::vector<std::size_t>>(j, "models", "config");
    if (j.contains("prior")) {
        const auto& p = j.at("prior");
        detail::reject_unknown(p, {"preset", "P", "T", "W", "R", "M", "eta"}, "prior");
        if (p.contains("preset")) c.prior_preset = get<std::string>(p, "preset", "prior");
        if (c.prior_preset == "standard") {
            c.prior = PriorSpec::standard();
        } else if (c.prior_preset == "vague") {
            c.prior = PriorSpec::vague();
        } else {
            throw ConfigError("prior.preset must be `standard` or `vague`");
        }
        const std::pair<const char*, Distribution*> fields[] = {
            {"P", &c.prior.pressure_match},   {"T", &c.prior.time_match},
            {"W", &c.prior.storage_skin},     {"R", &c.prior.radius_increment},
            {"M", &c.prior.mobility_ratio},   {"eta", &c.prior.diffusivity_ratio}};
        for (const auto& [key, field] : fields) {
            if (p.contains(key)) *field = detail::parse_distribution(p.at(key), "prior." + std::string(key));
        }
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        detail::reject_unknown(n, {"sigma_p", "sigma_p_upper", "rate_fraction", "sigma_p0"}, "noise");
        if (n.contains("sigma_p")) {
            const auto& s = n.at("sigma_p");
            if (s.is_string()) {
                if (s.get<std::string>() != "sample") throw ConfigError("noise.sigma_p must be a number or \"sample\"");
                c.fixed_sigma_p.reset();
            } else {
                c.fixed_sigma_p = get<double>(n, "sigma_p", "noise");
            }
        }
        if (n.contains("sigma_p_upper")) c.sigma_p_upper = get<double>(n, "sigma_p_upper", "noise");
        if (n.contains("rate_fraction")) c.rate_noise_fraction = get<double>(n, "rate_fraction", "noise");
        if (n.contains("sigma_p0")) c.sigma_p0 = get<double>(n, "sigma_p0", "noise");
    }
    if (j.contains("infer_beta")) c.infer_beta = get<bool>(j, "infer_beta", "config");
    if (j.contains("sampler")) {
        const auto& s = j.at("sampler");
        detail::reject_unknown(s, {"chains", "iterations", "thinning", "burn_in", "seed", "archive_interval",
                                   "initial_archive", "snooker_probability", "jump_probability", "jitter",
                                   "snooker_correction", "max_init_attempts", "progress_interval"},
                               "sampler");
        auto& sc = c.sampler;
        if (s.contains("chains")) sc.chains = get<int>(s, "chains", "sampler");
        if (s.contains("iterations")) sc.iterations = get<long>(s, "iterations", "sampler");
        if (s.contains("thinning")) sc.thinning = get<long>(s, "thinning", "sampler");
        if (s.contains("burn_in")) sc.burn_in = get<long>(s, "burn_in", "sampler");
        if (s.contains("seed")) c.seed = get<std::uint64_t>(s, "seed", "sampler");
        if (s.contains("archive_interval")) sc.archive_interval = get<int>(s, "archive_interval", "sampler");
        if (s.contains("initial_archive")) sc.initial_archive = get<int>(s, "initial_archive", "sampler");
        if (s.contains("snooker_probability")) sc.snooker_probability = get<double>(s, "snooker_probability", "sampler");
        if (s.contains("jump_probability")) sc.jump_probability = get<double>(s, "jump_probability", "sampler");
        if (s.contains("jitter")) sc.jitter = get<double>(s, "jitter", "sampler");
        if (s.contains("snooker_correction")) sc.snooker_correction = get<bool>(s, "snooker_correction", "sampler");
        if (s.contains("max_init_attempts")) sc.max_init_attempts = get<int>(s, "max_init_attempts", "sampler");
        if (s.contains("progress_interval")) sc.progress_interval = get<long>(s, "progress_interval", "sampler");
    }
    if (j.contains("inversion")) {
        const auto& inv = j.at("inversion");
        detail::reject_unknown(inv, {"method", "order"}, "inversion");
        const auto method = inv.contains("method") ? get<std::string>(inv, "method", "inversion") : "stehfest";
        if (method == "stehfest") {
            c.inversion = laplace::InversionScheme::stehfest();
        } else if (method == "talbot") {
            c.inversion = laplace::InversionScheme::talbot();
        } else {
            throw ConfigError("inversion.method must be `stehfest` or `talbot`");
        }
        if (inv.contains("order")) c.inversion.order = get<int>(inv, "order", "inversion");
    }
    if (j.contains("tau_grid")) {
        const auto& t = j.at("tau_grid");
        detail::reject_unknown(t, {"points", "min", "max"}, "tau_grid");
        if (t.contains("points")) c.tau.points = get<int>(t, "points", "tau_grid");
        if (t.contains("min")) c.tau.min = get<double>(t, "min", "tau_grid");
        if (t.contains("max")) c.tau.max = get<double>(t, "max", "tau_grid");
    }
    if (j.contains("bridge")) {
        const auto& b = j.at("bridge");
        detail::reject_unknown(b, {"enabled", "reference_scale", "reference_draws"}, "bridge");
        if (b.contains("enabled")) c.bridge.enabled = get<bool>(b, "enabled", "bridge");
        if (b.contains("reference_scale")) c.bridge.reference_scale = get<double>(b, "reference_scale", "bridge");
        if (b.contains("reference_draws")) c.bridge.reference_draws = get<std::size_t>(b, "reference_draws", "bridge");
    }
    if (j.contains("init")) {
        const auto& i = j.at("init");
        detail::reject_unknown(i, {"method", "candidates", "coarse", "max_iterations"}, "init");
        if (i.contains("method")) {
            const auto m = get<std::string>(i, "method", "init");
            if (m == "prior") {
                c.init.method = InitSettings::Method::Prior;
            } else if (m == "optimize") {
                c.init.method = InitSettings::Method::Optimize;
            } else {
                throw ConfigError("init.method must be prior or optimize");
            }
        }
        if (i.contains("candidates")) c.init.candidates = get<int>(i, "candidates", "init");
        if (i.contains("coarse")) c.init.coarse = get<int>(i, "coarse", "init");
        if (i.contains("max_iterations")) c.init.max_iterations = get<int>(i, "max_iterations", "init");
    }
    if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", "config");
    return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
    using nlohmann::json;
    json prior = {{"preset", c.prior_preset},
                  {"P", detail::distribution_json(c.prior.pressure_match)},
                  {"T", detail::distribution_json(c.prior.time_match)},
                  {"W", detail::distribution_json(c.prior.storage_skin)},
                  {"R", detail::distribution_json(c.prior.radius_increment)},
                  {"M", detail::distribution_json(c.prior.mobility_ratio)},
                  {"eta", detail::distribution_json(c.prior.diffusivity_ratio)}};
    json noise = {{"sigma_p_upper", c.sigma_p_upper}, {"rate_fraction", c.rate_noise_fraction}, {"sigma_p0", c.sigma_p0}};
    if (c.fixed_sigma_p) {
        noise["sigma_p"] = *c.fixed_sigma_p;
    } else {
        noise["sigma_p"] = "sample";
    }
    const auto& s = c.sampler;
    json sampler = {{"chains", s.chains},
                    {"iterations", s.iterations},
                    {"thinning", s.thinning},
                    {"burn_in", s.burn_in},
                    {"archive_interval", s.archive_interval},
                    {"initial_archive", s.initial_archive},
                    {"snooker_probability", s.snooker_probability},
                    {"jump_probability", s.jump_probability},
                    {"jitter", s.jitter},
                    {"snooker_correction", s.snooker_correction},
                    {"max_init_attempts", s.max_init_attempts},
                    {"progress_interval", s.progress_interval}};
    if (c.seed) sampler["seed"] = *c.seed;
    json tau = {{"points", c.tau.points}};
    if (c.tau.min) tau["min"] = *c.tau.min;
    if (c.tau.max) tau["max"] = *c.tau.max;
    return {{"models", c.models},
            {"prior", prior},
            {"noise", noise},
            {"infer_beta", c.infer_beta},
            {"sampler", sampler},
            {"inversion", {{"method", laplace::to_string(c.inversion.method)}, {"order", c.inversion.order}}},
            {"tau_grid", tau},
            {"bridge",
             {{"enabled", c.bridge.enabled},
              {"reference_scale", c.bridge.reference_scale},
              {"reference_draws", c.bridge.reference_draws}}},
            {"init",
             {{"method", to_string(c.init.method)},
              {"candidates", c.init.candidates},
              {"coarse", c.init.coarse},
              {"max_iterations", c.init.max_iterations}}},
            {"output_dir", c.output_dir.string()}};
}

// ---------------------------------------------------------------------------
// Post-processing helpers

/// Linear-interpolation quantile of an unsorted sample.
inline double quantile(std::vector<double> v, double p) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct StepSeries {
    std::vector<double> rho;  // rho_i = log10 sum_{j<=i} 10^R_j, one per transition
    std::vector<double> m;    // m_i = sum_{j<i} M_j, one per region (m_1 = 0)
};

inline StepSeries step_series(const ReservoirParams& p) {
    StepSeries s;
    // Radii relative to the first keep rho_1 = R_1 exact.
    const double first = p.transitions.empty() ? 0.0 : p.transitions.front().radius_increment;
    double relative = 0.0, mob = 0.0;
    s.m.push_back(0.0);
    for (const auto& tr : p.transitions) {
        relative += std::pow(10.0, tr.radius_increment - first);
        s.rho.push_back(first + std::log10(relative));
        mob += tr.mobility_ratio;
        s.m.push_back(mob);
    }
    return s;
}

/// Default response grid: [ln(min spacing)/2, ln(2 * duration)].
inline std::vector<double> tau_grid(const TauGrid& g, const WellTestData& data) {
    double lo, hi;
    if (g.min) {
        lo = *g.min;
    } else {
        double spacing = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < data.times.size(); ++i) spacing = std::min(spacing, data.times[i] - data.times[i - 1]);
        if (!std::isfinite(spacing)) spacing = data.times.front() - data.schedule.start();
        if (!(spacing > 0.0)) throw InvalidArgument("cannot derive a tau grid from the observation times");
        lo = 0.5 * std::log(spacing);
    }
    if (g.max) {
        hi = *g.max;
    } else {
        const double duration = std::max(data.times.back(), data.schedule.end()) - data.schedule.start();
        hi = std::log(2.0 * duration);
    }
    if (!(hi > lo)) throw InvalidArgument("tau grid is empty");
    std::vector<double> tau(static_cast<std::size_t>(g.points));
    for (int i = 0; i < g.points; ++i) tau[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (g.points - 1);
    return tau;
}

/// z(tau) of one kernel on a grid; NaN where the inverted response is not positive.
inline std::vector<double> response_curve(const ResponseModel& model, std::span<const double> tau) {
    std::vector<double> z(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        try {
            const double g = model.g(std::exp(tau[i]));
            z[i] = g > 0.0 ? tau[i] + std::log(g) : std::numeric_limits<double>::quiet_NaN();
        } catch (const NumericError&) {
            z[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return z;
}

/// Least-squares slope of z against tau over [tau_lo, tau_hi] using `points` evaluations.
inline double response_slope(const ResponseModel& model, double tau_lo, double tau_hi, int points = 21) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < points; ++i) {
        const double tau = tau_lo + (tau_hi - tau_lo) * i / (points - 1);
        const double z = model.z(tau);
        sx += tau;
        sy += z;
        sxx += tau * tau;
        sxy += tau * z;
    }
    return (points * sxy - sx * sy) / (points * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Driver

struct ModelResult {
    std::size_t transitions = 0;
    std::vector<std::string> names;
    mcmc::RunResult run;
    std::vector<Eigen::VectorXd> betas;  // one per draw when beta is inferred
    long beta_truncations = 0;
    std::size_t map_index = 0;
    std::vector<double> posterior_mean_pressure;
    ModelScore score;
    std::size_t parameters = 0;    // k
    std::size_t observations = 0;  // n_obs
    long numeric_failures = 0;
    std::vector<std::string> warnings;
};

struct RunReport {
    std::vector<ModelResult> models;
    int exit_code = 0;
    nlohmann::json manifest;
};

struct RunInputs {
    WellTestData data;
    std::optional<std::vector<double>> true_pressures;
    std::string pressure_file;
    std::string rate_file;
};

namespace detail {

inline std::uint64_t model_seed(std::uint64_t seed, std::size_t transitions, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(transitions), static_cast<std::uint32_t>(stream)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
    }
    template <class... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(values), first = false), ...);
        os_ << '\n';
    }
    void cells(const std::vector<double>& values, bool leading_comma) {
        for (std::size_t i = 0; i < values.size(); ++i) os_ << ((i || leading_comma) ? "," : "") << cell(values[i]);
    }
    void end_row() { os_ << '\n'; }
    std::ostringstream& stream() { return os_; }
    std::string str() const { return os_.str(); }

    static std::string cell(double v) { return io::format_double(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <class I>
        requires std::is_integral_v<I>
    static std::string cell(I v) {
        return std::to_string(v);
    }

private:
    std::ostringstream os_;
};

}  // namespace detail

/// Information criteria, convergence diagnostics and the bridge-sampling evidence
/// for the draws already held in `r`.
inline void score_model(const RunConfig& config, const DeconvolutionTarget& target, ModelResult& r) {
    const auto& draws = r.run.draws;
    r.score = ModelScore{};
    r.score.transitions = r.transitions;
    r.parameters = target.dimension();
    r.observations = target.likelihood_observations();
    if (draws.empty()) return;
    const std::size_t d = target.dimension();
    std::vector<double> loglik;
    std::vector<double> mean(d, 0.0);
    for (const auto& dr : draws) {
        loglik.push_back(dr.log_likelihood);
        for (std::size_t j = 0; j < d; ++j) mean[j] += dr.x[j] / static_cast<double>(draws.size());
    }
    const double at_mean = target.evaluate(mean).log_likelihood;
    if (std::isfinite(at_mean)) {
        r.score.criteria = information_criteria(loglik, at_mean, d, r.observations);
    } else {
        r.warnings.push_back("posterior mean lies outside the support; DIC unavailable");
        r.score.criteria = information_criteria(loglik, loglik.front(), d, r.observations);
        r.score.criteria.dic = std::numeric_limits<double>::quiet_NaN();
        r.score.criteria.effective_parameters = std::numeric_limits<double>::quiet_NaN();
    }

    int chains = 0;
    for (const auto& dr : draws) chains = std::max(chains, dr.chain + 1);
    std::vector<std::vector<std::vector<double>>> by_chain(static_cast<std::size_t>(chains));
    std::vector<std::vector<double>> log_q_by_chain(static_cast<std::size_t>(chains));
    for (const auto& dr : draws) {
        by_chain[static_cast<std::size_t>(dr.chain)].push_back(dr.x);
        log_q_by_chain[static_cast<std::size_t>(dr.chain)].push_back(dr.log_target);
    }
    if (by_chain.front().size() >= 10) {
        r.score.diagnostics = convergence(by_chain, r.names);
    } else {
        r.warnings.push_back("fewer than 10 draws per chain; convergence diagnostics skipped");
    }

    if (config.bridge.enabled) {
        std::vector<std::vector<double>> ordered;
        std::vector<double> log_q;
        for (std::size_t c = 0; c < by_chain.size(); ++c) {
            ordered.insert(ordered.end(), by_chain[c].begin(), by_chain[c].end());
            log_q.insert(log_q.end(), log_q_by_chain[c].begin(), log_q_by_chain[c].end());
        }
        BridgeOptions bo;
        bo.reference_scale = config.bridge.reference_scale;
        bo.reference_draws = config.bridge.reference_draws;
        bo.seed = detail::model_seed(*config.seed, r.transitions, 2);
        try {
            r.score.evidence = bridge_sampling(ordered, log_q, target, bo);
        } catch (const std::exception& e) {
            r.warnings.push_back(std::string("marginal likelihood unavailable: ") + e.what());
        }
    }
}

/// Samples one model, then derives the MAP draw, beta draws, posterior-mean
/// pressures and scores.
/// Embeds a point of a model with fewer transitions: the extra transitions get
/// radius increments from `donor`, zero mobility ratio and the outermost
/// diffusivity ratio (eta is relative to region 1), which leaves the response
/// unchanged.
inline std::vector<double> nested_point(std::span<const double> simpler, std::size_t simpler_transitions,
                                        std::span<const double> donor, std::size_t transitions) {
    const std::size_t head = 3 * (simpler_transitions + 1);
    const std::size_t full = 3 * (transitions + 1);
    if (simpler_transitions >= transitions || simpler.size() < head || donor.size() < full ||
        simpler.size() - head != donor.size() - full) {
        throw InvalidArgument("nested point needs a simpler model with a compatible layout");
    }
    std::vector<double> x(simpler.begin(), simpler.begin() + static_cast<std::ptrdiff_t>(head));
    const double outer_eta = simpler_transitions > 0 ? simpler[head - 1] : 0.0;
    for (std::size_t i = head; i < full; i += 3) {
        x.push_back(donor[i]);
        x.push_back(0.0);
        x.push_back(outer_eta);
    }
    x.insert(x.end(), simpler.begin() + static_cast<std::ptrdiff_t>(head), simpler.end());
    return x;
}

// Starts that sit further than this below the best start, in log posterior,
// are taken to be stuck in a minor mode.
inline constexpr double kStartGap = 50.0;

/// One start per chain. Prior draws, each with its best pressure match on a
/// coarse scan, are screened by posterior density. The most promising get a
/// short Nelder-Mead run, and the best of those, together with nested
/// embeddings of a simpler fit's MAP when available, are polished fully. A chain whose polished start is stuck in a minor mode starts from a
/// jittered copy of the best start instead.
inline std::vector<std::vector<double>> optimized_starts(const DeconvolutionTarget& target, const InitSettings& init,
                                                         int chains, std::uint64_t seed,
                                                         const ModelResult* simpler = nullptr) {
    mcmc::Rng rng(seed);
    const auto objective = [&target](std::span<const double> x) { return -target(x); };
    const bool nest = simpler && !simpler->run.draws.empty();
    const auto width = static_cast<std::size_t>(chains);

    struct Point {
        std::vector<double> x;
        double value;
    };
    const auto better = [](const Point& a, const Point& b) { return a.value > b.value; };
    const auto keep_best = [&better](std::vector<Point>& v, std::size_t n) {
        std::stable_sort(v.begin(), v.end(), better);
        if (v.size() > n) v.resize(n);
    };

    // P only scales the response. Scanning it moves a draw off the flat region
    // where the predicted drawdown is negligible and the simplex stalls.
    const auto scan_pressure_match = [&target](Point& p) {
        auto y = p.x;
        const double centre = p.x[0];
        for (int k = -30; k <= 30; ++k) {
            y[0] = centre + 0.1 * k;
            const double v = target(y);
            if (v > p.value) p = {y, v};
        }
    };

    std::vector<Point> pool, nested;
    const auto wanted = static_cast<std::size_t>(init.candidates) * width;
    for (std::size_t c = 0; pool.size() < wanted; ++c) {
        if (c >= 100 * wanted) throw NumericError("no prior draw with finite posterior density");
        auto x = target.sample_prior(rng);
        if (nest) {
            auto y = nested_point(simpler->run.draws[simpler->map_index].x, simpler->transitions, x,
                                  target.settings().transitions);
            const double v = target(y);
            if (std::isfinite(v)) nested.push_back({std::move(y), v});
        }
        const double v = target(x);
        Point p{std::move(x), v};
        scan_pressure_match(p);
        if (std::isfinite(p.value)) pool.push_back(std::move(p));
    }
    keep_best(pool, static_cast<std::size_t>(init.coarse) * width);
    keep_best(nested, width);

    const auto polish = [&](std::vector<Point>& points, const optimize::NelderMeadOptions& options) {
        for (auto& p : points) {
            auto m = optimize::nelder_mead(objective, p.x, options);
            const double v = target(m.x);
            if (std::isfinite(v) && v > p.value) p = {std::move(m.x), v};
        }
    };
    optimize::NelderMeadOptions quick;
    quick.max_iterations = 300;
    quick.max_restarts = 0;
    quick.size_tolerance = 1e-2;
    polish(pool, quick);
    keep_best(pool, width);
    // Nested starts are usually good already; they should not crowd out the
    // prior-based ones before the full polish.
    pool.insert(pool.end(), nested.begin(), nested.end());
    optimize::NelderMeadOptions full;
    full.max_iterations = init.max_iterations;
    polish(pool, full);
    keep_best(pool, width);

    std::vector<std::vector<double>> starts;
    std::normal_distribution<double> unit(0.0, 1.0);
    const double floor = pool[0].value - kStartGap;
    for (std::size_t k = 0; k < width; ++k) {
        if (k < pool.size() && pool[k].value >= floor) {
            starts.push_back(pool[k].x);
            continue;
        }
        auto y = pool[0].x;
        for (double scale = 1e-2; scale > 1e-8; scale /= 2.0) {
            auto trial = pool[0].x;
            for (auto& v : trial) v += scale * unit(rng);
            if (target(trial) >= floor) {
                y = std::move(trial);
                break;
            }
        }
        starts.push_back(std::move(y));
    }
    return starts;
}

inline ModelResult fit_model(const RunConfig& config, const RunInputs& inputs, std::size_t transitions,
                             std::ostream* log = nullptr, const ModelResult* simpler = nullptr) {
    ModelResult r;
    r.transitions = transitions;
    const DeconvolutionTarget target(inputs.data, config.target_settings(transitions));
    r.names = target.names();
    mcmc::SamplerConfig sc = config.sampler;
    sc.seed = detail::model_seed(*config.seed, transitions, 0);
    std::function<void(const mcmc::Progress&)> progress;
    if (log) {
        progress = [log, transitions](const mcmc::Progress& p) {
            *log << "[n=" << transitions << "] generation " << p.generation << "/" << p.iterations << " acceptance";
            for (double a : p.acceptance) *log << ' ' << io::format_double(std::round(a * 1000.0) / 1000.0);
            *log << std::endl;
        };
    }
    std::vector<std::vector<double>> starts;
    if (config.init.method == InitSettings::Method::Optimize) {
        starts = optimized_starts(target, config.init, sc.chains, detail::model_seed(*config.seed, transitions, 3),
                                  simpler);
        if (log) {
            *log << "[n=" << transitions << "] optimized starts:";
            for (const auto& x : starts) *log << ' ' << io::format_double(target(x));
            *log << std::endl;
        }
    }
    r.run = mcmc::run(
        sc, target, target.dimension(), [&target](mcmc::Rng& rng) { return target.sample_prior(rng); }, progress,
        starts);
    r.warnings = r.run.warnings;
    const auto& draws = r.run.draws;
    if (!draws.empty()) {
        for (std::size_t i = 1; i < draws.size(); ++i) {
            if (draws[i].log_target > draws[r.map_index].log_target) r.map_index = i;
        }
        const auto& data = inputs.data;
        Eigen::VectorXd pressure_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.observations()));
        mcmc::Rng beta_rng(detail::model_seed(*config.seed, transitions, 1));
        for (const auto& d : draws) {
            const auto conv = target.convolution(d.x);
            if (config.infer_beta) {
                const auto beta = sample_beta(target.conditional(d.x), beta_rng);
                if (beta.truncated) ++r.beta_truncations;
                pressure_sum += predict_pressure(beta.beta(0), conv, beta.beta.tail(conv.cols()));
                r.betas.push_back(beta.beta);
            } else {
                pressure_sum += predict_pressure(data.initial_pressure, conv, data.rate_vector());
            }
        }
        pressure_sum /= static_cast<double>(draws.size());
        r.posterior_mean_pressure.assign(pressure_sum.data(), pressure_sum.data() + pressure_sum.size());
    }
    score_model(config, target, r);
    r.numeric_failures = target.numeric_failures();
    return r;
}

/// Reads a draws table written by write_model_artifacts.
inline std::vector<mcmc::Draw> load_draws(const std::filesystem::path& path, const std::vector<std::string>& names) {
    const auto t = io::read_csv(path);
    const std::size_t d = names.size();
    if (t.header.size() < d + 4 || t.header[0] != "chain" || t.header[1] != "iteration") {
        throw ParseError(path.string(), 1, 1, "not a draws table");
    }
    for (std::size_t j = 0; j < d; ++j) {
        if (t.header[2 + j] != names[j]) throw ParseError(path.string(), 1, 3 + j, "expected column `" + names[j] + "`");
    }
    if (t.header[2 + d] != "log_posterior" || t.header[3 + d] != "log_likelihood") {
        throw ParseError(path.string(), 1, 3 + d, "expected log_posterior,log_likelihood");
    }
    std::vector<mcmc::Draw> draws;
    for (const auto& row : t.rows) {
        mcmc::Draw dr;
        dr.chain = static_cast<int>(row[0]);
        dr.iteration = static_cast<long>(row[1]);
        dr.x.assign(row.begin() + 2, row.begin() + 2 + static_cast<std::ptrdiff_t>(d));
        dr.log_target = row[2 + d];
        dr.log_likelihood = row[3 + d];
        draws.push_back(std::move(dr));
    }
    return draws;
}

/// Writes the per-model artifact files into `dir`; returns their names.
inline std::vector<std::string> write_model_artifacts(const RunConfig& config, const RunInputs& inputs,
                                                      const ModelResult& r, const std::filesystem::path& dir) {
    using detail::CsvBuilder;
    std::vector<std::string> written;
    const auto& data = inputs.data;
    const auto& draws = r.run.draws;
    const std::size_t ntheta = 3 * (r.transitions + 1);
    auto emit = [&](const std::string& name, const std::string& text) {
        io::write_text(dir / name, text);
        written.push_back(name);
    };

    // (a) draws
    {
        std::vector<std::string> header{"chain", "iteration"};
        header.insert(header.end(), r.names.begin(), r.names.end());
        header.push_back("log_posterior");
        header.push_back("log_likelihood");
        if (config.infer_beta) {
            header.push_back("p0_true");
            for (std::size_t j = 1; j <= data.intervals(); ++j) header.push_back("q" + std::to_string(j) + "_true");
        }
        CsvBuilder csv(header);
        for (std::size_t i = 0; i < draws.size(); ++i) {
            const auto& dr = draws[i];
            csv.stream() << dr.chain << ',' << dr.iteration;
            csv.cells(dr.x, true);
            csv.cells({dr.log_target, dr.log_likelihood}, true);
            if (config.infer_beta) csv.cells(std::vector<double>(r.betas[i].data(), r.betas[i].data() + r.betas[i].size()), true);
            csv.end_row();
        }
        emit("draws.csv", csv.str());
    }
    if (draws.empty()) return written;

    // (b) response fan
    {
        const auto tau = tau_grid(config.tau, data);
        CsvBuilder grid({"index", "tau", "time"});
        for (std::size_t i = 0; i < tau.size(); ++i) grid.row(i, tau[i], std::exp(tau[i]));
        emit("tau_grid.csv", grid.str());
        std::vector<std::string> header{"draw", "chain", "iteration", "is_map"};
        for (std::size_t i = 0; i < tau.size(); ++i) header.push_back("z" + std::to_string(i));
        CsvBuilder csv(header);
        for (std::size_t i = 0; i < draws.size(); ++i) {
            const auto& dr = draws[i];
            const ResponseModel model(ReservoirParams::from_vector(std::span(dr.x).first(ntheta)), config.inversion);
            csv.stream() << i << ',' << dr.chain << ',' << dr.iteration << ',' << (i == r.map_index ? 1 : 0);
            csv.cells(response_curve(model, tau), true);
            csv.end_row();
        }
        emit("response.csv", csv.str());
    }

    // (c) residuals
    {
        const DeconvolutionTarget target(data, config.target_settings(r.transitions));
        const std::size_t m = data.observations();
        std::vector<std::vector<double>> predicted(m);
        for (std::size_t i = 0; i < draws.size(); ++i) {
            const auto conv = target.convolution(draws[i].x);
            const Eigen::VectorXd p =
                config.infer_beta ? predict_pressure(r.betas[i](0), conv, r.betas[i].tail(conv.cols()))
                                  : predict_pressure(data.initial_pressure, conv, data.rate_vector());
            for (std::size_t k = 0; k < m; ++k) predicted[k].push_back(p(static_cast<Eigen::Index>(k)));
        }
        const bool truth = inputs.true_pressures.has_value();
        std::vector<std::string> header{"index", "time", "observed", "posterior_mean", "residual_mean", "residual_q025",
                                        "residual_q975"};
        if (truth) {
            for (const char* h : {"truth", "truth_residual_mean", "truth_residual_min", "truth_residual_max",
                                  "truth_residual_q025", "truth_residual_q975"}) {
                header.emplace_back(h);
            }
        }
        CsvBuilder csv(header);
        for (std::size_t k = 0; k < m; ++k) {
            std::vector<double> res;
            for (double v : predicted[k]) res.push_back(v - data.pressures[k]);
            const double mean = r.posterior_mean_pressure[k];
            csv.stream() << k << ',' << CsvBuilder::cell(data.times[k]) << ',' << CsvBuilder::cell(data.pressures[k]);
            csv.cells({mean, mean - data.pressures[k], quantile(res, 0.025), quantile(res, 0.975)}, true);
            if (truth) {
                const double tp = (*inputs.true_pressures)[k];
                std::vector<double> tr;
                for (double v : predicted[k]) tr.push_back(v - tp);
                csv.cells({tp, mean - tp, *std::min_element(tr.begin(), tr.end()), *std::max_element(tr.begin(), tr.end()),
                           quantile(tr, 0.025), quantile(tr, 0.975)},
                          true);
            }
            csv.end_row();
        }
        emit("residuals.csv", csv.str());
    }

    // (d) beta summaries
    if (config.infer_beta) {
        CsvBuilder csv({"name", "observed", "mean", "sd", "q025", "q975"});
        for (std::size_t j = 0; j <= data.intervals(); ++j) {
            std::vector<double> v;
            for (const auto& b : r.betas) v.push_back(b(static_cast<Eigen::Index>(j)));
            double mu = 0, ss = 0;
            for (double x : v) mu += x / static_cast<double>(v.size());
            for (double x : v) ss += (x - mu) * (x - mu);
            const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
            const double observed = j == 0 ? data.initial_pressure : data.schedule.rates[j - 1];
            csv.row(j == 0 ? std::string("p0") : "q" + std::to_string(j), observed, mu, sd, quantile(v, 0.025),
                    quantile(v, 0.975));
        }
        emit("beta_summary.csv", csv.str());
    }

    // (e) step plot
    {
        std::vector<std::vector<double>> rho(r.transitions), mob(r.transitions + 1);
        for (const auto& dr : draws) {
            const auto s = step_series(ReservoirParams::from_vector(std::span(dr.x).first(ntheta)));
            for (std::size_t i = 0; i < s.rho.size(); ++i) rho[i].push_back(s.rho[i]);
            for (std::size_t i = 0; i < s.m.size(); ++i) mob[i].push_back(s.m[i]);
        }
        CsvBuilder csv({"series", "index", "mean", "min", "max", "q005", "q025", "q975", "q995"});
        auto summary = [&csv](const char* name, std::size_t index, const std::vector<double>& v) {
            double mu = 0;
            for (double x : v) mu += x / static_cast<double>(v.size());
            csv.row(name, index, mu, *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end()),
                    quantile(v, 0.005), quantile(v, 0.025), quantile(v, 0.975), quantile(v, 0.995));
        };
        for (std::size_t i = 0; i < rho.size(); ++i) summary("rho", i + 1, rho[i]);
        for (std::size_t i = 0; i < mob.size(); ++i) summary("m", i + 1, mob[i]);
        emit("steps.csv", csv.str());
    }

    // diagnostics
    {
        CsvBuilder csv({"parameter", "rhat", "ess", "constant"});
        for (const auto& dg : r.score.diagnostics) {
            csv.row(dg.name, dg.rhat.value_or(std::numeric_limits<double>::quiet_NaN()), dg.ess, dg.constant ? 1 : 0);
        }
        emit("diagnostics.csv", csv.str());
    }
    return written;
}

inline std::string scores_csv(const std::vector<ModelResult>& models) {
    detail::CsvBuilder csv({"transitions", "k", "n_obs", "max_log_likelihood", "aic", "bic", "dic", "p_d",
                            "neg_log_marginal_likelihood", "nlml_se", "max_rhat", "min_ess"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : models) {
        if (r.run.draws.empty()) continue;
        const auto& c = r.score.criteria;
        csv.row(r.transitions, r.parameters, r.observations, c.max_log_likelihood, c.aic, c.bic, c.dic,
                c.effective_parameters, r.score.neg_log_marginal_likelihood(),
                r.score.evidence ? r.score.evidence->standard_error : nan, r.score.max_rhat().value_or(nan),
                r.score.diagnostics.empty() ? nan : r.score.min_ess());
    }
    return csv.str();
}

inline constexpr double kRhatThreshold = 1.1;

inline nlohmann::json model_manifest(const ModelResult& r, const std::vector<std::string>& artifacts) {
    using nlohmann::json;
    json chains = json::array();
    for (const auto& st : r.run.stats) {
        chains.push_back({{"proposed", st.proposed},
                          {"accepted", st.accepted},
                          {"snooker_proposed", st.snooker_proposed},
                          {"snooker_accepted", st.snooker_accepted},
                          {"nan_rejections", st.nan_rejections},
                          {"init_redraws", st.init_redraws}});
    }
    json m = {{"transitions", r.transitions},
              {"parameters", r.names},
              {"retained_draws", r.run.draws.size()},
              {"archive_rows", r.run.archive_rows},
              {"chains", chains},
              {"numeric_failures", r.numeric_failures},
              {"beta_truncations", r.beta_truncations},
              {"warnings", r.warnings},
              {"artifacts", artifacts}};
    if (!r.run.draws.empty()) {
        const auto& c = r.score.criteria;
        auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        m["map_draw"] = r.map_index;
        m["score"] = {{"k", r.parameters},
                      {"n_obs", r.observations},
                      {"max_log_likelihood", num(c.max_log_likelihood)},
                      {"aic", num(c.aic)},
                      {"bic", num(c.bic)},
                      {"dic", num(c.dic)},
                      {"p_d", num(c.effective_parameters)},
                      {"neg_log_marginal_likelihood", num(r.score.neg_log_marginal_likelihood())},
                      {"nlml_se", r.score.evidence ? num(r.score.evidence->standard_error) : json(nullptr)},
                      {"max_rhat", r.score.max_rhat() ? num(*r.score.max_rhat()) : json(nullptr)}};
    }
    return m;
}

/// Fits every requested model and writes all artifacts under config.output_dir.
/// Exit code 0, or 4 when any split R-hat exceeds 1.1. Errors propagate after the
/// artifacts of completed models and a manifest marked as failed are written.
inline RunReport run_inference(const RunConfig& config, const RunInputs& inputs, std::ostream* log = nullptr) {
    using nlohmann::json;
    using clock = std::chrono::steady_clock;
    config.validate();
    if (!config.seed) throw ConfigError("a seed is required");
    inputs.data.validate();
    const auto& out = config.output_dir;
    std::filesystem::create_directories(out);

    RunReport report;
    json models = json::array();
    json timings = json::object();
    const auto versions = json{{"welltest", kVersion},
                               {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                             "." + std::to_string(EIGEN_MINOR_VERSION)},
                               {"boost", BOOST_LIB_VERSION},
                               {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                               {"compiler", __VERSION__}};
    auto manifest = [&](const std::string& status) {
        json m = {{"status", status},
                  {"versions", versions},
                  {"seed", *config.seed},
                  {"config", to_json(config)},
                  {"data",
                   {{"pressure_file", inputs.pressure_file},
                    {"rate_file", inputs.rate_file},
                    {"observations", inputs.data.observations()},
                    {"rate_intervals", inputs.data.intervals()},
                    {"initial_pressure", inputs.data.initial_pressure},
                    {"truth_known", inputs.true_pressures.has_value()}}},
                  {"models", models},
                  {"exit_code", report.exit_code}};
        io::write_text(out / "manifest.json", m.dump(2) + "\n");
        io::write_text(out / "timings.json", timings.dump(2) + "\n");
        io::write_text(out / "scores.csv", scores_csv(report.models));
    };

    for (std::size_t n : config.models) {
        const auto start = clock::now();
        try {
            const ModelResult* simpler = nullptr;
            for (const auto& prev : report.models) {
                if (prev.transitions < n && (!simpler || prev.transitions > simpler->transitions)) simpler = &prev;
            }
            auto r = fit_model(config, inputs, n, log, simpler);
            const auto fitted = clock::now();
            const auto dir = out / ("model_n" + std::to_string(n));
            const auto artifacts = write_model_artifacts(config, inputs, r, dir);
            const auto done = clock::now();
            timings["model_n" + std::to_string(n)] = {
                {"fit_seconds", std::chrono::duration<double>(fitted - start).count()},
                {"artifact_seconds", std::chrono::duration<double>(done - fitted).count()}};
            models.push_back(model_manifest(r, artifacts));
            if (const auto rh = r.score.max_rhat(); rh && *rh > kRhatThreshold) report.exit_code = 4;
            for (const auto& w : r.warnings) {
                if (log) *log << "[n=" << n << "] warning: " << w << '\n';
            }
            report.models.push_back(std::move(r));
        } catch (...) {
            report.exit_code = 3;
            manifest("failed");
            throw;
        }
    }
    manifest(report.exit_code == 4 ? "not_converged" : "ok");
    report.manifest = json::parse(io::read_text(out / "manifest.json"));
    return report;
}

}  // namespace welltest
