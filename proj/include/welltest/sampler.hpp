#pragma once

// DEzs: differential-evolution MCMC drawing difference vectors from an archive
// of past states, mixed with snooker updates.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "welltest/errors.hpp"

namespace welltest::mcmc {

using Rng = std::mt19937_64;

struct SamplerConfig {
    int chains = 3;
    long iterations = 10000;  // generations; every chain moves once per generation
    long thinning = 1;
    long burn_in = 0;
    std::uint64_t seed = 0;
    int archive_interval = 10;
    int initial_archive = 0;  // rows seeded into Z; 0 means 10 * dimension
    double snooker_probability = 0.1;
    double jump_probability = 0.1;  // DE moves with gamma = 1
    double jitter = 1e-6;
    double gamma = 0.0;  // 0 means 2.38 / sqrt(2 d)
    double snooker_gamma = 2.38 / std::sqrt(2.0);
    bool snooker_correction = true;
    int max_init_attempts = 100;
    long progress_interval = 0;  // generations between progress callbacks; 0 disables

    void validate() const {
        if (chains < 1) throw InvalidArgument("need at least one chain");
        if (iterations < 0 || burn_in < 0) throw InvalidArgument("iterations and burn-in must be nonnegative");
        if (thinning < 1) throw InvalidArgument("thinning must be at least 1");
        if (archive_interval < 1) throw InvalidArgument("archive interval must be at least 1");
        if (initial_archive < 0) throw InvalidArgument("initial archive size must be nonnegative");
        if (snooker_probability < 0 || snooker_probability > 1 || jump_probability < 0 || jump_probability > 1) {
            throw InvalidArgument("move probabilities must lie in [0, 1]");
        }
        if (jitter < 0 || gamma < 0 || !(snooker_gamma > 0)) throw InvalidArgument("invalid proposal scales");
        if (max_init_attempts < 1) throw InvalidArgument("max_init_attempts must be at least 1");
    }

    long retained_per_chain() const { return iterations > burn_in ? (iterations - burn_in) / thinning : 0; }
};

/// Past states from all chains, stored row-major.
class Archive {
public:
    explicit Archive(std::size_t dimension) : dim_(dimension) {}

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }

    void append(std::span<const double> x) {
        if (x.size() != dim_) throw InvalidArgument("archive row has the wrong dimension");
        data_.insert(data_.end(), x.begin(), x.end());
    }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

private:
    std::size_t dim_;
    std::vector<double> data_;
};

struct Proposal {
    std::vector<double> x;
    double log_correction = 0.0;  // added to the Metropolis log ratio
    bool snooker = false;
    bool valid = true;
};

namespace detail {

template <class R>
std::size_t uniform_index(R& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Two distinct indices in [0, n).
template <class R>
std::pair<std::size_t, std::size_t> distinct_pair(R& rng, std::size_t n) {
    const std::size_t a = uniform_index(rng, n);
    std::size_t b = uniform_index(rng, n - 1);
    if (b >= a) ++b;
    return {a, b};
}

}  // namespace detail

/// x + gamma (z1 - z2) + e with z1, z2 distinct archive rows. With fewer than three
/// archive rows, differences of the other chains' current states are used.
template <class R>
Proposal propose_de(std::span<const double> x, const Archive& archive, R& rng, const SamplerConfig& config,
                    std::span<const std::vector<double>> chain_states = {}) {
    const std::size_t d = x.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double base = config.gamma > 0.0 ? config.gamma : 2.38 / std::sqrt(2.0 * static_cast<double>(d));
    const double gamma = unit(rng) < config.jump_probability ? 1.0 : base;

    std::span<const double> z1, z2;
    if (archive.size() >= 3) {
        const auto [a, b] = detail::distinct_pair(rng, archive.size());
        z1 = archive.row(a);
        z2 = archive.row(b);
    } else if (chain_states.size() >= 2) {
        const auto [a, b] = detail::distinct_pair(rng, chain_states.size());
        z1 = chain_states[a];
        z2 = chain_states[b];
    } else {
        throw InvalidArgument("DE proposal needs at least three archive rows or two chains");
    }

    Proposal p;
    p.x.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double e = config.jitter > 0.0 ? config.jitter * (2.0 * unit(rng) - 1.0) : 0.0;
        p.x[i] = x[i] + gamma * (z1[i] - z2[i]) + e;
    }
    return p;
}

/// Snooker move along the line through x and an archive anchor z. The returned
/// correction is (d - 1) log(|x* - z| / |x - z|).
template <class R>
Proposal propose_snooker(std::span<const double> x, const Archive& archive, R& rng, const SamplerConfig& config,
                         int max_anchor_draws = 10) {
    const std::size_t d = x.size();
    if (archive.size() < 3) throw InvalidArgument("snooker proposal needs at least three archive rows");
    Proposal p;
    p.snooker = true;
    std::vector<double> dir(d);
    double norm = 0.0;
    std::size_t anchor = 0;
    for (int attempt = 0; attempt < max_anchor_draws && norm == 0.0; ++attempt) {
        anchor = detail::uniform_index(rng, archive.size());
        const auto z = archive.row(anchor);
        double sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            dir[i] = x[i] - z[i];
            sq += dir[i] * dir[i];
        }
        norm = std::sqrt(sq);
    }
    if (norm == 0.0) {
        p.valid = false;
        p.x.assign(x.begin(), x.end());
        return p;
    }
    for (double& v : dir) v /= norm;

    // Two further rows, distinct from each other and from the anchor.
    std::size_t a = detail::uniform_index(rng, archive.size() - 1);
    if (a >= anchor) ++a;
    std::size_t b;
    do {
        b = detail::uniform_index(rng, archive.size());
    } while (b == anchor || b == a);
    const auto z1 = archive.row(a);
    const auto z2 = archive.row(b);
    double projected = 0.0;
    for (std::size_t i = 0; i < d; ++i) projected += (z1[i] - z2[i]) * dir[i];

    const auto z = archive.row(anchor);
    p.x.resize(d);
    double new_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        p.x[i] = x[i] + config.snooker_gamma * projected * dir[i];
        new_sq += (p.x[i] - z[i]) * (p.x[i] - z[i]);
    }
    if (config.snooker_correction && d > 1) {
        p.log_correction = (static_cast<double>(d) - 1.0) * (0.5 * std::log(new_sq) - std::log(norm));
    }
    return p;
}

/// Target value with an optional log-likelihood carried along for reporting.
struct Density {
    double log_target = -std::numeric_limits<double>::infinity();
    double log_likelihood = std::numeric_limits<double>::quiet_NaN();
};

/// Uses `target.evaluate(x)` when it exists (returning log_posterior and
/// log_likelihood), otherwise `target(x)` as a plain log density.
template <class Target>
Density evaluate(const Target& target, std::span<const double> x) {
    if constexpr (requires { target.evaluate(x).log_likelihood; }) {
        const auto r = target.evaluate(x);
        return {r.log_posterior, r.log_likelihood};
    } else {
        return {static_cast<double>(target(x)), std::numeric_limits<double>::quiet_NaN()};
    }
}

struct ChainState {
    std::vector<double> x;
    Density density;
};

struct ChainStats {
    long proposed = 0;
    long accepted = 0;
    long snooker_proposed = 0;
    long snooker_accepted = 0;
    long nan_rejections = 0;
    long init_redraws = 0;

    double acceptance_rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct Draw {
    int chain = 0;
    long iteration = 0;
    std::vector<double> x;
    double log_target = 0.0;
    double log_likelihood = 0.0;
};

struct Progress {
    long generation = 0;
    long iterations = 0;
    std::vector<double> acceptance;  // per chain, so far
};

/// Sampler state for K chains sharing one archive.
class DEzs {
public:
    DEzs(std::size_t dimension, SamplerConfig config) : config_(std::move(config)), archive_(dimension) {
        config_.validate();
        if (dimension == 0) throw InvalidArgument("target dimension must be positive");
        for (int k = 0; k < config_.chains; ++k) {
            std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(config_.seed >> 32),
                              static_cast<std::uint32_t>(k)};
            rngs_.emplace_back(seq);
        }
        stats_.resize(static_cast<std::size_t>(config_.chains));
    }

    const SamplerConfig& config() const { return config_; }
    const Archive& archive() const { return archive_; }
    const std::vector<ChainState>& chains() const { return states_; }
    const std::vector<ChainStats>& stats() const { return stats_; }
    long generation() const { return generation_; }

    /// Draws each chain from `init` until the target is finite, then seeds the
    /// archive with the chain states plus further `init` draws. Explicit `starts`
    /// (one per chain) replace the chain draws but not the archive seeding.
    template <class Target, class Init>
    void initialize(const Target& target, Init&& init, const std::vector<std::vector<double>>& starts = {}) {
        states_.clear();
        const std::size_t d = archive_.dimension();
        if (!starts.empty() && starts.size() != static_cast<std::size_t>(config_.chains)) {
            throw InvalidArgument("need one starting state per chain");
        }
        for (int k = 0; k < config_.chains; ++k) {
            auto& rng = rngs_[static_cast<std::size_t>(k)];
            ChainState s;
            if (!starts.empty()) {
                s.x = starts[static_cast<std::size_t>(k)];
                if (s.x.size() != d) throw InvalidArgument("initial state has the wrong dimension");
                s.density = evaluate(target, s.x);
                if (!std::isfinite(s.density.log_target)) throw NumericError("starting state has non-finite density");
                states_.push_back(std::move(s));
                continue;
            }
            int attempt = 0;
            for (; attempt < config_.max_init_attempts; ++attempt) {
                s.x = init(rng);
                if (s.x.size() != d) throw InvalidArgument("initial state has the wrong dimension");
                s.density = evaluate(target, s.x);
                if (std::isfinite(s.density.log_target)) break;
            }
            if (attempt == config_.max_init_attempts) {
                throw NumericError("chain " + std::to_string(k) + ": no finite initial state after " +
                                   std::to_string(config_.max_init_attempts) + " draws");
            }
            stats_[static_cast<std::size_t>(k)].init_redraws = attempt;
            states_.push_back(std::move(s));
        }
        for (const auto& s : states_) archive_.append(s.x);
        const std::size_t wanted = config_.initial_archive > 0 ? static_cast<std::size_t>(config_.initial_archive)
                                                                : 10 * d;
        std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(config_.seed >> 32),
                          static_cast<std::uint32_t>(config_.chains), 0x5eedu};
        Rng archive_rng(seq);
        while (archive_.size() < wanted) archive_.append(init(archive_rng));
    }

    /// Starts from the given states; the archive is seeded with them only.
    template <class Target>
    void initialize_from(const Target& target, const std::vector<std::vector<double>>& starts) {
        if (starts.size() != static_cast<std::size_t>(config_.chains)) {
            throw InvalidArgument("need one starting state per chain");
        }
        states_.clear();
        for (const auto& x : starts) {
            ChainState s{x, evaluate(target, x)};
            if (!std::isfinite(s.density.log_target)) throw NumericError("starting state has non-finite density");
            states_.push_back(std::move(s));
            archive_.append(x);
        }
    }

    /// One generation: every chain proposes and accepts or rejects, then the
    /// archive grows if the generation count hits the archive interval.
    template <class Target>
    void step(const Target& target) {
        if (states_.empty()) throw InvalidArgument("sampler is not initialised");
        std::vector<std::vector<double>> snapshot;
        snapshot.reserve(states_.size());
        for (const auto& s : states_) snapshot.push_back(s.x);

        for (std::size_t k = 0; k < states_.size(); ++k) {
            auto& rng = rngs_[k];
            auto& st = stats_[k];
            auto& state = states_[k];
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            Proposal p;
            const bool snooker = archive_.size() >= 3 && unit(rng) < config_.snooker_probability;
            if (snooker) {
                p = propose_snooker(state.x, archive_, rng, config_);
                ++st.snooker_proposed;
            } else {
                std::vector<std::vector<double>> others;
                if (archive_.size() < 3) {
                    for (std::size_t j = 0; j < snapshot.size(); ++j) {
                        if (j != k) others.push_back(snapshot[j]);
                    }
                }
                p = propose_de(state.x, archive_, rng, config_, others);
            }
            ++st.proposed;
            const double u = unit(rng);
            if (!p.valid) continue;
            const Density cand = evaluate(target, p.x);
            if (std::isnan(cand.log_target)) {
                ++st.nan_rejections;
                continue;
            }
            const double log_ratio = cand.log_target - state.density.log_target + p.log_correction;
            if (cand.log_target > -std::numeric_limits<double>::infinity() && std::log(u) < log_ratio) {
                state.x = std::move(p.x);
                state.density = cand;
                ++st.accepted;
                if (snooker) ++st.snooker_accepted;
            }
        }
        ++generation_;
        if (generation_ % config_.archive_interval == 0) {
            for (const auto& s : states_) archive_.append(s.x);
        }
    }

private:
    SamplerConfig config_;
    Archive archive_;
    std::vector<Rng> rngs_;
    std::vector<ChainState> states_;
    std::vector<ChainStats> stats_;
    long generation_ = 0;
};

struct RunResult {
    std::vector<Draw> draws;  // grouped by generation, chains in order within each
    std::vector<ChainStats> stats;
    std::vector<std::string> warnings;
    std::size_t archive_rows = 0;
};

/// Runs `iterations` generations and keeps every `thinning`-th generation after
/// `burn_in`. Deterministic for a fixed seed and chain count.
template <class Target, class Init>
RunResult run(const SamplerConfig& config, const Target& target, std::size_t dimension, Init&& init,
              const std::function<void(const Progress&)>& progress = {},
              const std::vector<std::vector<double>>& starts = {}) {
    DEzs sampler(dimension, config);
    sampler.initialize(target, init, starts);
    RunResult result;
    if (config.iterations <= config.burn_in) {
        result.warnings.push_back("iterations do not exceed burn-in; no draws retained");
    } else if (config.retained_per_chain() == 0) {
        result.warnings.push_back("fewer post-burn-in generations than the thinning interval; no draws retained");
    }
    result.draws.reserve(static_cast<std::size_t>(config.retained_per_chain() * config.chains));
    for (long g = 1; g <= config.iterations; ++g) {
        sampler.step(target);
        if (g > config.burn_in && (g - config.burn_in) % config.thinning == 0) {
            for (int k = 0; k < config.chains; ++k) {
                const auto& s = sampler.chains()[static_cast<std::size_t>(k)];
                result.draws.push_back({k, g, s.x, s.density.log_target, s.density.log_likelihood});
            }
        }
        if (progress && config.progress_interval > 0 && g % config.progress_interval == 0) {
            Progress pr{g, config.iterations, {}};
            for (const auto& st : sampler.stats()) pr.acceptance.push_back(st.acceptance_rate());
            progress(pr);
        }
    }
    result.stats = sampler.stats();
    result.archive_rows = sampler.archive().size();
    return result;
}

}  // namespace welltest::mcmc
