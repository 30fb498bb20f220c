#pragma once

// Model comparison: information criteria, bridge-sampling marginal likelihood,
// and MCMC convergence diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "welltest/errors.hpp"

namespace welltest {

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
    double dic = 0.0;
    double effective_parameters = 0.0;  // p_D
    double max_log_likelihood = 0.0;
    double mean_deviance = 0.0;
};

/// k free parameters, n_obs likelihood observations; `at_mean` is the
/// log-likelihood at the posterior mean of the sampled parameters.
inline InformationCriteria information_criteria(std::span<const double> log_likelihoods, double at_mean,
                                                std::size_t k, std::size_t n_obs) {
    if (log_likelihoods.empty()) throw InvalidArgument("information criteria need at least one draw");
    for (double v : log_likelihoods) {
        if (std::isnan(v)) throw InvalidArgument("draws are missing stored log-likelihood values");
    }
    if (std::isnan(at_mean)) throw InvalidArgument("log-likelihood at the posterior mean is missing");
    if (n_obs == 0) throw InvalidArgument("need at least one observation");
    InformationCriteria ic;
    ic.max_log_likelihood = *std::max_element(log_likelihoods.begin(), log_likelihoods.end());
    double sum = 0.0;
    for (double v : log_likelihoods) sum += -2.0 * v;
    ic.mean_deviance = sum / static_cast<double>(log_likelihoods.size());
    const double kd = static_cast<double>(k);
    ic.aic = 2.0 * kd - 2.0 * ic.max_log_likelihood;
    ic.bic = kd * std::log(static_cast<double>(n_obs)) - 2.0 * ic.max_log_likelihood;
    ic.effective_parameters = ic.mean_deviance - (-2.0 * at_mean);
    ic.dic = ic.mean_deviance + ic.effective_parameters;
    return ic;
}

// ---------------------------------------------------------------------------
// Convergence diagnostics

struct ParameterDiagnostics {
    std::string name;
    std::optional<double> rhat;  // empty with one chain or a constant parameter
    double ess = 0.0;
    bool constant = false;
};

namespace detail {

inline double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double log_sum_exp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

struct ChainMoments {
    double within = 0.0;   // W
    double var_plus = 0.0;
};

inline ChainMoments moments(const std::vector<std::vector<double>>& chains) {
    const std::size_t m = chains.size();
    const double n = static_cast<double>(chains.front().size());
    std::vector<double> means(m);
    double within = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        const auto& x = chains[c];
        means[c] = std::accumulate(x.begin(), x.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : x) ss += (v - means[c]) * (v - means[c]);
        within += ss / (n - 1.0);
    }
    within /= static_cast<double>(m);
    double between = 0.0;
    if (m > 1) {
        const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
        for (double mu : means) between += (mu - grand) * (mu - grand);
        between *= n / (static_cast<double>(m) - 1.0);
    }
    return {within, (n - 1.0) / n * within + between / n};
}

// Variogram autocorrelation with Geyer's initial monotone sequence.
inline double ess(const std::vector<std::vector<double>>& chains, double var_plus) {
    const std::size_t m = chains.size();
    const std::size_t n = chains.front().size();
    const double total = static_cast<double>(m * n);
    if (!(var_plus > 0.0)) return total;
    auto rho = [&](std::size_t lag) {
        double v = 0.0;
        for (const auto& x : chains) {
            for (std::size_t i = lag; i < n; ++i) v += (x[i] - x[i - lag]) * (x[i] - x[i - lag]);
        }
        v /= static_cast<double>(m * (n - lag));
        return 1.0 - v / (2.0 * var_plus);
    };
    double sum = 0.0;  // sum of pair sums P_k
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t + 1 < n; t += 2) {
        double pair = (t == 0 ? 1.0 : rho(t)) + rho(t + 1);
        if (pair <= 0.0) break;
        pair = std::min(pair, previous);
        sum += pair;
        previous = pair;
    }
    const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(std::max(total, 10.0)));
    return total / tau;
}

}  // namespace detail

/// Split R-hat and ESS per parameter. `chains[c][i]` is draw i of chain c.
inline std::vector<ParameterDiagnostics> convergence(const std::vector<std::vector<std::vector<double>>>& chains,
                                                     const std::vector<std::string>& names = {}) {
    if (chains.empty()) throw InvalidArgument("convergence diagnostics need at least one chain");
    const std::size_t n = chains.front().size();
    if (n < 10) throw InvalidArgument("convergence diagnostics need at least 10 draws per chain");
    const std::size_t d = chains.front().front().size();
    for (const auto& c : chains) {
        if (c.size() != n) throw InvalidArgument("chains must have equal lengths");
        for (const auto& x : c) {
            if (x.size() != d) throw InvalidArgument("draws must have equal dimension");
        }
    }
    std::vector<ParameterDiagnostics> out(d);
    const std::size_t half = n / 2;
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<std::vector<double>> split;
        for (const auto& c : chains) {
            std::vector<double> first(half), second(half);
            for (std::size_t i = 0; i < half; ++i) {
                first[i] = c[i][j];
                second[i] = c[n - half + i][j];
            }
            split.push_back(std::move(first));
            split.push_back(std::move(second));
        }
        auto& diag = out[j];
        diag.name = j < names.size() ? names[j] : "x" + std::to_string(j);
        const auto mom = detail::moments(split);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& c : chains) {
            for (const auto& x : c) {
                lo = std::min(lo, x[j]);
                hi = std::max(hi, x[j]);
            }
        }
        diag.constant = !(hi > lo) || !(mom.within > 0.0);
        if (diag.constant) {
            diag.ess = static_cast<double>(chains.size() * n);
            continue;
        }
        if (chains.size() > 1) diag.rhat = std::sqrt(mom.var_plus / mom.within);
        diag.ess = detail::ess(split, mom.var_plus);
    }
    return out;
}

/// Effective sample size of one series.
inline double effective_sample_size(std::span<const double> series) {
    if (series.size() < 4) return static_cast<double>(series.size());
    std::vector<std::vector<double>> one{std::vector<double>(series.begin(), series.end())};
    const auto mom = detail::moments(one);
    return detail::ess(one, mom.var_plus);
}

// ---------------------------------------------------------------------------
// Bridge sampling

struct BridgeOptions {
    double reference_scale = 1.0;     // multiplies the fitted reference standard deviations
    std::size_t reference_draws = 0;  // 0 means as many as the estimation draws
    std::uint64_t seed = 1;
    int max_iterations = 1000;
    double tolerance = 1e-10;
};

struct EvidenceEstimate {
    double log_evidence = 0.0;
    double standard_error = 0.0;  // of log_evidence
    int iterations = 0;
    std::size_t posterior_draws = 0;
    std::size_t reference_draws = 0;
};

/// Meng-Wong bridge estimate of log integral(q) from posterior draws with stored
/// unnormalised log density, using a moment-matched Gaussian reference fitted to
/// the even-indexed draws and the odd-indexed draws for the bridge. The error is
/// the relative mean-square-error approximation with the posterior-side term
/// inflated by its integrated autocorrelation time.
template <class LogDensity>
EvidenceEstimate bridge_sampling(const std::vector<std::vector<double>>& draws, std::span<const double> log_q,
                                 const LogDensity& log_density, const BridgeOptions& options = {}) {
    if (draws.size() != log_q.size()) throw InvalidArgument("one stored log density per draw is required");
    if (draws.size() < 8) throw InvalidArgument("bridge sampling needs at least 8 posterior draws");
    if (!(options.reference_scale > 0.0)) throw InvalidArgument("reference scale must be positive");
    const std::size_t d = draws.front().size();

    std::vector<std::size_t> fit_idx, est_idx;
    for (std::size_t i = 0; i < draws.size(); ++i) (i % 2 == 0 ? fit_idx : est_idx).push_back(i);

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (auto i : fit_idx) mu += Eigen::Map<const Eigen::VectorXd>(draws[i].data(), static_cast<Eigen::Index>(d));
    mu /= static_cast<double>(fit_idx.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (auto i : fit_idx) {
        const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(draws[i].data(), static_cast<Eigen::Index>(d)) - mu;
        cov.noalias() += r * r.transpose();
    }
    cov /= static_cast<double>(fit_idx.size() - 1);
    cov *= options.reference_scale * options.reference_scale;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
        throw NumericError("bridge reference covariance is singular; posterior draws are degenerate");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double dd = static_cast<double>(d);
    auto log_ref = [&](const Eigen::VectorXd& x) {
        const Eigen::VectorXd w = lower.triangularView<Eigen::Lower>().solve(x - mu);
        return -0.5 * dd * std::log(2.0 * std::numbers::pi) - 0.5 * log_det - 0.5 * w.squaredNorm();
    };

    const std::size_t n1 = est_idx.size();
    const std::size_t n2 = options.reference_draws > 0 ? options.reference_draws : n1;
    std::vector<double> l1(n1), l2(n2);
    for (std::size_t k = 0; k < n1; ++k) {
        const auto& x = draws[est_idx[k]];
        l1[k] = log_q[est_idx[k]] - log_ref(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(d)));
    }
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t finite_reference = 0;
    std::vector<double> y(d);
    for (std::size_t k = 0; k < n2; ++k) {
        Eigen::VectorXd z(static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
        const Eigen::VectorXd x = mu + lower * z;
        for (std::size_t i = 0; i < d; ++i) y[i] = x(static_cast<Eigen::Index>(i));
        const double q = log_density(std::span<const double>(y));
        l2[k] = std::isnan(q) ? -std::numeric_limits<double>::infinity() : q - log_ref(x);
        if (std::isfinite(l2[k])) ++finite_reference;
    }
    for (double v : l1) {
        if (!std::isfinite(v)) throw NumericError("posterior draw with non-finite stored log density");
    }
    if (finite_reference == 0) {
        throw NumericError("bridge sampling diverged: no reference draw has positive target density "
                           "(reference and posterior do not overlap)");
    }

    // Work relative to the median posterior ratio for numerical range.
    std::vector<double> sorted = l1;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n1 / 2), sorted.end());
    const double shift = sorted[n1 / 2];
    for (double& v : l1) v -= shift;
    for (double& v : l2) v -= shift;

    const double s1 = static_cast<double>(n1) / static_cast<double>(n1 + n2);
    const double s2 = 1.0 - s1;
    const double ls1 = std::log(s1), ls2 = std::log(s2);
    double log_r = 0.0;
    std::vector<double> a(n2), b(n1);
    EvidenceEstimate est;
    bool converged = false;
    for (est.iterations = 1; est.iterations <= options.max_iterations; ++est.iterations) {
        for (std::size_t j = 0; j < n2; ++j) {
            a[j] = std::isfinite(l2[j]) ? l2[j] - detail::log_add_exp(ls1 + l2[j], ls2 + log_r)
                                        : -std::numeric_limits<double>::infinity();
        }
        for (std::size_t i = 0; i < n1; ++i) b[i] = -detail::log_add_exp(ls1 + l1[i], ls2 + log_r);
        const double next = detail::log_sum_exp(a) - std::log(static_cast<double>(n2)) - detail::log_sum_exp(b) +
                            std::log(static_cast<double>(n1));
        if (!std::isfinite(next)) break;
        const bool done = std::abs(next - log_r) < options.tolerance;
        log_r = next;
        if (done) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "bridge sampling diverged after " << options.max_iterations << " iterations; " << finite_reference
           << " of " << n2 << " reference draws had positive target density";
        throw NumericError(os.str());
    }

    std::vector<double> f1(n1), f2(n2);
    for (std::size_t i = 0; i < n1; ++i) f1[i] = std::exp(-detail::log_add_exp(ls1 + l1[i] - log_r, ls2));
    for (std::size_t j = 0; j < n2; ++j) {
        f2[j] = std::isfinite(l2[j]) ? std::exp(l2[j] - log_r - detail::log_add_exp(ls1 + l2[j] - log_r, ls2)) : 0.0;
    }
    auto mean_var = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::pair{m, s / static_cast<double>(v.size() - 1)};
    };
    const auto [m1, v1] = mean_var(f1);
    const auto [m2, v2] = mean_var(f2);
    const double n1_eff = std::min(static_cast<double>(n1), effective_sample_size(f1));
    const double re2 = v2 / (m2 * m2 * static_cast<double>(n2)) + v1 / (m1 * m1 * n1_eff);

    est.log_evidence = log_r + shift;
    est.standard_error = std::sqrt(re2);
    est.posterior_draws = n1;
    est.reference_draws = n2;
    return est;
}

// ---------------------------------------------------------------------------

struct ModelScore {
    std::size_t transitions = 0;
    InformationCriteria criteria;
    std::optional<EvidenceEstimate> evidence;
    std::vector<ParameterDiagnostics> diagnostics;

    double neg_log_marginal_likelihood() const {
        return evidence ? -evidence->log_evidence : std::numeric_limits<double>::quiet_NaN();
    }

    std::optional<double> max_rhat() const {
        std::optional<double> r;
        for (const auto& d : diagnostics) {
            if (d.rhat) r = std::max(r.value_or(-std::numeric_limits<double>::infinity()), *d.rhat);
        }
        return r;
    }

    double min_ess() const {
        double e = std::numeric_limits<double>::infinity();
        for (const auto& d : diagnostics) e = std::min(e, d.ess);
        return e;
    }
};

}  // namespace welltest
