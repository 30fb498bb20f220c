#pragma once

// Data and noise models, the Gaussian conditional posterior of
// beta = (true initial pressure, true rates), and the log posterior of
// (theta, sigma_p) with beta integrated out.

#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "welltest/convolution.hpp"
#include "welltest/errors.hpp"
#include "welltest/priors.hpp"
#include "welltest/reservoir.hpp"

namespace welltest {

struct WellTestData {
    std::vector<double> times;
    std::vector<double> pressures;
    RateSchedule schedule;  // observed rates
    double initial_pressure = 0.0;

    std::size_t observations() const { return times.size(); }
    std::size_t intervals() const { return schedule.intervals(); }

    void validate() const {
        if (times.empty()) throw InvalidArgument("at least one pressure observation is required");
        if (times.size() != pressures.size()) throw InvalidArgument("time and pressure counts differ");
        schedule.validate();
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || times[i] < 0.0) {
                throw InvalidArgument("observation time " + std::to_string(i + 1) + " must be finite and >= 0");
            }
            if (i > 0 && !(times[i] > times[i - 1])) {
                throw InvalidArgument("observation times must be strictly increasing (row " + std::to_string(i + 1) +
                                      ")");
            }
            if (!std::isfinite(pressures[i])) throw InvalidArgument("pressures must be finite");
        }
        if (!std::isfinite(initial_pressure)) throw InvalidArgument("initial pressure must be finite");
    }

    Eigen::Map<const Eigen::VectorXd> pressure_vector() const {
        return {pressures.data(), static_cast<Eigen::Index>(pressures.size())};
    }
    Eigen::Map<const Eigen::VectorXd> rate_vector() const {
        return {schedule.rates.data(), static_cast<Eigen::Index>(schedule.rates.size())};
    }

    friend bool operator==(const WellTestData&, const WellTestData&) = default;
};

struct NoiseModel {
    double sigma_p = 1.0;
    double sigma_q = 1.0;
    double sigma_p0 = 10.0;

    /// sigma_q as a fraction of the largest observed rate magnitude.
    static NoiseModel for_data(const WellTestData& data, double sigma_p, double rate_fraction = 0.05,
                               double sigma_p0 = 10.0) {
        double qmax = 0.0;
        for (double q : data.schedule.rates) qmax = std::max(qmax, std::abs(q));
        if (!(qmax > 0.0)) throw InvalidArgument("rate noise needs at least one nonzero observed rate");
        return {sigma_p, rate_fraction * qmax, sigma_p0};
    }

    void validate() const {
        if (!(sigma_p > 0) || !(sigma_q > 0) || !(sigma_p0 > 0) || !std::isfinite(sigma_p + sigma_q + sigma_p0)) {
            throw InvalidArgument("noise standard deviations must be positive and finite");
        }
    }
};

/// Quadratic form of the joint log density in beta: -1/2 beta'A beta + b'beta - 1/2 c.
struct NormalEquations {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    double c = 0.0;
};

inline NormalEquations assemble(const Eigen::MatrixXd& conv, const NoiseModel& noise, const WellTestData& data) {
    const auto p = data.pressure_vector();
    const auto q = data.rate_vector();
    const Eigen::Index m = conv.rows();
    const Eigen::Index n = conv.cols();
    if (m != p.size() || n != q.size()) throw InvalidArgument("convolution matrix does not match the data shape");
    const double lp = 1.0 / (noise.sigma_p * noise.sigma_p);
    const double lq = 1.0 / (noise.sigma_q * noise.sigma_q);
    const double l0 = 1.0 / (noise.sigma_p0 * noise.sigma_p0);

    NormalEquations eq;
    eq.a.resize(n + 1, n + 1);
    eq.a(0, 0) = m * lp + l0;
    const Eigen::VectorXd column_sums = conv.colwise().sum().transpose();
    eq.a.block(1, 0, n, 1) = -lp * column_sums;
    eq.a.block(0, 1, 1, n) = -lp * column_sums.transpose();
    eq.a.block(1, 1, n, n).noalias() = lp * conv.transpose() * conv;
    eq.a.block(1, 1, n, n).diagonal().array() += lq;

    eq.b.resize(n + 1);
    eq.b(0) = lp * p.sum() + l0 * data.initial_pressure;
    eq.b.tail(n).noalias() = lq * q - lp * conv.transpose() * p;

    eq.c = lp * p.squaredNorm() + lq * q.squaredNorm() + l0 * data.initial_pressure * data.initial_pressure;
    return eq;
}

/// N(mean, A^-1) over beta = (p0, q_1..q_N), held through the Cholesky factor of A.
struct GaussianBeta {
    Eigen::VectorXd mean;
    Eigen::LLT<Eigen::MatrixXd> precision;
    double quadratic = 0.0;  // b' A^-1 b
    double log_det_precision = 0.0;

    Eigen::MatrixXd covariance() const {
        return precision.solve(Eigen::MatrixXd::Identity(mean.size(), mean.size()));
    }
};

inline GaussianBeta factorize(const NormalEquations& eq) {
    GaussianBeta g;
    g.precision.compute(eq.a);
    if (g.precision.info() != Eigen::Success) {
        const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(eq.a, Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .minCoeff();
        std::ostringstream os;
        os << "beta precision matrix is not positive definite (smallest eigenvalue " << smallest << ")";
        throw NumericError(os.str());
    }
    g.mean = g.precision.solve(eq.b);
    g.quadratic = eq.b.dot(g.mean);
    g.log_det_precision = 2.0 * g.precision.matrixLLT().diagonal().array().log().sum();
    return g;
}

inline GaussianBeta conditional_beta(const Eigen::MatrixXd& conv, const NoiseModel& noise, const WellTestData& data) {
    return factorize(assemble(conv, noise, data));
}

inline GaussianBeta conditional_beta(const ReservoirParams& theta, const NoiseModel& noise, const WellTestData& data,
                                     const laplace::InversionScheme& scheme = {}) {
    return conditional_beta(build_matrix(theta, data.times, data.schedule, scheme), noise, data);
}

/// Full joint log density of (data, beta) given theta and the noise model.
inline double log_joint_likelihood(const Eigen::MatrixXd& conv, const NoiseModel& noise, const WellTestData& data,
                                   const Eigen::VectorXd& beta) {
    const double m = static_cast<double>(conv.rows());
    const double n = static_cast<double>(conv.cols());
    const Eigen::VectorXd rp = data.pressure_vector() - predict_pressure(beta(0), conv, beta.tail(conv.cols()));
    const Eigen::VectorXd rq = data.rate_vector() - beta.tail(conv.cols());
    const double r0 = data.initial_pressure - beta(0);
    return -0.5 * (m + n + 1.0) * std::log(2.0 * std::numbers::pi) - m * std::log(noise.sigma_p) -
           n * std::log(noise.sigma_q) - std::log(noise.sigma_p0) -
           0.5 * (rp.squaredNorm() / (noise.sigma_p * noise.sigma_p) +
                  rq.squaredNorm() / (noise.sigma_q * noise.sigma_q) +
                  r0 * r0 / (noise.sigma_p0 * noise.sigma_p0));
}

/// log of the data likelihood integrated over beta under flat priors. The joint is
/// evaluated at the conditional mean rather than through -c/2 + b'A^-1 b/2, which
/// cancels badly when pressures are large.
inline double log_integrated_likelihood(const Eigen::MatrixXd& conv, const NoiseModel& noise,
                                        const WellTestData& data) {
    const auto g = conditional_beta(conv, noise, data);
    const double dim = static_cast<double>(g.mean.size());
    return log_joint_likelihood(conv, noise, data, g.mean) + 0.5 * dim * std::log(2.0 * std::numbers::pi) -
           0.5 * g.log_det_precision;
}

/// Pressure likelihood with the measured rates and initial pressure taken as exact.
inline double log_known_beta_likelihood(const Eigen::MatrixXd& conv, double sigma_p, const WellTestData& data) {
    const Eigen::VectorXd residual =
        data.pressure_vector() - predict_pressure(data.initial_pressure, conv, data.rate_vector());
    const double m = static_cast<double>(conv.rows());
    return -0.5 * m * std::log(2.0 * std::numbers::pi) - m * std::log(sigma_p) -
           0.5 * residual.squaredNorm() / (sigma_p * sigma_p);
}

inline double log_gaussian_density(const GaussianBeta& g, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd d = beta - g.mean;
    const Eigen::VectorXd w = g.precision.matrixU() * d;
    return -0.5 * static_cast<double>(d.size()) * std::log(2.0 * std::numbers::pi) + 0.5 * g.log_det_precision -
           0.5 * w.squaredNorm();
}

/// log P(theta, sigma_p | x) up to a constant: priors plus the beta-integrated likelihood.
inline double log_marginal_density(const ReservoirParams& theta, const NoiseModel& noise, const WellTestData& data,
                                   const PriorSpec& spec, double sigma_p_upper = 5.0,
                                   const laplace::InversionScheme& scheme = {}) {
    const double lp = log_prior(theta, spec);
    if (lp == kNegInf || !(noise.sigma_p > 0.0) || noise.sigma_p > sigma_p_upper) return kNegInf;
    const auto conv = build_matrix(theta, data.times, data.schedule, scheme);
    return lp - std::log(sigma_p_upper) + log_integrated_likelihood(conv, noise, data);
}

struct BetaDraw {
    Eigen::VectorXd beta;
    int attempts = 0;
    bool truncated = false;
};

/// Draws from the conditional Gaussian, rejecting draws with a negative component.
/// After `max_attempts` rejections the last draw is clipped at zero.
template <class Rng>
BetaDraw sample_beta(const GaussianBeta& g, Rng& rng, int max_attempts = 100) {
    std::normal_distribution<double> normal(0.0, 1.0);
    BetaDraw out;
    Eigen::VectorXd z(g.mean.size());
    for (out.attempts = 1; out.attempts <= max_attempts; ++out.attempts) {
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
        out.beta = g.mean + g.precision.matrixU().solve(z);
        if ((out.beta.array() >= 0.0).all()) return out;
    }
    out.attempts = max_attempts;
    out.beta = out.beta.cwiseMax(0.0);
    out.truncated = true;
    return out;
}

/// How sigma_p, the rates and the initial pressure enter the posterior.
struct TargetSettings {
    std::size_t transitions = 1;
    PriorSpec prior;
    std::optional<double> fixed_sigma_p;  // empty: sigma_p ~ U(0, sigma_p_upper) is sampled
    double sigma_p_upper = 5.0;
    double rate_noise_fraction = 0.05;
    double sigma_p0 = 10.0;
    bool infer_beta = true;  // false: measured rates and p0 are exact
    laplace::InversionScheme scheme;

    void validate() const {
        prior.validate();
        scheme.validate();
        if (!(sigma_p_upper > 0.0)) throw InvalidArgument("sigma_p upper bound must be positive");
        if (fixed_sigma_p && !(*fixed_sigma_p > 0.0 && std::isfinite(*fixed_sigma_p))) {
            throw InvalidArgument("fixed sigma_p must be positive");
        }
        if (!(rate_noise_fraction > 0.0) || !(sigma_p0 > 0.0)) {
            throw InvalidArgument("rate noise fraction and sigma_p0 must be positive");
        }
    }
};

struct Evaluation {
    double log_posterior = kNegInf;
    double log_likelihood = kNegInf;
};

/// The MCMC target over x = (theta, [sigma_p]). Evaluation is const and
/// thread-safe; numeric failures count as zero density.
class DeconvolutionTarget {
public:
    DeconvolutionTarget(WellTestData data, TargetSettings settings)
        : data_(std::move(data)), settings_(std::move(settings)) {
        data_.validate();
        settings_.validate();
        if (settings_.infer_beta) {
            base_noise_ = NoiseModel::for_data(data_, 1.0, settings_.rate_noise_fraction, settings_.sigma_p0);
        }
    }

    DeconvolutionTarget(const DeconvolutionTarget& o) : data_(o.data_), settings_(o.settings_), base_noise_(o.base_noise_) {}

    const WellTestData& data() const { return data_; }
    const TargetSettings& settings() const { return settings_; }
    bool samples_sigma() const { return !settings_.fixed_sigma_p.has_value(); }
    std::size_t dimension() const { return 3 * (settings_.transitions + 1) + (samples_sigma() ? 1 : 0); }

    std::vector<std::string> names() const {
        auto n = ReservoirParams::names(settings_.transitions);
        if (samples_sigma()) n.push_back("sigma_p");
        return n;
    }

    ReservoirParams theta(std::span<const double> x) const {
        check(x);
        return ReservoirParams::from_vector(x.first(3 * (settings_.transitions + 1)));
    }

    double sigma_p(std::span<const double> x) const {
        check(x);
        return samples_sigma() ? x.back() : *settings_.fixed_sigma_p;
    }

    NoiseModel noise(double sigma_p) const {
        NoiseModel nm = base_noise_;
        nm.sigma_p = sigma_p;
        return nm;
    }

    double log_prior_density(std::span<const double> x) const {
        const double s = sigma_p(x);
        if (samples_sigma() && !(s > 0.0 && s <= settings_.sigma_p_upper)) return kNegInf;
        const auto th = theta(x);
        const double lp = log_prior(th, settings_.prior);
        return samples_sigma() ? lp - std::log(settings_.sigma_p_upper) : lp;
    }

    Eigen::MatrixXd convolution(std::span<const double> x) const {
        return build_matrix(theta(x), data_.times, data_.schedule, settings_.scheme);
    }

    /// Log-likelihood for a given convolution matrix (integrated over beta when inferred).
    double log_likelihood(const Eigen::MatrixXd& conv, double sigma_p) const {
        return settings_.infer_beta ? log_integrated_likelihood(conv, noise(sigma_p), data_)
                                    : log_known_beta_likelihood(conv, sigma_p, data_);
    }

    Evaluation evaluate(std::span<const double> x) const {
        Evaluation e;
        for (double v : x) {
            if (!std::isfinite(v)) return e;
        }
        const double lp = log_prior_density(x);
        if (lp == kNegInf || std::isnan(lp)) return e;
        try {
            const double ll = log_likelihood(convolution(x), sigma_p(x));
            if (!std::isfinite(ll)) {
                ++failures_;
                return e;
            }
            e.log_likelihood = ll;
            e.log_posterior = lp + ll;
        } catch (const NumericError&) {
            ++failures_;
        }
        return e;
    }

    double operator()(std::span<const double> x) const { return evaluate(x).log_posterior; }

    /// Conditional Gaussian of beta at x; only meaningful when beta is inferred.
    GaussianBeta conditional(std::span<const double> x) const {
        return conditional_beta(convolution(x), noise(sigma_p(x)), data_);
    }

    template <class Rng>
    std::vector<double> sample_prior(Rng& rng) const {
        std::vector<double> x;
        for (const auto& d : settings_.prior.components(settings_.transitions)) x.push_back(sample(d, rng));
        if (samples_sigma()) x.push_back(std::uniform_real_distribution<double>(0.0, settings_.sigma_p_upper)(rng));
        return x;
    }

    long numeric_failures() const { return failures_.load(); }

    /// Observations used by the likelihood: pressures, plus rates and p0 when inferred.
    std::size_t likelihood_observations() const {
        return data_.observations() + (settings_.infer_beta ? data_.intervals() + 1 : 0);
    }

private:
    void check(std::span<const double> x) const {
        if (x.size() != dimension()) {
            throw InvalidArgument("state has " + std::to_string(x.size()) + " entries, expected " +
                                  std::to_string(dimension()));
        }
    }

    WellTestData data_;
    TargetSettings settings_;
    NoiseModel base_noise_;
    mutable std::atomic<long> failures_{0};
};

}  // namespace welltest
