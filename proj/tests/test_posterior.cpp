#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include "welltest/posterior.hpp"
#include "oracles.hpp"

using namespace welltest;

namespace {

WellTestData tiny_data() {
    WellTestData d;
    d.times = {2.0, 5.0, 9.0};
    d.pressures = {4990.0, 4975.0, 4981.0};
    d.schedule = {{0.0, 4.0, 8.0}, {100.0, 60.0}};
    d.initial_pressure = 5002.0;
    return d;
}

Eigen::MatrixXd random_conv(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.0, 0.3);
    Eigen::MatrixXd c(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) c(i, j) = u(rng);
    }
    return c;
}

}  // namespace

TEST(LogPrior, SumOfComponentDensities) {
    namespace bm = boost::math;
    const auto spec = PriorSpec::standard();
    const ReservoirParams theta{1.5, 2.0, 5.0, {{2.0, 0.0, 0.0}}};
    const double expected = std::log(bm::pdf(bm::normal(1.5, 0.2), 1.5)) + std::log(bm::pdf(bm::normal(2.0, 0.2), 2.0)) +
                            std::log(bm::pdf(bm::gamma_distribution<>(1.0, 1.0 / 0.2), 5.0)) +
                            std::log(bm::pdf(bm::normal(2.0, 1.0), 2.0)) + 2.0 * std::log(bm::pdf(bm::normal(0.0, 1.0), 0.0));
    EXPECT_NEAR(log_prior(theta, spec), expected, 1e-12);
}

TEST(LogPrior, SupportAndIndependence) {
    const auto spec = PriorSpec::standard();
    ReservoirParams theta{1.4, 2.1, -0.1, {}};
    EXPECT_EQ(log_prior(theta, spec), kNegInf);
    theta.storage_skin = 3.0;
    const double base = log_prior(theta, spec);
    auto more = theta;
    more.transitions = {{1.0, 0.5, -0.2}, {2.5, -1.0, 0.3}};
    double added = 0.0;
    for (const auto& tr : more.transitions) {
        added += log_pdf(spec.radius_increment, tr.radius_increment) + log_pdf(spec.mobility_ratio, tr.mobility_ratio) +
                 log_pdf(spec.diffusivity_ratio, tr.diffusivity_ratio);
    }
    EXPECT_NEAR(log_prior(more, spec), base + added, 1e-12);
    const auto vague = PriorSpec::vague();
    theta.pressure_match = 6.0;
    EXPECT_EQ(log_prior(theta, vague), kNegInf);
}

TEST(Conditional, ZeroKernelDecouples) {
    const auto d = tiny_data();
    const NoiseModel noise{2.0, 5.0, 10.0};
    const auto g = conditional_beta(Eigen::MatrixXd::Zero(3, 2), noise, d);
    const double lp = 1.0 / 4.0, l0 = 1.0 / 100.0;
    const double psum = d.pressures[0] + d.pressures[1] + d.pressures[2];
    EXPECT_NEAR(g.mean(0), (lp * psum + l0 * d.initial_pressure) / (3 * lp + l0), 1e-9);
    EXPECT_NEAR(g.mean(1), 100.0, 1e-9);
    EXPECT_NEAR(g.mean(2), 60.0, 1e-9);
    const auto cov = g.covariance();
    EXPECT_NEAR(cov(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(cov(1, 1), 25.0, 1e-9);
}

TEST(Conditional, MatchesWeightedNormalEquations) {
    std::mt19937_64 rng(2);
    const auto d = tiny_data();
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = random_conv(rng, 3, 2);
        const NoiseModel noise{1.0 + trial * 0.2, 5.0, 10.0};
        const auto expected = oracle::weighted_least_squares(oracle::weighted_system(c, noise, d));
        const auto g = conditional_beta(c, noise, d);
        for (Eigen::Index k = 0; k < 3; ++k) {
            EXPECT_NEAR(g.mean(k), expected(k), 1e-8 * std::abs(expected(k))) << trial;
        }
    }
}

TEST(Conditional, VanishingPressureLikelihood) {
    std::mt19937_64 rng(3);
    const auto d = tiny_data();
    const auto g = conditional_beta(random_conv(rng, 3, 2), NoiseModel{1e7, 5.0, 10.0}, d);
    EXPECT_NEAR(g.mean(0), d.initial_pressure, 1e-6);
    EXPECT_NEAR(g.mean(1), 100.0, 1e-6);
    EXPECT_NEAR(g.mean(2), 60.0, 1e-6);
}

TEST(Conditional, PrecisionIsSymmetricPositiveDefinite) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> sig(0.01, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index m = 3 + trial % 7, n = 1 + trial % 4;
        WellTestData d;
        for (Eigen::Index i = 0; i < m; ++i) {
            d.times.push_back(1.0 + i);
            d.pressures.push_back(4000.0 + 10.0 * sig(rng));
        }
        d.schedule.breakpoints = {0.0};
        for (Eigen::Index j = 0; j < n; ++j) {
            d.schedule.breakpoints.push_back(d.schedule.breakpoints.back() + 2.0);
            d.schedule.rates.push_back(500.0 * sig(rng));
        }
        d.initial_pressure = 4100.0;
        Eigen::MatrixXd c = random_conv(rng, m, n) * 10.0;
        const auto eq = assemble(c, NoiseModel::for_data(d, sig(rng)), d);
        EXPECT_TRUE(eq.a.isApprox(eq.a.transpose(), 0.0));
        const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(eq.a).eigenvalues().minCoeff();
        EXPECT_GT(smallest, 0.0) << trial;
    }
}

TEST(Conditional, NonPositiveDefiniteReportsEigenvalue) {
    NormalEquations eq;
    eq.a = Eigen::Matrix2d{{1.0, 2.0}, {2.0, 1.0}};
    eq.b = Eigen::Vector2d::Ones();
    try {
        factorize(eq);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("smallest eigenvalue -1"), std::string::npos) << e.what();
    }
}

// log joint(beta) - log conditional(beta) is the beta-integrated likelihood for every beta.
TEST(Marginal, FactorizationIsConsistent) {
    std::mt19937_64 rng(5);
    const auto d = tiny_data();
    const auto c = random_conv(rng, 3, 2);
    const NoiseModel noise{2.0, 5.0, 10.0};
    const auto g = conditional_beta(c, noise, d);
    const double integrated = log_integrated_likelihood(c, noise, d);
    std::normal_distribution<double> step(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd beta = g.mean;
        for (Eigen::Index k = 0; k < beta.size(); ++k) beta(k) += step(rng);
        EXPECT_NEAR(log_joint_likelihood(c, noise, d, beta) - log_gaussian_density(g, beta), integrated, 1e-8);
        EXPECT_NEAR(log_joint_likelihood(c, noise, d, beta), oracle::log_joint(oracle::weighted_system(c, noise, d), beta),
                    1e-9);
    }
}

TEST(Marginal, MatchesGridIntegrationAcrossTheta) {
    const auto d = tiny_data();
    const auto spec = PriorSpec::standard();
    const NoiseModel noise = NoiseModel::for_data(d, 2.0);
    std::vector<ReservoirParams> thetas{{1.5, 2.0, 5.0, {{2.0, 0.0, 0.0}}},
                                        {1.7, 1.8, 3.0, {{1.5, 0.5, -0.5}}},
                                        {1.3, 2.2, 6.0, {{2.5, -0.4, 0.3}}},
                                        {1.6, 2.1, 1.0, {{1.0, 1.0, 0.0}}},
                                        {1.4, 1.9, 4.0, {{3.0, -1.0, 1.0}}}};
    std::vector<double> library, grid;
    for (const auto& th : thetas) {
        library.push_back(log_marginal_density(th, noise, d, spec));
        const auto c = build_matrix(th, d.times, d.schedule);
        grid.push_back(log_prior(th, spec) + oracle::grid_log_evidence(oracle::weighted_system(c, noise, d)));
    }
    for (std::size_t i = 1; i < thetas.size(); ++i) {
        EXPECT_NEAR(library[i] - library[0], grid[i] - grid[0], 1e-4) << i;
    }
}

TEST(Marginal, SigmaPScalingWithoutResiduals) {
    auto d = tiny_data();
    std::mt19937_64 rng(6);
    const auto c = random_conv(rng, 3, 2);
    const Eigen::VectorXd exact = predict_pressure(d.initial_pressure, c, d.rate_vector());
    d.pressures.assign(exact.data(), exact.data() + exact.size());
    const double h = 1e-4;
    const double s = 2.0;
    const double slope = (log_known_beta_likelihood(c, s * std::exp(h), d) - log_known_beta_likelihood(c, s * std::exp(-h), d)) /
                         (2.0 * h);
    EXPECT_NEAR(slope, -3.0, 1e-8);
}

TEST(Marginal, CorruptingPressuresLowersDensity) {
    auto d = tiny_data();
    std::mt19937_64 rng(7);
    const auto c = random_conv(rng, 3, 2);
    const NoiseModel noise{2.0, 5.0, 10.0};
    const Eigen::VectorXd fit = predict_pressure(d.initial_pressure, c, d.rate_vector());
    d.pressures.assign(fit.data(), fit.data() + fit.size());
    double previous = log_integrated_likelihood(c, noise, d);
    for (int k = 1; k <= 5; ++k) {
        d.pressures[1] = fit(1) + 4.0 * k;
        const double v = log_integrated_likelihood(c, noise, d);
        EXPECT_LT(v, previous);
        previous = v;
    }
}

TEST(Marginal, OutsideSupportIsMinusInfinity) {
    const auto d = tiny_data();
    const auto spec = PriorSpec::standard();
    ReservoirParams th{1.5, 2.0, 5.0, {}};
    EXPECT_EQ(log_marginal_density(th, NoiseModel::for_data(d, 5.5), d, spec), kNegInf);
    th.storage_skin = -1.0;
    EXPECT_EQ(log_marginal_density(th, NoiseModel::for_data(d, 2.0), d, spec), kNegInf);
}

TEST(SampleBeta, MomentsAndAcceptance) {
    GaussianBeta g;
    g.mean = Eigen::Vector3d(100.0, 50.0, 20.0);
    g.precision.compute(Eigen::Vector3d(1.0, 0.25, 4.0).asDiagonal().toDenseMatrix());
    std::mt19937_64 rng(8);
    const int n = 20000;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    long attempts = 0;
    for (int i = 0; i < n; ++i) {
        const auto b = sample_beta(g, rng);
        sum += b.beta;
        attempts += b.attempts;
        EXPECT_FALSE(b.truncated);
    }
    EXPECT_EQ(attempts, n);
    const Eigen::Vector3d sd(1.0, 2.0, 0.5);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(sum(k) / n, g.mean(k), 3.0 * sd(k) / std::sqrt(n));
}

TEST(SampleBeta, NegativeMeanFallsBackToTruncation) {
    GaussianBeta g;
    g.mean = Eigen::Vector2d(100.0, -50.0);
    g.precision.compute(Eigen::Matrix2d::Identity());
    std::mt19937_64 rng(9);
    const auto b = sample_beta(g, rng, 25);
    EXPECT_TRUE(b.truncated);
    EXPECT_EQ(b.attempts, 25);
    EXPECT_TRUE((b.beta.array() >= 0.0).all());
    EXPECT_EQ(b.beta(1), 0.0);
}

TEST(SampleBeta, DeterministicForSeed) {
    GaussianBeta g;
    g.mean = Eigen::Vector2d(10.0, 3.0);
    g.precision.compute(Eigen::Matrix2d{{2.0, 0.5}, {0.5, 1.0}});
    std::mt19937_64 a(10), b(10);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_beta(g, a).beta, sample_beta(g, b).beta);
}

TEST(Target, DimensionIndependentOfDataSize) {
    for (std::size_t m : {3u, 40u}) {
        WellTestData d;
        for (std::size_t i = 0; i < m; ++i) {
            d.times.push_back(1.0 + i);
            d.pressures.push_back(5000.0 - i);
        }
        d.schedule = {{0.0, 10.0, 20.0, 60.0}, {100.0, 200.0, 50.0}};
        d.initial_pressure = 5000.0;
        TargetSettings s;
        s.transitions = 2;
        const DeconvolutionTarget t(d, s);
        EXPECT_EQ(t.dimension(), 9u + 1u);
        EXPECT_EQ(t.names().back(), "sigma_p");
        EXPECT_EQ(t.likelihood_observations(), m + 3 + 1);
        s.fixed_sigma_p = 5.0;
        s.infer_beta = false;
        const DeconvolutionTarget k(d, s);
        EXPECT_EQ(k.dimension(), 9u);
        EXPECT_EQ(k.likelihood_observations(), m);
    }
}

TEST(Target, EvaluateMatchesComponents) {
    const auto d = tiny_data();
    TargetSettings s;
    s.transitions = 1;
    const DeconvolutionTarget t(d, s);
    const std::vector<double> x{1.5, 2.0, 5.0, 2.0, 0.1, -0.1, 2.5};
    const auto e = t.evaluate(x);
    const auto th = t.theta(x);
    const double expected = log_marginal_density(th, t.noise(2.5), d, s.prior, s.sigma_p_upper);
    EXPECT_NEAR(e.log_posterior, expected, 1e-9);
    EXPECT_NEAR(e.log_likelihood, log_integrated_likelihood(t.convolution(x), t.noise(2.5), d), 1e-12);
    EXPECT_EQ(t(x), e.log_posterior);
}

TEST(Target, RejectsOutOfSupportAndNonFinite) {
    const auto d = tiny_data();
    const DeconvolutionTarget t(d, TargetSettings{});
    std::vector<double> x{1.5, 2.0, 5.0, 2.0, 0.0, 0.0, 5.5};
    EXPECT_EQ(t(x), kNegInf);
    x.back() = 0.0;
    EXPECT_EQ(t(x), kNegInf);
    x.back() = 1.0;
    x[2] = -0.5;
    EXPECT_EQ(t(x), kNegInf);
    x[2] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_EQ(t(x), kNegInf);
    EXPECT_THROW(t.theta(std::vector<double>{1.0, 2.0}), InvalidArgument);
}
