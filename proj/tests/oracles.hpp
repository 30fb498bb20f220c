#pragma once

// Reference computations shared by the unit tests and the acceptance gate.
// Each is written directly from the defining formula, independently of the
// library routine it checks.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "welltest/convolution.hpp"
#include "welltest/posterior.hpp"

namespace oracle {

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return t;
}

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Least-squares slope of tau + ln g(e^tau) over [t_lo, t_hi].
template <class Kernel>
double z_slope(Kernel&& g, double t_lo, double t_hi, int points = 21) {
    std::vector<double> tau, z;
    for (double t : log_grid(t_lo, t_hi, points)) {
        tau.push_back(std::log(t));
        z.push_back(tau.back() + std::log(g(t)));
    }
    return ls_slope(tau, z);
}

/// int_a^b g(v) dv for a bounded kernel, integrated in x = ln v. Below b e^-36
/// the contribution is under 1e-15 of b sup|g| and is dropped.
template <class G>
double integrate_kernel(G&& g, double a, double b, double tol = 1e-9) {
    if (!(b > a)) return 0.0;
    const double hi = std::log(b);
    const double lo = a > 0.0 ? std::log(a) : hi - 36.0;
    auto f = [&g](double x) {
        const double v = std::exp(x);
        return g(v) * v;
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, tol);
}

/// Pressure drop (g * q)(t) = sum_j q_j int_{s_j}^{min(t, s_{j+1})} g(t - u) du.
template <class G>
double convolved_drop(G&& g, double t, const welltest::RateSchedule& s, double tol = 1e-9) {
    double drop = 0.0;
    for (std::size_t j = 0; j < s.rates.size(); ++j) {
        if (t <= s.breakpoints[j]) break;
        drop += s.rates[j] * integrate_kernel(g, std::max(t - s.breakpoints[j + 1], 0.0), t - s.breakpoints[j], tol);
    }
    return drop;
}

/// Stacked weighted least squares for beta = (p0, q): pressure rows
/// p_i = p0 - (C q)_i, rate rows q_j = q_j, and one p0 row.
struct WeightedSystem {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd w;  // precisions
};

inline WeightedSystem weighted_system(const Eigen::MatrixXd& c, const welltest::NoiseModel& noise,
                                      const welltest::WellTestData& d) {
    const Eigen::Index m = c.rows(), n = c.cols();
    WeightedSystem s;
    s.x = Eigen::MatrixXd::Zero(m + n + 1, n + 1);
    s.y.resize(m + n + 1);
    s.w.resize(m + n + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        s.x(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) s.x(i, j + 1) = -c(i, j);
        s.y(i) = d.pressures[i];
        s.w(i) = 1.0 / (noise.sigma_p * noise.sigma_p);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        s.x(m + j, j + 1) = 1.0;
        s.y(m + j) = d.schedule.rates[j];
        s.w(m + j) = 1.0 / (noise.sigma_q * noise.sigma_q);
    }
    s.x(m + n, 0) = 1.0;
    s.y(m + n) = d.initial_pressure;
    s.w(m + n) = 1.0 / (noise.sigma_p0 * noise.sigma_p0);
    return s;
}

inline Eigen::VectorXd weighted_least_squares(const WeightedSystem& s) {
    const Eigen::VectorXd root = s.w.cwiseSqrt();
    return (root.asDiagonal() * s.x).colPivHouseholderQr().solve(root.asDiagonal() * s.y);
}

/// log of the joint Gaussian density of all observations given beta.
inline double log_joint(const WeightedSystem& s, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd r = s.y - s.x * beta;
    double v = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        v += 0.5 * std::log(s.w(i) / (2.0 * std::numbers::pi)) - 0.5 * s.w(i) * r(i) * r(i);
    }
    return v;
}

/// log int exp(log_joint(beta)) dbeta by the trapezoid rule on a box of
/// +-`half_width` marginal standard deviations around the least-squares solution.
inline double grid_log_evidence(const WeightedSystem& s, int points_per_axis = 121, double half_width = 9.0) {
    const Eigen::VectorXd centre = weighted_least_squares(s);
    const Eigen::VectorXd root = s.w.cwiseSqrt();
    const Eigen::MatrixXd wx = root.asDiagonal() * s.x;
    const Eigen::MatrixXd cov = (wx.transpose() * wx).inverse();
    const Eigen::Index d = centre.size();
    std::vector<double> lo(d), step(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const double sd = std::sqrt(cov(k, k));
        lo[k] = centre(k) - half_width * sd;
        step[k] = 2.0 * half_width * sd / (points_per_axis - 1);
    }
    const double peak = log_joint(s, centre);
    std::vector<int> idx(d, 0);
    Eigen::VectorXd beta(d);
    long double sum = 0.0;
    for (;;) {
        for (Eigen::Index k = 0; k < d; ++k) beta(k) = lo[k] + idx[k] * step[k];
        sum += std::exp(log_joint(s, beta) - peak);
        Eigen::Index k = 0;
        while (k < d && ++idx[k] == points_per_axis) idx[k++] = 0;
        if (k == d) break;
    }
    double log_volume = 0.0;
    for (double h : step) log_volume += std::log(h);
    return peak + std::log(static_cast<double>(sum)) + log_volume;
}

}  // namespace oracle
