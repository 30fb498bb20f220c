#pragma once

// Exact convolution of a piecewise-constant rate schedule with the response
// kernel, sampled at arbitrary (non-uniform) observation times.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "welltest/errors.hpp"
#include "welltest/reservoir.hpp"

namespace welltest {

/// Rates q_j held on [s_j, s_{j+1}); zero outside the schedule.
struct RateSchedule {
    std::vector<double> breakpoints;
    std::vector<double> rates;

    std::size_t intervals() const { return rates.size(); }
    double start() const { return breakpoints.front(); }
    double end() const { return breakpoints.back(); }

    void validate() const {
        if (breakpoints.size() < 2) throw InvalidArgument("rate schedule needs at least one interval");
        if (rates.size() + 1 != breakpoints.size()) {
            throw InvalidArgument("rate count must equal breakpoint count minus one");
        }
        for (std::size_t j = 0; j < breakpoints.size(); ++j) {
            if (!std::isfinite(breakpoints[j])) throw InvalidArgument("breakpoints must be finite");
            if (j > 0 && !(breakpoints[j] > breakpoints[j - 1])) {
                throw InvalidArgument("breakpoints must be strictly increasing (index " + std::to_string(j) + ")");
            }
        }
        for (double q : rates) {
            if (!std::isfinite(q)) throw InvalidArgument("rates must be finite");
        }
    }

    Eigen::VectorXd rate_vector() const { return Eigen::Map<const Eigen::VectorXd>(rates.data(), rates.size()); }

    friend bool operator==(const RateSchedule&, const RateSchedule&) = default;
};

/// C_ij = Phi(max(t_i - s_j, 0)) - Phi(max(t_i - s_{j+1}, 0)) for any cumulative
/// kernel Phi with Phi(0) = 0. Phi is evaluated once per distinct positive shift.
template <class CumulativeKernel>
Eigen::MatrixXd build_matrix(CumulativeKernel&& phi, std::span<const double> times,
                             std::span<const double> breakpoints) {
    if (breakpoints.size() < 2) throw InvalidArgument("need at least one rate interval");
    for (std::size_t j = 1; j < breakpoints.size(); ++j) {
        if (!(breakpoints[j] > breakpoints[j - 1])) throw InvalidArgument("breakpoints must be strictly increasing");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || (i > 0 && !(times[i] > times[i - 1]))) {
            throw InvalidArgument("observation times must be finite and strictly increasing");
        }
    }
    const std::size_t m = times.size();
    const std::size_t nb = breakpoints.size();

    std::vector<double> shifts;
    shifts.reserve(m * nb);
    for (double t : times) {
        for (double s : breakpoints) {
            if (t > s) shifts.push_back(t - s);
        }
    }
    std::sort(shifts.begin(), shifts.end());
    shifts.erase(std::unique(shifts.begin(), shifts.end()), shifts.end());
    std::vector<double> values(shifts.size());
    for (std::size_t k = 0; k < shifts.size(); ++k) values[k] = phi(shifts[k]);

    auto lookup = [&](double shift) {
        if (!(shift > 0.0)) return 0.0;
        const auto it = std::lower_bound(shifts.begin(), shifts.end(), shift);
        return values[static_cast<std::size_t>(it - shifts.begin())];
    };

    Eigen::MatrixXd c(m, nb - 1);
    for (std::size_t i = 0; i < m; ++i) {
        double upper = lookup(times[i] - breakpoints[0]);
        for (std::size_t j = 0; j + 1 < nb; ++j) {
            const double lower = lookup(times[i] - breakpoints[j + 1]);
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = upper - lower;
            upper = lower;
        }
    }
    return c;
}

inline Eigen::MatrixXd build_matrix(const ReservoirParams& params, std::span<const double> times,
                                    const RateSchedule& schedule, const laplace::InversionScheme& scheme = {}) {
    schedule.validate();
    const ResponseModel model(params, scheme);
    return build_matrix([&model](double t) { return model.phi(t); }, times, schedule.breakpoints);
}

/// Noiseless model pressures p0 - C q.
inline Eigen::VectorXd predict_pressure(double initial_pressure, const Eigen::MatrixXd& c, const Eigen::VectorXd& rates) {
    if (c.cols() != rates.size()) {
        throw InvalidArgument("convolution matrix has " + std::to_string(c.cols()) + " columns but " +
                              std::to_string(rates.size()) + " rates were given");
    }
    return Eigen::VectorXd::Constant(c.rows(), initial_pressure) - c * rates;
}

}  // namespace welltest
