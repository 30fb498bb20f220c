#pragma once

// Synthetic well tests: a known kernel convolved with a rate schedule, plus
// Gaussian pressure noise.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "welltest/channel.hpp"
#include "welltest/convolution.hpp"
#include "welltest/posterior.hpp"
#include "welltest/reservoir.hpp"

namespace welltest {

enum class SyntheticKind { Channel, Composite };

inline const char* to_string(SyntheticKind k) { return k == SyntheticKind::Channel ? "channel" : "composite"; }

/// 320 h with three production periods and 272 gauge readings, log-spaced after
/// each rate change.
struct SyntheticDesign {
    std::vector<double> breakpoints{0.0, 100.0, 200.0, 320.0};
    std::vector<double> rates{800.0, 1200.0, 500.0};
    std::vector<int> observations_per_period{90, 90, 92};
    double first_offset = 0.01;  // hours after each rate change
    double initial_pressure = 5000.0;
    double sigma_p = 5.0;

    void validate() const {
        RateSchedule{breakpoints, rates}.validate();
        if (observations_per_period.size() != rates.size()) {
            throw InvalidArgument("need an observation count for every rate period");
        }
        for (int n : observations_per_period) {
            if (n < 1) throw InvalidArgument("every period needs at least one observation");
        }
        if (!(first_offset > 0.0)) throw InvalidArgument("first observation offset must be positive");
        if (!(sigma_p >= 0.0)) throw InvalidArgument("pressure noise must be nonnegative");
    }

    std::vector<double> observation_times() const {
        std::vector<double> t;
        for (std::size_t j = 0; j < rates.size(); ++j) {
            const double start = breakpoints[j];
            const double length = breakpoints[j + 1] - start;
            if (!(first_offset < length)) throw InvalidArgument("first observation offset exceeds a rate period");
            const int n = observations_per_period[j];
            for (int k = 0; k < n; ++k) {
                const double frac = n == 1 ? 1.0 : static_cast<double>(k) / (n - 1);
                t.push_back(start + first_offset * std::pow(length / first_offset, frac));
            }
        }
        return t;
    }
};

/// Two-transition composite used as the default composite truth.
inline ReservoirParams default_composite_truth() {
    ReservoirParams p;
    p.pressure_match = 0.6;
    p.time_match = 2.0;
    p.storage_skin = 3.0;
    p.transitions = {{2.85, 0.5, 0.0}, {3.25, -1.0, 0.0}};
    return p;
}

using SyntheticTruth = std::variant<ChannelParams, ReservoirParams>;

struct SyntheticDataset {
    WellTestData data;
    std::vector<double> true_pressures;
    SyntheticTruth truth;
};

/// Cumulative kernel of either truth type; composite kernels use a fine Talbot
/// inversion so that the truth is not limited by the fitting scheme.
inline std::function<double(double)> truth_cumulative(const SyntheticTruth& truth) {
    if (const auto* c = std::get_if<ChannelParams>(&truth)) {
        return [c = *c](double t) { return channel_cumulative(c, t); };
    }
    auto model = std::make_shared<ResponseModel>(std::get<ReservoirParams>(truth), laplace::InversionScheme::talbot(32));
    return [model](double t) { return model->phi(t); };
}

inline std::function<double(double)> truth_response(const SyntheticTruth& truth) {
    if (const auto* c = std::get_if<ChannelParams>(&truth)) {
        return [c = *c](double t) { return channel_response(c, t); };
    }
    auto model = std::make_shared<ResponseModel>(std::get<ReservoirParams>(truth), laplace::InversionScheme::talbot(32));
    return [model](double t) { return model->g(t); };
}

inline SyntheticDataset generate_synthetic(const SyntheticTruth& truth, const SyntheticDesign& design,
                                           std::uint64_t seed) {
    design.validate();
    if (const auto* c = std::get_if<ChannelParams>(&truth)) c->validate();
    if (const auto* r = std::get_if<ReservoirParams>(&truth)) r->validate();

    SyntheticDataset out;
    out.truth = truth;
    out.data.times = design.observation_times();
    out.data.schedule = {design.breakpoints, design.rates};
    out.data.initial_pressure = design.initial_pressure;

    const auto conv = build_matrix(truth_cumulative(truth), out.data.times, design.breakpoints);
    const Eigen::VectorXd clean = predict_pressure(design.initial_pressure, conv, out.data.schedule.rate_vector());
    out.true_pressures.assign(clean.data(), clean.data() + clean.size());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    out.data.pressures.resize(out.true_pressures.size());
    for (std::size_t i = 0; i < out.true_pressures.size(); ++i) {
        out.data.pressures[i] = out.true_pressures[i] + design.sigma_p * noise(rng);
    }
    return out;
}

inline SyntheticDataset generate_synthetic(SyntheticKind kind, const SyntheticDesign& design, std::uint64_t seed) {
    return kind == SyntheticKind::Channel ? generate_synthetic(ChannelParams{}, design, seed)
                                          : generate_synthetic(default_composite_truth(), design, seed);
}

}  // namespace welltest
