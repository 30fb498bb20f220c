#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "welltest/errors.hpp"
#include "welltest/reservoir.hpp"

namespace welltest {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Normal {
    double mean = 0.0;
    double sd = 1.0;
    friend bool operator==(const Normal&, const Normal&) = default;
};

/// Shape-rate parameterisation: mean shape / rate.
struct Gamma {
    double shape = 1.0;
    double rate = 1.0;
    friend bool operator==(const Gamma&, const Gamma&) = default;
};

struct Uniform {
    double lower = 0.0;
    double upper = 1.0;
    friend bool operator==(const Uniform&, const Uniform&) = default;
};

using Distribution = std::variant<Normal, Gamma, Uniform>;

inline void validate(const Distribution& d) {
    std::visit(
        [](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Normal>) {
                if (!std::isfinite(v.mean) || !(v.sd > 0) || !std::isfinite(v.sd)) {
                    throw InvalidArgument("normal prior needs finite mean and positive sd");
                }
            } else if constexpr (std::is_same_v<V, Gamma>) {
                if (!(v.shape > 0) || !(v.rate > 0) || !std::isfinite(v.shape + v.rate)) {
                    throw InvalidArgument("gamma prior needs positive shape and rate");
                }
            } else {
                if (!(v.upper > v.lower) || !std::isfinite(v.upper - v.lower)) {
                    throw InvalidArgument("uniform prior needs finite lower < upper");
                }
            }
        },
        d);
}

inline double log_pdf(const Distribution& d, double x) {
    return std::visit(
        [x](const auto& v) -> double {
            using V = std::decay_t<decltype(v)>;
            if (!std::isfinite(x)) return kNegInf;
            if constexpr (std::is_same_v<V, Normal>) {
                const double z = (x - v.mean) / v.sd;
                return -0.5 * z * z - std::log(v.sd) - 0.5 * std::log(2.0 * std::numbers::pi);
            } else if constexpr (std::is_same_v<V, Gamma>) {
                if (x < 0.0) return kNegInf;
                if (x == 0.0) {
                    if (v.shape == 1.0) return std::log(v.rate);
                    return v.shape < 1.0 ? std::numeric_limits<double>::infinity() : kNegInf;
                }
                return v.shape * std::log(v.rate) - std::lgamma(v.shape) + (v.shape - 1.0) * std::log(x) - v.rate * x;
            } else {
                if (x < v.lower || x > v.upper) return kNegInf;
                return -std::log(v.upper - v.lower);
            }
        },
        d);
}

template <class Rng>
double sample(const Distribution& d, Rng& rng) {
    return std::visit(
        [&rng](const auto& v) -> double {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Normal>) {
                return std::normal_distribution<double>(v.mean, v.sd)(rng);
            } else if constexpr (std::is_same_v<V, Gamma>) {
                return std::gamma_distribution<double>(v.shape, 1.0 / v.rate)(rng);
            } else {
                return std::uniform_real_distribution<double>(v.lower, v.upper)(rng);
            }
        },
        d);
}

inline double mean(const Distribution& d) {
    return std::visit(
        [](const auto& v) -> double {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Normal>) {
                return v.mean;
            } else if constexpr (std::is_same_v<V, Gamma>) {
                return v.shape / v.rate;
            } else {
                return 0.5 * (v.lower + v.upper);
            }
        },
        d);
}

/// Independent priors on theta. Transition priors apply to every transition.
/// Rates and initial pressure carry flat priors on [0, inf) and add nothing.
struct PriorSpec {
    Distribution pressure_match = Normal{1.5, 0.2};
    Distribution time_match = Normal{2.0, 0.2};
    Distribution storage_skin = Gamma{1.0, 0.2};
    Distribution radius_increment = Normal{2.0, 1.0};
    Distribution mobility_ratio = Normal{0.0, 1.0};
    Distribution diffusivity_ratio = Normal{0.0, 1.0};

    static PriorSpec standard() { return {}; }

    /// Gamma on W, broad uniforms elsewhere.
    static PriorSpec vague() {
        PriorSpec p;
        p.pressure_match = Uniform{-2.0, 5.0};
        p.time_match = Uniform{-2.0, 6.0};
        p.radius_increment = Uniform{0.0, 6.0};
        p.mobility_ratio = Uniform{-3.0, 3.0};
        p.diffusivity_ratio = Uniform{-3.0, 3.0};
        return p;
    }

    void validate() const {
        for (const auto* d : {&pressure_match, &time_match, &storage_skin, &radius_increment, &mobility_ratio,
                              &diffusivity_ratio}) {
            welltest::validate(*d);
        }
    }

    /// Per-coordinate priors in ReservoirParams::to_vector order.
    std::vector<Distribution> components(std::size_t transitions) const {
        std::vector<Distribution> c{pressure_match, time_match, storage_skin};
        for (std::size_t i = 0; i < transitions; ++i) {
            c.push_back(radius_increment);
            c.push_back(mobility_ratio);
            c.push_back(diffusivity_ratio);
        }
        return c;
    }

    friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// Sum of independent component log densities; -inf outside the support.
inline double log_prior(const ReservoirParams& theta, const PriorSpec& spec) {
    if (theta.storage_skin < 0.0) return kNegInf;
    const auto v = theta.to_vector();
    const auto c = spec.components(theta.transitions.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        sum += log_pdf(c[i], v[i]);
        if (sum == kNegInf) return sum;
    }
    return sum;
}

}  // namespace welltest
