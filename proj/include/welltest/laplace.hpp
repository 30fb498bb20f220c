#pragma once

// Numerical inverse Laplace transforms: Gaver-Stehfest (real nodes) and
// fixed-Talbot (complex contour).

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "welltest/errors.hpp"

namespace welltest::laplace {

enum class Method { Stehfest, FixedTalbot };

struct InversionScheme {
    Method method = Method::Stehfest;
    int order = 12;  // Stehfest N, or Talbot node count M

    static InversionScheme stehfest(int n = 12) { return {Method::Stehfest, n}; }
    static InversionScheme talbot(int m = 24) { return {Method::FixedTalbot, m}; }

    void validate() const {
        if (method == Method::Stehfest) {
            if (order % 2 != 0 || order < 4 || order > 20) {
                throw InvalidArgument("Stehfest order must be even and within [4, 20], got " +
                                      std::to_string(order));
            }
        } else if (order < 4 || order > 64) {
            throw InvalidArgument("Talbot node count must be within [4, 64], got " + std::to_string(order));
        }
    }

    friend bool operator==(const InversionScheme&, const InversionScheme&) = default;
};

inline const char* to_string(Method m) { return m == Method::Stehfest ? "stehfest" : "talbot"; }

namespace detail {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_int factorial(int n) {
    cpp_int f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Exact evaluation; the alternating sum cancels catastrophically in doubles for N >= 16.
inline std::vector<double> compute_stehfest_weights(int n) {
    const int half = n / 2;
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        cpp_rational sum = 0;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            cpp_int num = boost::multiprecision::pow(cpp_int(j), static_cast<unsigned>(half)) * factorial(2 * j);
            cpp_int den = factorial(half - j) * factorial(j) * factorial(j - 1) * factorial(k - j) *
                          factorial(2 * j - k);
            sum += cpp_rational(num, den);
        }
        if ((half + k) % 2 != 0) sum = -sum;
        weights[static_cast<std::size_t>(k - 1)] = sum.convert_to<double>();
    }
    return weights;
}

}  // namespace detail

/// Gaver-Stehfest weights V_1..V_N for even N in [2, 20]. Tables are built once
/// and are immutable afterwards.
inline std::span<const double> stehfest_weights(int n) {
    if (n % 2 != 0 || n < 2 || n > 20) {
        throw InvalidArgument("Stehfest order must be even and within [2, 20], got " + std::to_string(n));
    }
    static const std::array<std::vector<double>, 10> tables = [] {
        std::array<std::vector<double>, 10> t;
        for (int i = 0; i < 10; ++i) t[static_cast<std::size_t>(i)] = detail::compute_stehfest_weights(2 * (i + 1));
        return t;
    }();
    return tables[static_cast<std::size_t>(n / 2 - 1)];
}

namespace detail {

template <class T>
inline bool is_finite(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::isfinite(v);
    } else {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    }
}

template <class S>
[[noreturn]] inline void throw_non_finite(const S& node, double t) {
    std::ostringstream os;
    os.precision(17);
    os << "Laplace-domain function is not finite at node s=" << node << " (t=" << t << ")";
    throw NumericError(os.str());
}

}  // namespace detail

/// Stehfest: f(t) ~ (ln2/t) sum_k V_k F(k ln2 / t).
template <class F>
double invert_stehfest(F&& fn, double t, int n = 12) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("inversion time must be positive and finite");
    const auto weights = stehfest_weights(n);
    const double a = std::numbers::ln2 / t;
    double sum = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double s = a * static_cast<double>(k + 1);
        const double value = static_cast<double>(fn(s));
        if (!std::isfinite(value)) detail::throw_non_finite(s, t);
        sum += weights[k] * value;
    }
    return a * sum;
}

/// Fixed-Talbot contour of Abate and Valko with M nodes.
template <class F>
double invert_talbot(F&& fn, double t, int m = 24) {
    using cplx = std::complex<double>;
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("inversion time must be positive and finite");
    const double r = 2.0 * m / (5.0 * t);
    const double f0 = std::real(cplx(fn(cplx(r, 0.0))));
    if (!std::isfinite(f0)) detail::throw_non_finite(r, t);
    double sum = 0.5 * f0 * std::exp(r * t);
    for (int k = 1; k < m; ++k) {
        const double theta = k * std::numbers::pi / m;
        const double cot = std::cos(theta) / std::sin(theta);
        const cplx s(r * theta * cot, r * theta);
        const double sigma = theta + (theta * cot - 1.0) * cot;
        const cplx value = fn(s);
        if (!detail::is_finite(value)) detail::throw_non_finite(s, t);
        sum += std::real(std::exp(t * s) * value * cplx(1.0, sigma));
    }
    return r / m * sum;
}

/// Approximates f(t) from its transform F. Talbot requires F to accept std::complex<double>.
template <class F>
double invert(F&& fn, double t, const InversionScheme& scheme = {}) {
    if (scheme.method == Method::Stehfest) return invert_stehfest(fn, t, scheme.order);
    if constexpr (std::is_invocable_v<F&, std::complex<double>>) {
        return invert_talbot(fn, t, scheme.order);
    } else {
        throw InvalidArgument("fixed-Talbot inversion needs a transform callable with complex arguments");
    }
}

struct SchemeComparison {
    double stehfest = 0.0;
    double talbot = 0.0;
    double relative_difference = 0.0;
    bool disagrees = false;  // relative difference above the warning threshold
};

/// Evaluates both schemes; a relative disagreement above `threshold` (0.5% by default) is flagged.
template <class F>
SchemeComparison compare_schemes(F&& fn, double t, int stehfest_order = 12, int talbot_nodes = 24,
                                 double threshold = 5e-3) {
    SchemeComparison c;
    c.stehfest = invert_stehfest(fn, t, stehfest_order);
    c.talbot = invert_talbot(fn, t, talbot_nodes);
    const double scale = std::max(std::abs(c.stehfest), std::abs(c.talbot));
    c.relative_difference = scale > 0.0 ? std::abs(c.stehfest - c.talbot) / scale : 0.0;
    c.disagrees = c.relative_difference > threshold;
    return c;
}

}  // namespace welltest::laplace
