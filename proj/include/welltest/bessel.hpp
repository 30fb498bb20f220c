#pragma once

// Exponentially scaled modified Bessel functions of orders 0 and 1 for real or
// complex arguments in the right half-plane:
//   k0 = e^z K0(z), k1 = e^z K1(z), i0 = e^-z I0(z), i1 = e^-z I1(z).
// The four values are always needed together by the composite-reservoir
// recursion, so they are produced in one call.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <type_traits>

#include "welltest/detail/bessel_tables.hpp"
#include "welltest/errors.hpp"

namespace welltest::bessel {

template <class T>
struct Scaled {
    T k0, k1, i0, i1;
};

namespace detail {

constexpr double kEps = 1e-16;
constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kSeriesRadius = 2.0;
constexpr double kAsymptoticRadius = 25.0;
constexpr double kRealAsymptoticRadius = 17.0;
constexpr int kMaxIterations = 20000;

template <class T>
constexpr bool is_complex_v = !std::is_floating_point_v<T>;

template <class T>
Scaled<T> series(T z) {
    const T y = z * z * 0.25;
    T t = 1.0;           // y^k / (k!)^2
    T i0 = 0.0, i1_sum = 0.0, k0_sum = 0.0, k1_sum = 0.0;
    double harmonic = 0.0;  // H_k
    for (int k = 0; k < 200; ++k) {
        const double next_harmonic = harmonic + 1.0 / (k + 1);
        const T u = t / static_cast<double>(k + 1);  // y^k / (k! (k+1)!)
        i0 += t;
        i1_sum += u;
        k0_sum += harmonic * t;
        k1_sum += (harmonic + next_harmonic - 2.0 * kEulerGamma) * u;
        if (std::abs(t) < kEps * std::abs(i0) && k > 1) break;
        t *= y / static_cast<double>((k + 1) * (k + 1));
        harmonic = next_harmonic;
    }
    const T i1 = 0.5 * z * i1_sum;
    const T log_half = std::log(0.5 * z);
    const T k0 = -(log_half + kEulerGamma) * i0 + k0_sum;
    const T k1 = 1.0 / z + log_half * i1 - 0.25 * z * k1_sum;
    const T e = std::exp(z);
    return {k0 * e, k1 * e, i0 / e, i1 / e};
}

// Temme's continued fraction (Steed's algorithm) for K0, K1, then the ratio
// I1/I0 by Lentz's method and the Wronskian I0 K1 + I1 K0 = 1/z.
template <class T>
Scaled<T> continued_fraction(T z) {
    constexpr double a1 = 0.25;
    T b = 2.0 * (1.0 + z);
    T d = 1.0 / b;
    T h = d, delh = d;
    T q1 = 0.0, q2 = 1.0;
    double a = -a1, c = a1;
    T q = a1;
    T s = 1.0 + q * delh;
    int i = 2;
    for (; i < kMaxIterations; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const T qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const T dels = q * delh;
        s += dels;
        if (std::abs(dels) < kEps * std::abs(s)) break;
    }
    if (i == kMaxIterations) throw NumericError("Bessel K continued fraction failed to converge");
    h *= a1;
    const T k0 = std::sqrt(std::numbers::pi / (2.0 * z)) / s;
    const T k1 = k0 * (z + 0.5 - h) / z;

    constexpr double tiny = 1e-300;
    T f = tiny, cc = tiny, dd = 0.0;
    int j = 1;
    for (; j < kMaxIterations; ++j) {
        const T bj = 2.0 * j / z;
        dd = bj + dd;
        if (std::abs(dd) < tiny) dd = tiny;
        cc = bj + 1.0 / cc;
        if (std::abs(cc) < tiny) cc = tiny;
        dd = 1.0 / dd;
        const T delta = cc * dd;
        f *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    if (j == kMaxIterations) throw NumericError("Bessel I ratio continued fraction failed to converge");
    const T i0 = 1.0 / (z * (k1 + f * k0));
    return {k0, k1, i0, f * i0};
}

// Four Clenshaw recurrences run side by side over equal-length tables.
inline Scaled<double> chebyshev(double x) {
    for (const auto& piece : chebyshev_pieces()) {
        if (x > piece.hi) continue;
        const double t = (2.0 * x - piece.lo - piece.hi) / (piece.hi - piece.lo);
        const auto& c = piece.coeffs;
        double b1[4] = {0, 0, 0, 0}, b2[4] = {0, 0, 0, 0};
        for (std::size_t j = kChebyshevTerms - 1; j > 0; --j) {
            for (int f = 0; f < 4; ++f) {
                const double b0 = 2.0 * t * b1[f] - b2[f] + c[f][j];
                b2[f] = b1[f];
                b1[f] = b0;
            }
        }
        const double r = 1.0 / std::sqrt(x);
        return {r * (t * b1[0] - b2[0] + c[0][0]), r * (t * b1[1] - b2[1] + c[1][0]),
                r * (t * b1[2] - b2[2] + c[2][0]), r * (t * b1[3] - b2[3] + c[3][0])};
    }
    throw NumericError("Chebyshev Bessel table queried outside its range");
}

template <class T>
Scaled<T> asymptotic(T z) {
    const T w = 1.0 / z;
    T power = 1.0;
    double a0 = 1.0, a1 = 1.0;  // a_k(0), a_k(1)
    T s0 = 1.0, s1 = 1.0, alt0 = 1.0, alt1 = 1.0;
    double previous = 1.0;
    const int limit = static_cast<int>(2.0 * std::abs(z));
    for (int k = 1; k <= limit; ++k) {
        const double odd = (2.0 * k - 1.0) * (2.0 * k - 1.0);
        a0 *= -odd / (8.0 * k);
        a1 *= (4.0 - odd) / (8.0 * k);
        power *= w;
        const T t0 = a0 * power;
        const T t1 = a1 * power;
        const double size = std::max(std::abs(t0), std::abs(t1));
        if (size > previous) break;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        s0 += t0;
        s1 += t1;
        alt0 += sign * t0;
        alt1 += sign * t1;
        previous = size;
        if (size < kEps) break;
    }
    const T kscale = std::sqrt(std::numbers::pi / (2.0 * z));
    const T iscale = 1.0 / std::sqrt(2.0 * std::numbers::pi * z);
    Scaled<T> out{kscale * s0, kscale * s1, iscale * alt0, iscale * alt1};
    if constexpr (is_complex_v<T>) {
        // Exponentially small e^{-z} contribution to I; not negligible near the imaginary axis.
        const T tail = std::exp(-2.0 * z) * iscale;
        const T unit = z.imag() >= 0.0 ? T(0.0, 1.0) : T(0.0, -1.0);
        out.i0 += unit * tail * s0;
        out.i1 -= unit * tail * s1;
    }
    return out;
}

}  // namespace detail

/// Scaled K0, K1, I0, I1 at z. Requires Re z >= 0 and z != 0.
template <class T>
Scaled<T> scaled(T z) {
    const double r = std::abs(z);
    bool ok;
    if constexpr (detail::is_complex_v<T>) {
        ok = r > 0.0 && z.real() >= 0.0 && std::isfinite(r);
    } else {
        ok = z > 0.0 && std::isfinite(z);
    }
    if (!ok) throw NumericError("scaled Bessel functions need a nonzero argument in the right half-plane");
    if (r <= detail::kSeriesRadius) return detail::series(z);
    if constexpr (detail::is_complex_v<T>) {
        if (r <= detail::kAsymptoticRadius) return detail::continued_fraction(z);
    } else {
        if (r <= detail::kRealAsymptoticRadius) return detail::chebyshev(z);
    }
    return detail::asymptotic(z);
}

}  // namespace welltest::bessel
