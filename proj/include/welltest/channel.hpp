#pragma once

// Line-source well between two parallel no-flow faults, solved by the method of
// images, optionally with wellbore storage and skin. Used to generate
// synthetic data whose true kernel lies outside the radial composite family.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <boost/math/special_functions/expint.hpp>

#include "welltest/bessel.hpp"
#include "welltest/errors.hpp"
#include "welltest/laplace.hpp"

namespace welltest {

struct ChannelParams {
    double amplitude = 0.05;          // mu / (4 pi k h), pressure per unit rate
    double diffusivity = 1.0e4;       // k / (mu phi c_t), length^2 per time
    double distance_1 = 600.0;        // well to first fault
    double distance_2 = 600.0;        // well to second fault
    double wellbore_radius = 0.3;
    double skin = 3.0;                // extra drawdown 2 a S per unit sandface rate
    double storage = 0.5;             // C, rate * time per pressure; 0 disables
    int talbot_nodes = 32;            // used whenever storage or skin is nonzero

    bool closed_form() const { return storage == 0.0 && skin == 0.0; }
    double width() const { return distance_1 + distance_2; }

    void validate() const {
        if (!(amplitude > 0) || !(diffusivity > 0) || !(distance_1 > 0) || !(distance_2 > 0) ||
            !(wellbore_radius > 0) || !std::isfinite(amplitude + diffusivity + distance_1 + distance_2 + wellbore_radius)) {
            throw InvalidArgument("channel parameters must be positive and finite");
        }
        if (!(wellbore_radius < std::min(distance_1, distance_2))) {
            throw InvalidArgument("wellbore must fit inside the channel");
        }
        if (!(storage >= 0.0) || !std::isfinite(storage) || !std::isfinite(skin)) {
            throw InvalidArgument("channel storage must be nonnegative and skin finite");
        }
        if (talbot_nodes < 2) throw InvalidArgument("channel inversion needs at least two Talbot nodes");
    }

    friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

namespace detail {

constexpr double kImageTolerance = 1e-14;
constexpr int kMaxImages = 100000;

// Sum of term(d) over the well (d = r_w) and its images. With L the fault
// spacing, image distances are 2kL (k != 0) and 2kL + 2 d_1, 2kL + 2 d_2 (k >= 0).
template <class Term>
auto image_sum(const ChannelParams& c, Term&& term) {
    const double two_l = 2.0 * c.width();
    auto sum = term(c.wellbore_radius);
    int k = 0;
    for (; k <= kMaxImages; ++k) {
        auto t = term(k * two_l + 2.0 * c.distance_1) + term(k * two_l + 2.0 * c.distance_2);
        if (k > 0) t += 2.0 * term(k * two_l);
        sum += t;
        if (k > 0 && std::abs(t) <= kImageTolerance * std::abs(sum)) break;
    }
    if (k > kMaxImages) throw NumericError("channel image series did not converge");
    return sum;
}

// Transform of the storage-free, skin-included impulse response:
// 2 a (sum_images K0(d sqrt(s / eta)) + S).
template <class S>
S channel_kernel(const ChannelParams& c, S s) {
    const S k = std::sqrt(s / c.diffusivity);
    const S sum = image_sum(c, [&k](double d) {
        const S z = k * d;
        return S(bessel::scaled(z).k0 * std::exp(-z));
    });
    return 2.0 * c.amplitude * (sum + c.skin);
}

}  // namespace detail

/// Transform of g including storage: G / (1 + C s G).
template <class S>
S channel_laplace_response(const ChannelParams& c, S s) {
    const S kernel = detail::channel_kernel(c, s);
    return kernel / (1.0 + c.storage * s * kernel);
}

/// Without storage and skin, g(t) = (a / t) sum_images exp(-d^2 / (4 eta t)).
inline double channel_response(const ChannelParams& c, double t) {
    c.validate();
    if (!(t > 0.0)) throw InvalidArgument("response time must be positive");
    if (!c.closed_form()) {
        return laplace::invert_talbot([&c](auto s) { return channel_laplace_response(c, s); }, t, c.talbot_nodes);
    }
    const double scale = 1.0 / (4.0 * c.diffusivity * t);
    return c.amplitude / t * detail::image_sum(c, [scale](double d) { return std::exp(-d * d * scale); });
}

/// Without storage and skin, Phi(t) = a sum_images E1(d^2 / (4 eta t)). Phi(0) = 0.
inline double channel_cumulative(const ChannelParams& c, double t) {
    c.validate();
    if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("cumulative response time must be nonnegative");
    if (t == 0.0) return 0.0;
    if (!c.closed_form()) {
        return laplace::invert_talbot([&c](auto s) { return channel_laplace_response(c, s) / s; }, t,
                                      c.talbot_nodes);
    }
    const double scale = 1.0 / (4.0 * c.diffusivity * t);
    return c.amplitude * detail::image_sum(c, [scale](double d) {
               const double x = d * d * scale;
               return x > 700.0 ? 0.0 : boost::math::expint(1, x);
           });
}

}  // namespace welltest
