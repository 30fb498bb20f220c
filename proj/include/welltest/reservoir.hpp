#pragma once

// Multi-region radial composite reservoir: parameterisation, Laplace-domain
// wellbore drawdown, and the time-domain response g(t) with its integral.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "welltest/bessel.hpp"
#include "welltest/errors.hpp"
#include "welltest/laplace.hpp"

namespace welltest {

/// Boundary between region i and region i+1. All values are base-10 logarithms.
struct Transition {
    double radius_increment = 2.0;   // R_i = log((r_i - r_{i-1}) / (r_w e^-S)), r_0 = 0
    double mobility_ratio = 0.0;     // M_i = log((k/mu)_i / (k/mu)_{i+1})
    double diffusivity_ratio = 0.0;  // eta_i = log((k/mu phi c_t)_1 / (k/mu phi c_t)_{i+1})

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// theta = (P, T, W, {R_i, M_i, eta_i}).
struct ReservoirParams {
    double pressure_match = 1.5;  // P
    double time_match = 2.0;      // T
    double storage_skin = 5.0;    // W = log(C_D e^{2S}), >= 0
    std::vector<Transition> transitions;

    std::size_t regions() const { return transitions.size() + 1; }
    std::size_t dimension() const { return 3 * regions(); }

    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(pressure_match) || !finite(time_match) || !finite(storage_skin)) {
            throw InvalidArgument("reservoir parameters must be finite");
        }
        if (storage_skin < 0.0) throw InvalidArgument("storage/skin group W must be nonnegative");
        for (const auto& tr : transitions) {
            if (!finite(tr.radius_increment) || !finite(tr.mobility_ratio) || !finite(tr.diffusivity_ratio)) {
                throw InvalidArgument("transition parameters must be finite");
            }
        }
    }

    /// Flat layout (P, T, W, R_1, M_1, eta_1, R_2, ...).
    std::vector<double> to_vector() const {
        std::vector<double> v{pressure_match, time_match, storage_skin};
        for (const auto& tr : transitions) {
            v.push_back(tr.radius_increment);
            v.push_back(tr.mobility_ratio);
            v.push_back(tr.diffusivity_ratio);
        }
        return v;
    }

    static ReservoirParams from_vector(std::span<const double> v) {
        if (v.size() < 3 || v.size() % 3 != 0) {
            throw InvalidArgument("parameter vector length must be a positive multiple of 3");
        }
        ReservoirParams p{v[0], v[1], v[2], {}};
        for (std::size_t i = 3; i < v.size(); i += 3) p.transitions.push_back({v[i], v[i + 1], v[i + 2]});
        return p;
    }

    static std::vector<std::string> names(std::size_t transitions) {
        std::vector<std::string> n{"P", "T", "W"};
        for (std::size_t i = 1; i <= transitions; ++i) {
            const auto s = std::to_string(i);
            n.push_back("R" + s);
            n.push_back("M" + s);
            n.push_back("eta" + s);
        }
        return n;
    }

    friend bool operator==(const ReservoirParams&, const ReservoirParams&) = default;
};

struct RegionProperties {
    double permeability = 1.0;
    double viscosity = 1.0;
    double porosity = 0.2;
    double total_compressibility = 1e-5;

    double mobility() const { return permeability / viscosity; }
    double diffusivity() const { return permeability / (viscosity * porosity * total_compressibility); }
};

/// Fundamental properties in one consistent unit system.
struct PhysicalProperties {
    double wellbore_radius = 0.3;
    double storage = 0.01;  // C
    double skin = 0.0;      // S, any sign
    double thickness = 10.0;
    std::vector<RegionProperties> regions{RegionProperties{}};
    std::vector<double> transition_radii;  // r_1 < r_2 < ..., one per boundary

    void validate() const {
        if (!(wellbore_radius > 0) || !(storage > 0) || !(thickness > 0) || !std::isfinite(skin)) {
            throw InvalidArgument("wellbore radius, storage and thickness must be positive; skin finite");
        }
        if (regions.empty()) throw InvalidArgument("at least one region is required");
        if (transition_radii.size() + 1 != regions.size()) {
            throw InvalidArgument("need exactly one transition radius per region boundary");
        }
        for (const auto& r : regions) {
            if (!(r.permeability > 0) || !(r.viscosity > 0) || !(r.porosity > 0) || !(r.total_compressibility > 0)) {
                throw InvalidArgument("region properties must be strictly positive");
            }
        }
        double previous = 0.0;
        for (double r : transition_radii) {
            if (!(r > previous)) throw InvalidArgument("transition radii must be positive and strictly increasing");
            previous = r;
        }
    }
};

/// Maps fundamental properties to the identifiable groups of the response model.
inline ReservoirParams from_physical(const PhysicalProperties& props) {
    props.validate();
    const auto& first = props.regions.front();
    const double two_pi_h = 2.0 * std::numbers::pi * props.thickness;
    ReservoirParams p;
    p.pressure_match = std::log10(two_pi_h * first.mobility());
    p.time_match = std::log10(two_pi_h * first.mobility() / props.storage);
    p.storage_skin = std::log10(props.storage * std::exp(2.0 * props.skin) /
                                (two_pi_h * first.porosity * first.total_compressibility *
                                 props.wellbore_radius * props.wellbore_radius));
    const double effective_radius = props.wellbore_radius * std::exp(-props.skin);
    double previous = 0.0;
    for (std::size_t i = 0; i < props.transition_radii.size(); ++i) {
        const double r = props.transition_radii[i];
        p.transitions.push_back({std::log10((r - previous) / effective_radius),
                                 std::log10(props.regions[i].mobility() / props.regions[i + 1].mobility()),
                                 std::log10(first.diffusivity() / props.regions[i + 1].diffusivity())});
        previous = r;
    }
    if (p.storage_skin < 0.0) {
        throw InvalidArgument("properties give C_D e^{2S} < 1, outside the storage/skin prior support");
    }
    return p;
}

/// Region geometry and contrasts derived from ReservoirParams, precomputed once
/// per parameter set. Radii are in effective-wellbore-radius units.
class CompositeReservoir {
public:
    explicit CompositeReservoir(const ReservoirParams& params) {
        params.validate();
        storage_ = std::pow(10.0, params.storage_skin);
        mobility_.push_back(1.0);
        inv_diffusivity_.push_back(1.0);
        double radius = 0.0;
        for (const auto& tr : params.transitions) {
            radius += std::pow(10.0, tr.radius_increment);
            const double mobility = mobility_.back() * std::pow(10.0, -tr.mobility_ratio);
            const double inv_diffusivity = std::pow(10.0, tr.diffusivity_ratio);
            // A boundary between identical media imposes nothing; merge the regions.
            if (mobility == mobility_.back() && inv_diffusivity == inv_diffusivity_.back()) continue;
            outer_radius_.push_back(radius);
            mobility_.push_back(mobility);
            inv_diffusivity_.push_back(inv_diffusivity);
        }
        outer_radius_.push_back(std::numeric_limits<double>::infinity());
        // A boundary inside the effective wellbore radius leaves the well in a later region.
        well_region_ = 0;
        while (outer_radius_[well_region_] <= 1.0) ++well_region_;
    }

    std::size_t regions() const { return mobility_.size(); }  // after merging identical neighbours
    std::size_t well_region() const { return well_region_; }
    double storage() const { return storage_; }

    /// Laplace transform of the dimensionless wellbore drawdown for a unit rate,
    /// in the time variable t_D / C_D.
    template <class S>
    S drawdown(S s) const {
        const S u = s / storage_;
        const std::size_t n = regions();
        // Y = mobility * (dp/dr) / p, continuous across region boundaries.
        S admittance;
        {
            const S k = std::sqrt(u * inv_diffusivity_[n - 1]);
            const double r = (n - 1 > well_region_) ? outer_radius_[n - 2] : 1.0;
            const auto b = bessel::scaled(S(k * r));
            admittance = -mobility_[n - 1] * k * b.k1 / b.k0;
        }
        for (std::size_t i = n - 1; i-- > well_region_;) {
            const S k = std::sqrt(u * inv_diffusivity_[i]);
            const double a = outer_radius_[i];
            const double inner = (i == well_region_) ? 1.0 : outer_radius_[i - 1];
            const double lambda = mobility_[i];
            const auto outer = bessel::scaled(S(k * a));
            const S denom = lambda * k * outer.i1 - admittance * outer.i0;
            if (std::abs(denom) == 0.0 || !std::isfinite(std::abs(denom))) {
                throw NumericError("singular interface system at transition " + std::to_string(i + 1));
            }
            // I-coefficient relative to K-coefficient, with e^{-2 k a} factored out.
            const S c = (admittance * outer.k0 + lambda * k * outer.k1) / denom;
            const auto in = bessel::scaled(S(k * inner));
            const S damp = c * std::exp(-2.0 * k * (a - inner));
            const S p = in.k0 + damp * in.i0;
            if (std::abs(p) == 0.0) {
                throw NumericError("degenerate pressure combination inside region " + std::to_string(i + 1));
            }
            admittance = lambda * k * (-in.k1 + damp * in.i1) / p;
        }
        const S result = 1.0 / (s * (s - admittance));
        if (!std::isfinite(std::abs(result))) {
            throw NumericError("non-finite drawdown transform");
        }
        return result;
    }

private:
    double storage_ = 1.0;
    std::vector<double> outer_radius_;
    std::vector<double> mobility_;         // relative to region 1
    std::vector<double> inv_diffusivity_;  // diffusivity of region 1 over region i
    std::size_t well_region_ = 0;
};

template <class S>
S laplace_drawdown(const ReservoirParams& params, S s) {
    return CompositeReservoir(params).drawdown(s);
}

/// Time-domain response in physical units: g(t) = 10^(T-P) g_D(10^T t) and its
/// integral Phi(t) = 10^-P p_D(10^T t).
class ResponseModel {
public:
    explicit ResponseModel(ReservoirParams params, laplace::InversionScheme scheme = {})
        : params_(std::move(params)), reservoir_(params_), scheme_(scheme) {
        scheme_.validate();
        time_scale_ = std::pow(10.0, params_.time_match);
        pressure_scale_ = std::pow(10.0, -params_.pressure_match);
    }

    const ReservoirParams& params() const { return params_; }
    const laplace::InversionScheme& scheme() const { return scheme_; }
    const CompositeReservoir& reservoir() const { return reservoir_; }

    double g(double t) const {
        if (!(t > 0.0)) throw InvalidArgument("response time must be positive");
        const auto& res = reservoir_;
        const double value = laplace::invert([&res](auto s) { return s * res.drawdown(s); }, time_scale_ * t, scheme_);
        return time_scale_ * pressure_scale_ * value;
    }

    double phi(double t) const {
        if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("cumulative response time must be nonnegative");
        if (t == 0.0) return 0.0;
        const auto& res = reservoir_;
        return pressure_scale_ * laplace::invert([&res](auto s) { return res.drawdown(s); }, time_scale_ * t, scheme_);
    }

    double z(double tau) const {
        const double value = g(std::exp(tau));
        if (!(value > 0.0)) throw NumericError("response is not positive at tau=" + std::to_string(tau));
        return tau + std::log(value);
    }

    double operator()(double t) const { return phi(t); }

private:
    ReservoirParams params_;
    CompositeReservoir reservoir_;
    laplace::InversionScheme scheme_;
    double time_scale_ = 1.0;
    double pressure_scale_ = 1.0;
};

inline double response_g(const ReservoirParams& params, double t, const laplace::InversionScheme& scheme = {}) {
    return ResponseModel(params, scheme).g(t);
}

inline double cumulative_phi(const ReservoirParams& params, double t, const laplace::InversionScheme& scheme = {}) {
    return ResponseModel(params, scheme).phi(t);
}

inline double z_transform(const ReservoirParams& params, double tau, const laplace::InversionScheme& scheme = {}) {
    return ResponseModel(params, scheme).z(tau);
}

/// z(tau) = tau + ln g(e^tau) for any positive kernel.
template <class Kernel>
double z_transform_of(Kernel&& g, double tau) {
    const double value = g(std::exp(tau));
    if (!(value > 0.0)) throw NumericError("kernel is not positive at tau=" + std::to_string(tau));
    return tau + std::log(value);
}

}  // namespace welltest
