#pragma once

// Derivative-free local minimisation (GSL Nelder-Mead simplex), used to warm
// start sampler chains.

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "welltest/errors.hpp"

namespace welltest::optimize {

struct NelderMeadOptions {
    double initial_step = 0.2;
    double size_tolerance = 1e-4;  // stop when the simplex characteristic size falls below this
    int max_iterations = 2000;      // per simplex
    int max_restarts = 20;          // fresh simplex around the best point until no improvement
    double restart_tolerance = 1e-2;  // absolute improvement that justifies another restart
};

struct Minimum {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Minimises `f`. Non-finite values are replaced by `penalty` so the simplex can
/// step back out of unsupported regions.
inline Minimum nelder_mead_once(const std::function<double(std::span<const double>)>& f, std::span<const double> x0,
                           const NelderMeadOptions& options = {}, double penalty = 1e300) {
    const std::size_t d = x0.size();
    if (d == 0) throw InvalidArgument("cannot minimise over zero parameters");
    if (!(options.initial_step > 0) || options.max_iterations < 1) throw InvalidArgument("invalid simplex options");

    struct Context {
        const std::function<double(std::span<const double>)>* f;
        double penalty;
    } ctx{&f, penalty};
    gsl_multimin_function fn;
    fn.n = d;
    fn.params = &ctx;
    fn.f = [](const gsl_vector* v, void* p) {
        const auto* c = static_cast<const Context*>(p);
        const double value = (*c->f)(std::span<const double>(v->data, v->size));
        return std::isfinite(value) ? value : c->penalty;
    };

    using VecPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;
    VecPtr x(gsl_vector_alloc(d), &gsl_vector_free);
    VecPtr step(gsl_vector_alloc(d), &gsl_vector_free);
    for (std::size_t i = 0; i < d; ++i) gsl_vector_set(x.get(), i, x0[i]);
    gsl_vector_set_all(step.get(), options.initial_step);
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, d), &gsl_multimin_fminimizer_free);

    const auto previous = gsl_set_error_handler_off();
    int status = gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
    Minimum m;
    while (status == GSL_SUCCESS && m.iterations < options.max_iterations) {
        ++m.iterations;
        status = gsl_multimin_fminimizer_iterate(s.get());
        if (status != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), options.size_tolerance) == GSL_SUCCESS) {
            m.converged = true;
            break;
        }
    }
    gsl_set_error_handler(previous);
    const gsl_vector* best = gsl_multimin_fminimizer_x(s.get());
    m.x.assign(best->data, best->data + d);
    m.value = gsl_multimin_fminimizer_minimum(s.get());
    return m;
}

/// Nelder-Mead with restarts: a simplex that collapses along a curved valley is
/// rebuilt around its best vertex until the minimum stops improving.
inline Minimum nelder_mead(const std::function<double(std::span<const double>)>& f, std::span<const double> x0,
                           const NelderMeadOptions& options = {}, double penalty = 1e300) {
    Minimum best = nelder_mead_once(f, x0, options, penalty);
    for (int r = 0; r < options.max_restarts; ++r) {
        Minimum next = nelder_mead_once(f, best.x, options, penalty);
        next.iterations += best.iterations;
        const bool improved = next.value < best.value - options.restart_tolerance;
        if (next.value < best.value) best = std::move(next);
        if (!improved) break;
    }
    return best;
}

}  // namespace welltest::optimize

