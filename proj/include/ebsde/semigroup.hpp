#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "ebsde/model.hpp"
#include "ebsde/sde.hpp"

namespace ebsde {

struct SemigroupValue {
    double t = 0.0;
    double value = 0.0;
    double half_width_95 = 0.0;
    int n_paths = 0;
};

// Monte Carlo estimate of E[phi(X_t) | X_0 = x].
SemigroupValue semigroup_apply(const SdeModel& model,
                               const std::function<double(double)>& phi,
                               double x, double t, double dt, int n_paths,
                               std::uint64_t seed, double guard_radius = 1e6);

// Drift condition for V(x) = |x|^mu: constants (R, a, b) built from the
// declared model bounds, plus the sampled worst value of
//   (generator V)(x) + a V(x) - b 1_{|x| <= R},
// which must be <= 0 for the condition to hold.  The constants are exactly
// tight at mu = 2 (linear models attain equality at x = 0 and |x| = R); at
// higher exponents they can fail on tight models and `ok` reports that.
struct LyapunovReport {
    double mu = 2.0;
    double R = 0.0;
    double a = 0.0;
    double b = 0.0;
    double worst_residual = 0.0;
    double at_x = 0.0;
    bool ok = false;
};

// Throws GateViolated when eta2 - (mu-1)/2 * r2 <= 0 (no usable constants).
LyapunovReport lyapunov_check(const SdeModel& model, double mu,
                              int n_samples = 10001);

// Exponential fit of the synchronous-coupling distance
// E|X_t - Y_t| ~ c * exp(-nu t).  Only times whose mean distance clears
// three confidence half-widths enter the fit; fewer than four such points
// throws InsufficientSignal.
struct ContractionFit {
    double nu_hat = 0.0;
    double c_hat = 0.0;
    double r2 = 0.0;
    int n_used = 0;
    CouplingSeries series;
};

ContractionFit contraction_fit(const SdeModel& model, double x0_a, double x0_b,
                               double T, double dt, int n_paths,
                               std::uint64_t seed, double guard_radius = 1e6);

// Same fit applied to an observable gap P_t phi(a) - P_t phi(b) at the probe
// times in t_grid (each snapped to the step grid).  Both copies share their
// increments, and the gap is averaged per path, so the half-widths reflect
// the coupled variance rather than the marginal one.  c_hat is the fitted
// intercept divided by c_phi * (1 + a^2 + b^2), the weight of the quadratic
// drift condition.  An optional bounded drift shift applies to both copies.
ContractionFit contraction_fit(const SdeModel& model,
                               const std::function<double(double)>& phi,
                               double x0_a, double x0_b,
                               const std::vector<double>& t_grid, double dt,
                               int n_paths, std::uint64_t seed,
                               double c_phi = 1.0,
                               const DriftShift* shift = nullptr,
                               double guard_radius = 1e6);

}  // namespace ebsde
