#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ebsde/model.hpp"
#include "ebsde/pde.hpp"

namespace ebsde {

// Output of the vanishing-discount construction: the additive eigenvalue
// lambda, the potential v normalised to v(0) = 0 (extrapolated to zero
// discount from the last two schedule points), and zeta = v_x sigma,
// together with the per-alpha trace used to decide convergence.
struct ErgodicSolution {
    std::string model_name;
    std::string driver_name;
    Grid1D grid;
    double lambda = 0.0;
    std::vector<double> v;
    std::vector<double> zeta;
    std::vector<double> alpha_schedule;
    std::vector<double> lambda_trace;   // alpha * v_alpha(0) per alpha
    std::vector<double> v_trace_gaps;   // sup gap of successive normalised v
    double residual = 0.0;              // sup interior defect of (v, lambda)
};

// Geometric schedule 2^-k, k = 0..6.
std::vector<double> default_alpha_schedule();

// Runs the discounted solver down the schedule, checks that successive
// normalised potentials contract (otherwise throws NonConvergent), and
// extrapolates alpha * v_alpha(0) linearly in alpha to alpha -> 0 using the
// last three schedule points.
ErgodicSolution vanishing_discount(const SdeModel& model, const Driver& driver,
                                   const Grid1D& grid,
                                   const std::vector<double>& alpha_schedule =
                                       default_alpha_schedule(),
                                   double tol = 1e-6);

// Long-horizon growth rate (value(0,x_ref) - value(T2-T1, x_ref)) / (T2-T1)
// read off one finite-horizon solution via time homogeneity: the layer at
// time s equals the start value of the horizon-(T-s) problem.
double lambda_from_slope(const FiniteHorizonSolution& u, double T1, double T2,
                         double x_ref = 0.0);

enum class LambdaRoute { discount_a, discount_b, slope, invariant_measure };

struct RouteResult {
    std::string route;
    double lambda = 0.0;
    bool has_v = false;
    std::vector<double> v;
};

struct CrosscheckOptions {
    std::vector<double> schedule_a;  // empty -> default schedule
    std::vector<double> schedule_b;  // empty -> 0.75 * default schedule
    double pde_tol = 1e-6;
    double slope_T = 16.0;
    double slope_dt = 0.01;  // target step; clamped to the transport bound
    double mc_T = 60.0;
    double mc_dt = 0.02;
    int mc_paths = 2000;
    double mc_burn_fraction = 0.2;
    std::uint64_t seed = 1;
    double tol_lambda = 0.02;
    double tol_v = 0.02;
};

struct CrosscheckReport {
    std::vector<RouteResult> routes;
    double max_pairwise_dlambda = 0.0;
    double max_sup_dv = 0.0;  // over routes that carry a potential
    double tol_lambda = 0.0;
    double tol_v = 0.0;
    bool pass = false;
};

// Computes lambda along independent routes and compares all pairs.  The
// invariant-measure route averages the driver along long trajectories using
// the zeta field of the first discount route (zero if that route is absent).
CrosscheckReport uniqueness_crosscheck(
    const SdeModel& model, const Driver& driver, const Grid1D& grid,
    const std::vector<LambdaRoute>& routes, const CrosscheckOptions& opts = {});

}  // namespace ebsde
