#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ebsde/model.hpp"
#include "ebsde/pde.hpp"

namespace ebsde {

// Regression basis for the backward conditional expectations.  `polynomial`
// uses Chebyshev polynomials of the argument mapped affinely onto [-1, 1]
// from each layer's sample range intersected with [lo, hi]; arguments past
// the box are clamped and the clamp rate is reported.  `local_bins` is
// piecewise-constant binning on [lo, hi]; empty bins borrow the nearest
// populated bin.
struct RegressionBasis {
    enum class Kind { polynomial, local_bins };
    Kind kind = Kind::polynomial;
    int size = 7;  // basis functions: degree+1 or number of bins
    double lo = -1.0;
    double hi = 1.0;

    static RegressionBasis polynomial(int degree, double lo, double hi);
    static RegressionBasis local_bins(int bins, double lo, double hi);
};

// Least-squares Monte Carlo solution of the backward equation along a
// simulated ensemble.  Increments are regenerated from the counter generator,
// so the forward paths and the backward pass see identical noise.
struct BsdeMcSolution {
    std::string model_name;
    std::string driver_name;
    double y0 = 0.0;
    double y0_half_width_95 = 0.0;  // CI of the terminal conditional mean
    double T = 0.0;
    double dt = 0.0;
    int n_paths = 0;
    std::uint64_t seed = 0;
    double clip_fraction = 0.0;     // basis evaluations outside [lo, hi]
    std::vector<double> z_abs_mean; // per time layer, mean |Z|
};

// Throws SingularRegression when a polynomial layer has rank-deficient
// normal equations (e.g. fewer paths than basis functions).
BsdeMcSolution solve_finite_mc(const SdeModel& model, const Driver& driver,
                               const TerminalCondition& terminal, double x0,
                               double T, double dt, int n_paths,
                               const RegressionBasis& basis,
                               std::uint64_t seed);

struct DiscountedMcResult {
    double value = 0.0;
    double half_width_95 = 0.0;
    double horizon = 0.0;  // truncation horizon used
    double alpha = 0.0;
};

// Discounted value at x0: truncates the infinite horizon at
// T = (1/alpha) * log(c_pilot / (alpha * tol)) so the tail is below tol,
// then runs the backward pass with the discount treated implicitly.
DiscountedMcResult solve_discounted_mc(const SdeModel& model,
                                       const Driver& driver, double alpha,
                                       double x0, double tol, double dt,
                                       int n_paths,
                                       const RegressionBasis& basis,
                                       std::uint64_t seed,
                                       double c_pilot = 2.0);

// Binned comparison of the raw increment projections Y_{k+1} dW_k / dt
// against the slope of a PDE solution of the same problem, at a few interior
// times.  Bin means estimate Z up to O(dt) and half_width_95 reflects the
// actual sampling noise, which the smoothed regression values would hide.
struct ZBinRow {
    double t = 0.0;
    double bin_center = 0.0;
    double z_mc = 0.0;
    double z_pde = 0.0;
    double half_width_95 = 0.0;
    int count = 0;
};

struct ZDiscrepancyReport {
    double sup_discrepancy = 0.0;
    int dropped_bins = 0;  // below the population threshold
    std::vector<ZBinRow> rows;
};

ZDiscrepancyReport z_representation_check(const SdeModel& model,
                                          const Driver& driver,
                                          const TerminalCondition& terminal,
                                          double x0, double T, double dt,
                                          int n_paths,
                                          const RegressionBasis& basis,
                                          const FiniteHorizonSolution& pde,
                                          int n_bins, std::uint64_t seed,
                                          int min_bin_count = 50);

}  // namespace ebsde
