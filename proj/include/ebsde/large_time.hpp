#pragma once

#include <string>
#include <vector>

#include "ebsde/ergodic.hpp"
#include "ebsde/model.hpp"
#include "ebsde/pde.hpp"

namespace ebsde {

// Horizon profile of w(T, x) = start value at horizon T minus lambda T minus
// the potential v(x).  A single solve at the largest horizon supplies every
// row via time homogeneity.  The exponential fit of the mean gap uses only
// horizons whose gap clears tol_floor; if fewer than three clear it the
// quantity has converged beyond what the solver can resolve and
// fit_degenerate is set instead of failing.
struct LargeTimeProfile {
    std::vector<double> T_list;
    std::vector<double> x_list;
    std::vector<std::vector<double>> w;  // [T index][x index]
    double L_hat = 0.0;
    double nu_hat = 0.0;
    double fit_r2 = 0.0;
    double C_hat = 0.0;
    bool fit_degenerate = false;
    double tol_floor = 0.0;
};

LargeTimeProfile large_time_profile(const SdeModel& model,
                                    const Driver& driver,
                                    const TerminalCondition& terminal,
                                    const ErgodicSolution& erg,
                                    const std::vector<double>& T_list,
                                    const std::vector<double>& x_list,
                                    double dt, double tol_floor = 3e-4);

// Table of |start value - lambda T| over horizons and start points; bounded
// in T when the averaged behaviour is linear with slope lambda.
struct FirstBehaviorTable {
    std::vector<double> T_list;
    std::vector<double> x_list;
    std::vector<std::vector<double>> value;  // [T index][x index]

    // value may not double past the largest level already seen (with an
    // absolute floor under which doubling is noise); bounded deviations may
    // dip and recover, linear growth may not.
    bool no_doubling(double floor = 1e-6) const;
};

FirstBehaviorTable first_behavior_check(const FiniteHorizonSolution& u,
                                        double lambda,
                                        const std::vector<double>& T_list,
                                        const std::vector<double>& x_list);

// Smallest C with |w(T,x) - L_hat| <= C (1 + |x|^mu) exp(-nu_hat T) on the
// early half of the usable horizons, then verifies the whole profile stays
// inside safety * C of that envelope.
struct RateEnvelopeReport {
    double C_hat = 0.0;
    double mu = 2.0;
    bool envelope_holds = false;
};

RateEnvelopeReport rate_vs_x_check(const LargeTimeProfile& profile, double mu,
                                   double safety = 2.0);

}  // namespace ebsde
