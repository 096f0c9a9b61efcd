#pragma once

#include <string>
#include <vector>

#include "ebsde/model.hpp"

namespace ebsde {

// Uniform 1D grid, symmetric about the origin so 0 is always a node.  The
// boundary condition everywhere in this solver is vanishing second
// derivative (linear extrapolation of the solution into the boundary).
struct Grid1D {
    double x_min = -1.0;
    double x_max = 1.0;
    int n_nodes = 3;

    double h() const { return (x_max - x_min) / (n_nodes - 1); }
    double node(int i) const { return x_min + i * h(); }
    int nearest_index(double x) const;
    int zero_index() const { return nearest_index(0.0); }

    // Smallest symmetric grid containing [-half_width, half_width] whose
    // spacing is exactly h_target.
    static Grid1D symmetric(double half_width, double h_target);

    // Default working box: six standard deviations of the stationary-scale
    // bound sqrt(r1 / (2 eta2 - r2)) plus the start point offset.
    static Grid1D auto_box(const SdeModel& model, double x0_abs,
                           double h_target);

    // Piecewise-linear evaluation of a nodal field, clamped to the box.
    double interp(const std::vector<double>& field, double x) const;
};

// Backward-in-horizon solution layers: u[m] approximates u(t_m, .) with
// terminal layer u[M] equal to g on the nodes exactly.
struct FiniteHorizonSolution {
    std::string model_name;
    std::string driver_name;
    std::string terminal_name;
    Grid1D grid;
    std::vector<double> times;            // size M+1, times[M] = horizon
    std::vector<std::vector<double>> u;   // per layer, size n_nodes

    double horizon() const { return times.back(); }
    int layer_index(double t) const;      // throws TimeNotOnGrid
    const std::vector<double>& layer_at_time(double t) const;
    double value(double t, double x) const;
};

// Discounted stationary solution found by pseudo-time relaxation.
struct StationarySolution {
    std::string model_name;
    std::string driver_name;
    Grid1D grid;
    double alpha = 0.0;
    std::vector<double> v;
    long iterations = 0;
    double final_update_norm = 0.0;  // sup |update| / pseudo-step at exit
};

struct ResidualField {
    double sup_residual = 0.0;            // over interior nodes
    std::vector<double> field;            // boundary entries set to 0
};

// Backward march of
//   du/dt + 1/2 sigma^2 u_xx + drift u_x + psi(x, u_x sigma) = 0, u(T) = g,
// with diffusion and centered transport implicit and the driver explicit on
// the centered slope.  Throws CflViolated when dt exceeds
// h / (max |drift| + 1) on the grid (the explicit driver bound) and
// NonFiniteLayer if any layer picks up a NaN/inf.
FiniteHorizonSolution solve_finite_horizon(const SdeModel& model,
                                           const Driver& driver,
                                           const TerminalCondition& terminal,
                                           double T, const Grid1D& grid,
                                           double dt);

// Relaxes alpha v = 1/2 sigma^2 v_xx + drift v_x + psi(x, v_x sigma) until
// the pseudo-time update rate drops below tol * alpha.  max_pseudo_time <= 0
// picks a budget from alpha and tol; exceeding it throws
// MaxPseudoTimeExceeded.
StationarySolution solve_discounted(const SdeModel& model,
                                    const Driver& driver, double alpha,
                                    const Grid1D& grid, double tol = 1e-6,
                                    double max_pseudo_time = 0.0);

// Pointwise defect of the ergodic equation for a candidate pair (v, lambda),
// centered differences on interior nodes.
ResidualField ergodic_residual(const SdeModel& model, const Driver& driver,
                               const std::vector<double>& v, double lambda,
                               const Grid1D& grid);

// Martingale-representation field zeta = v_x sigma (centered differences,
// one-sided at the boundary).
std::vector<double> extract_z(const std::vector<double>& v,
                              const SdeModel& model, const Grid1D& grid);

}  // namespace ebsde
