#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ebsde/model.hpp"

namespace ebsde {

// Bounded drift perturbation (feedback controls, comparison experiments).
struct DriftShift {
    std::string name;
    std::function<double(double, double)> shift;  // (t, x) -> added drift
    double bound = 0.0;
};

// Euler-Maruyama ensemble on a uniform time grid.  Storage is row-per-path;
// states are a pure function of (model, x0, grid, seed), independent of
// threading, so equal inputs give bit-identical ensembles.
struct PathEnsemble {
    std::string model_name;
    std::string shift_name;
    std::uint64_t seed = 0;
    std::vector<double> times;   // size n_steps + 1
    std::vector<double> states;  // [path * (n_steps+1) + step]
    int n_paths = 0;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    double state(int path, int step) const {
        return states[static_cast<std::size_t>(path) * times.size() +
                      static_cast<std::size_t>(step)];
    }
    // Index of the stored time matching t, or throws TimeNotOnGrid.
    int step_index(double t) const;
};

struct MomentEstimate {
    double p = 0.0;
    double t = 0.0;
    double value = 0.0;
    double half_width_95 = 0.0;
    int n_paths = 0;
};

// Synchronous coupling statistics: both copies consume the same increments.
struct CouplingSeries {
    std::vector<double> times;
    std::vector<double> mean_distance;
    std::vector<double> half_width_95;
    std::vector<double> max_distance;
    int n_paths = 0;
};

struct HitFraction {
    double fraction = 0.0;
    double half_width_95 = 0.0;
    int n_paths = 0;
};

// Number of Euler steps covering [0, T]: smallest M with T / M <= dt.
int steps_for(double T, double dt);

// Simulates and materialises every state.  Throws BlowUp if any path leaves
// [-guard_radius, guard_radius], and refuses ensembles too large to hold in
// memory (use the streaming estimators below for those).
PathEnsemble simulate(const SdeModel& model, double x0, double T, double dt,
                      int n_paths, std::uint64_t seed,
                      const DriftShift* shift = nullptr,
                      double guard_radius = 1e6);

// Mean of |X_t|^p with a 95% half-width, t must lie on the stored grid.
MomentEstimate moment(const PathEnsemble& ensemble, double p, double t);

// Same estimate at several times without materialising paths.
std::vector<MomentEstimate> moment_sweep(const SdeModel& model, double x0,
                                         double T, double dt, int n_paths,
                                         std::uint64_t seed, double p,
                                         const std::vector<double>& times,
                                         const DriftShift* shift = nullptr,
                                         double guard_radius = 1e6);

// Distance process of two copies started at x0_a, x0_b sharing their noise.
CouplingSeries coupled_simulate(const SdeModel& model, double x0_a,
                                double x0_b, double T, double dt, int n_paths,
                                std::uint64_t seed, double guard_radius = 1e6);

// Fraction of paths with |X_t - target| < radius.
HitFraction hitting_fraction(const SdeModel& model, double x0, double target,
                             double radius, double t, double dt, int n_paths,
                             std::uint64_t seed, double guard_radius = 1e6);

}  // namespace ebsde
