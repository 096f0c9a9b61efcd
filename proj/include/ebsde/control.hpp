#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ebsde/ergodic.hpp"
#include "ebsde/model.hpp"
#include "ebsde/pde.hpp"

namespace ebsde {

// Action index per grid node; lookups snap to the nearest node.
struct FeedbackPolicy {
    std::string provenance;
    Grid1D grid;
    std::vector<int> action_idx;

    int action_at(double x) const {
        return action_idx[static_cast<std::size_t>(grid.nearest_index(x))];
    }

    static FeedbackPolicy constant(const ControlProblem& cp, const Grid1D& grid,
                                   int action);
    // Independent uniform action per node, reproducible from the seed.
    static FeedbackPolicy random(const ControlProblem& cp, const Grid1D& grid,
                                 std::uint64_t seed);
};

struct HamiltonianValue {
    double value = 0.0;
    int argmin = 0;  // ties resolve to the earliest listed action
};

// min over actions of L(x, a) + (z / sigma(x)) * shift(a).
HamiltonianValue hamiltonian(const ControlProblem& cp, const SdeModel& model,
                             double x, double z);

// The Hamiltonian as a driver; its Lipschitz data come straight from the
// control problem (cost slope in x, shift bound in the z slot).
Driver induced_driver(const ControlProblem& cp, const SdeModel& model);

struct CostEstimate {
    double value = 0.0;
    double half_width_95 = 0.0;
    int n_paths = 0;
};

// Expected cost integral L dt + terminal payoff under the policy-shifted
// dynamics, simulated directly.
CostEstimate evaluate_cost_finite(const ControlProblem& cp,
                                  const SdeModel& model,
                                  const FeedbackPolicy& policy, double x0,
                                  double T, double dt, int n_paths,
                                  std::uint64_t seed);

// Long-run average cost: time average of L over [burn_fraction * T, T].
CostEstimate evaluate_cost_ergodic(const ControlProblem& cp,
                                   const SdeModel& model,
                                   const FeedbackPolicy& policy, double x0,
                                   double T_long, double dt, int n_paths,
                                   std::uint64_t seed,
                                   double burn_fraction = 0.2);

// Pointwise minimiser of the Hamiltonian along the constructed zeta field.
FeedbackPolicy optimal_feedback(const ControlProblem& cp,
                                const SdeModel& model,
                                const ErgodicSolution& erg);

}  // namespace ebsde
