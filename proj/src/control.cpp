#include "ebsde/control.hpp"

#include <cmath>

#include "ebsde/errors.hpp"
#include "ebsde/parallel.hpp"
#include "ebsde/rng.hpp"
#include "ebsde/stats.hpp"

namespace ebsde {

namespace {

constexpr std::size_t kChunk = 1024;

void check_problem(const ControlProblem& cp) {
    if (cp.actions.empty()) throw Error("control problem has no actions");
}

// Streaming policy-cost accumulation shared by the two estimators.
template <class PerPath>
CostEstimate mc_over_paths(int n_paths, PerPath&& per_path) {
    const std::size_t n_chunks =
        (static_cast<std::size_t>(n_paths) + kChunk - 1) / kChunk;
    std::vector<stats::RunningMoments> partial(n_chunks);
    parallel::for_chunks(
        static_cast<std::size_t>(n_paths), kChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                partial[chunk].add(per_path(p));
            }
        });
    stats::RunningMoments total;
    for (const auto& c : partial) total.merge(c);
    return {total.mean(), total.half_width_95(), n_paths};
}

}  // namespace

FeedbackPolicy FeedbackPolicy::constant(const ControlProblem& cp,
                                        const Grid1D& grid, int action) {
    check_problem(cp);
    if (action < 0 || action >= static_cast<int>(cp.actions.size())) {
        throw Error("action index out of range");
    }
    FeedbackPolicy p;
    p.provenance = "constant(" + cp.actions[static_cast<std::size_t>(action)].label + ")";
    p.grid = grid;
    p.action_idx.assign(static_cast<std::size_t>(grid.n_nodes), action);
    return p;
}

FeedbackPolicy FeedbackPolicy::random(const ControlProblem& cp,
                                      const Grid1D& grid, std::uint64_t seed) {
    check_problem(cp);
    FeedbackPolicy p;
    p.provenance = "random(seed=" + std::to_string(seed) + ")";
    p.grid = grid;
    p.action_idx.resize(static_cast<std::size_t>(grid.n_nodes));
    const auto n_actions = static_cast<double>(cp.actions.size());
    for (int i = 0; i < grid.n_nodes; ++i) {
        const double u =
            rng::uniform_draw(seed, 0, static_cast<std::uint64_t>(i), 1);
        int a = static_cast<int>(u * n_actions);
        if (a >= static_cast<int>(cp.actions.size())) {
            a = static_cast<int>(cp.actions.size()) - 1;
        }
        p.action_idx[static_cast<std::size_t>(i)] = a;
    }
    return p;
}

HamiltonianValue hamiltonian(const ControlProblem& cp, const SdeModel& model,
                             double x, double z) {
    check_problem(cp);
    const double q = z / model.diffusion(x);
    HamiltonianValue best;
    best.value = cp.running_cost(x, 0) + q * cp.actions[0].shift;
    best.argmin = 0;
    for (int a = 1; a < static_cast<int>(cp.actions.size()); ++a) {
        const double candidate =
            cp.running_cost(x, a) + q * cp.actions[static_cast<std::size_t>(a)].shift;
        if (candidate < best.value) {
            best.value = candidate;
            best.argmin = a;
        }
    }
    return best;
}

Driver induced_driver(const ControlProblem& cp, const SdeModel& model) {
    check_problem(cp);
    Driver d;
    d.name = "hamiltonian(" + cp.name + ")";
    d.psi = [cp, model](double x, double z) {
        return hamiltonian(cp, model, x, z).value;
    };
    d.K_x = cp.cost_lip_x;
    d.K_z = cp.shift_bound;
    d.M_psi = cp.cost_growth;
    return d;
}

CostEstimate evaluate_cost_finite(const ControlProblem& cp,
                                  const SdeModel& model,
                                  const FeedbackPolicy& policy, double x0,
                                  double T, double dt, int n_paths,
                                  std::uint64_t seed) {
    check_problem(cp);
    const int n_steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double dt_eff = T / n_steps;
    const double sqrt_dt = std::sqrt(dt_eff);

    return mc_over_paths(n_paths, [&](std::size_t p) {
        double x = x0;
        double cost = 0.0;
        for (int k = 0; k < n_steps; ++k) {
            const int a = policy.action_at(x);
            cost += cp.running_cost(x, a) * dt_eff;
            const double noise =
                rng::normal_draw(seed, p, static_cast<std::uint64_t>(k), 0);
            x += (model.drift(x) + cp.actions[static_cast<std::size_t>(a)].shift) * dt_eff +
                 model.diffusion(x) * sqrt_dt * noise;
            if (!(std::abs(x) <= 1e6)) {
                throw BlowUp("controlled path left the guard ball");
            }
        }
        return cost + cp.terminal.g(x);
    });
}

CostEstimate evaluate_cost_ergodic(const ControlProblem& cp,
                                   const SdeModel& model,
                                   const FeedbackPolicy& policy, double x0,
                                   double T_long, double dt, int n_paths,
                                   std::uint64_t seed, double burn_fraction) {
    check_problem(cp);
    if (!(T_long >= 20.0)) {
        throw Error("long-run cost estimate needs T_long >= 20");
    }
    const int n_steps =
        std::max(1, static_cast<int>(std::ceil(T_long / dt - 1e-9)));
    const double dt_eff = T_long / n_steps;
    const double sqrt_dt = std::sqrt(dt_eff);
    const int burn_steps = static_cast<int>(burn_fraction * n_steps);

    return mc_over_paths(n_paths, [&](std::size_t p) {
        double x = x0;
        double cost = 0.0;
        for (int k = 0; k < n_steps; ++k) {
            const int a = policy.action_at(x);
            if (k >= burn_steps) cost += cp.running_cost(x, a) * dt_eff;
            const double noise =
                rng::normal_draw(seed, p, static_cast<std::uint64_t>(k), 0);
            x += (model.drift(x) + cp.actions[static_cast<std::size_t>(a)].shift) * dt_eff +
                 model.diffusion(x) * sqrt_dt * noise;
            if (!(std::abs(x) <= 1e6)) {
                throw BlowUp("controlled path left the guard ball");
            }
        }
        return cost / (dt_eff * (n_steps - burn_steps));
    });
}

FeedbackPolicy optimal_feedback(const ControlProblem& cp,
                                const SdeModel& model,
                                const ErgodicSolution& erg) {
    check_problem(cp);
    FeedbackPolicy p;
    p.provenance = "hamiltonian-argmin(" + cp.name + ")";
    p.grid = erg.grid;
    p.action_idx.resize(static_cast<std::size_t>(erg.grid.n_nodes));
    for (int i = 0; i < erg.grid.n_nodes; ++i) {
        const double x = erg.grid.node(i);
        const double z = erg.zeta[static_cast<std::size_t>(i)];
        p.action_idx[static_cast<std::size_t>(i)] =
            hamiltonian(cp, model, x, z).argmin;
    }
    return p;
}

}  // namespace ebsde
