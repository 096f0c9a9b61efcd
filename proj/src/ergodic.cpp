#include "ebsde/ergodic.hpp"

#include <algorithm>
#include <cmath>

#include "ebsde/errors.hpp"
#include "ebsde/parallel.hpp"
#include "ebsde/rng.hpp"
#include "ebsde/stats.hpp"

namespace ebsde {

namespace {

// Comparison window for successive potentials: stay away from the boundary
// where the artificial closure distorts the field.
double gap_window(const Grid1D& grid) {
    return std::min(grid.x_max - 0.5, std::max(3.0, grid.x_max / 2.0));
}

double sup_gap(const Grid1D& grid, const std::vector<double>& a,
               const std::vector<double>& b) {
    const double W = gap_window(grid);
    double sup = 0.0;
    for (int i = 0; i < grid.n_nodes; ++i) {
        if (std::abs(grid.node(i)) <= W) {
            sup = std::max(sup, std::abs(a[static_cast<std::size_t>(i)] -
                                         b[static_cast<std::size_t>(i)]));
        }
    }
    return sup;
}

// Time average of psi(X_t, zeta(X_t)) over [burn, T], mean across paths.
double invariant_average(const SdeModel& model, const Driver& driver,
                         const Grid1D& grid, const std::vector<double>& zeta,
                         double T, double dt, int n_paths, double burn_fraction,
                         std::uint64_t seed) {
    const int n_steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double dt_eff = T / n_steps;
    const double sqrt_dt = std::sqrt(dt_eff);
    const int burn_steps = static_cast<int>(burn_fraction * n_steps);

    constexpr std::size_t kChunk = 256;
    const std::size_t n_chunks =
        (static_cast<std::size_t>(n_paths) + kChunk - 1) / kChunk;
    std::vector<stats::RunningMoments> partial(n_chunks);

    parallel::for_chunks(
        static_cast<std::size_t>(n_paths), kChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                double x = 0.0;
                double sum = 0.0;
                for (int k = 0; k < n_steps; ++k) {
                    if (k >= burn_steps) {
                        const double z =
                            zeta.empty() ? 0.0 : grid.interp(zeta, x);
                        sum += driver.psi(x, z);
                    }
                    const double noise = rng::normal_draw(
                        seed, p, static_cast<std::uint64_t>(k), 0);
                    x += model.drift(x) * dt_eff +
                         model.diffusion(x) * sqrt_dt * noise;
                    if (!(std::abs(x) <= 1e6)) {
                        throw BlowUp("invariant-average path left guard ball");
                    }
                }
                partial[chunk].add(sum / (n_steps - burn_steps));
            }
        });

    stats::RunningMoments total;
    for (const auto& c : partial) total.merge(c);
    return total.mean();
}

}  // namespace

std::vector<double> default_alpha_schedule() {
    std::vector<double> s;
    for (int k = 0; k <= 6; ++k) s.push_back(std::ldexp(1.0, -k));
    return s;
}

ErgodicSolution vanishing_discount(const SdeModel& model, const Driver& driver,
                                   const Grid1D& grid,
                                   const std::vector<double>& alpha_schedule,
                                   double tol) {
    if (alpha_schedule.empty()) throw Error("empty discount schedule");
    for (std::size_t k = 1; k < alpha_schedule.size(); ++k) {
        if (!(alpha_schedule[k] < alpha_schedule[k - 1])) {
            throw Error("discount schedule must decrease strictly");
        }
    }

    ErgodicSolution out;
    out.model_name = model.name;
    out.driver_name = driver.name;
    out.grid = grid;
    out.alpha_schedule = alpha_schedule;

    const int zero = grid.zero_index();
    std::vector<double> w_prev, w_prev2;
    for (double alpha : alpha_schedule) {
        const auto sol = solve_discounted(model, driver, alpha, grid, tol);
        const double v0 = sol.v[static_cast<std::size_t>(zero)];
        out.lambda_trace.push_back(alpha * v0);
        std::vector<double> w = sol.v;
        for (double& wi : w) wi -= v0;
        if (!w_prev.empty()) {
            out.v_trace_gaps.push_back(sup_gap(grid, w, w_prev));
        }
        w_prev2 = std::move(w_prev);
        w_prev = std::move(w);
    }

    for (std::size_t j = 1; j < out.v_trace_gaps.size(); ++j) {
        const double prev = out.v_trace_gaps[j - 1];
        if (out.v_trace_gaps[j] > prev + 1e-12 * (1.0 + prev)) {
            throw NonConvergent(
                "normalised potentials are not contracting along the "
                "discount schedule");
        }
    }

    // lambda: extrapolate alpha * v_alpha(0) to alpha -> 0, linear in alpha.
    const std::size_t n = out.lambda_trace.size();
    if (n == 1) {
        out.lambda = out.lambda_trace[0];
    } else {
        const std::size_t tail = std::min<std::size_t>(3, n);
        std::vector<double> xs(alpha_schedule.end() - static_cast<long>(tail),
                               alpha_schedule.end());
        std::vector<double> ys(out.lambda_trace.end() - static_cast<long>(tail),
                               out.lambda_trace.end());
        out.lambda = stats::fit_line(xs, ys).intercept;
    }

    // The normalised potential still carries a first-order discount bias, so
    // extrapolate the last two of them linearly in alpha to alpha -> 0, the
    // same limit the rate takes.
    out.v = std::move(w_prev);
    if (!w_prev2.empty()) {
        const double a_last = alpha_schedule[n - 1];
        const double a_prev = alpha_schedule[n - 2];
        const double slope = a_last / (a_prev - a_last);
        for (std::size_t i = 0; i < out.v.size(); ++i) {
            out.v[i] += slope * (out.v[i] - w_prev2[i]);
        }
    }
    out.zeta = extract_z(out.v, model, grid);
    out.residual =
        ergodic_residual(model, driver, out.v, out.lambda, grid).sup_residual;
    return out;
}

double lambda_from_slope(const FiniteHorizonSolution& u, double T1, double T2,
                         double x_ref) {
    if (!(T1 >= 0.0) || !(T2 > T1) || T2 > u.horizon() + 1e-9) {
        throw WindowOutOfRange("slope window [" + std::to_string(T1) + ", " +
                               std::to_string(T2) +
                               "] not inside the computed horizon");
    }
    // Start value of horizon T' sits in the layer at time horizon - T'.
    const double yT2 = u.value(u.horizon() - T2, x_ref);
    const double yT1 = u.value(u.horizon() - T1, x_ref);
    return (yT2 - yT1) / (T2 - T1);
}

CrosscheckReport uniqueness_crosscheck(const SdeModel& model,
                                       const Driver& driver, const Grid1D& grid,
                                       const std::vector<LambdaRoute>& routes,
                                       const CrosscheckOptions& opts) {
    CrosscheckReport rep;
    rep.tol_lambda = opts.tol_lambda;
    rep.tol_v = opts.tol_v;

    std::vector<double> sched_a =
        opts.schedule_a.empty() ? default_alpha_schedule() : opts.schedule_a;
    std::vector<double> sched_b = opts.schedule_b;
    if (sched_b.empty()) {
        for (double a : default_alpha_schedule()) sched_b.push_back(0.75 * a);
    }

    std::vector<double> zeta_for_mc;
    for (LambdaRoute route : routes) {
        RouteResult r;
        switch (route) {
            case LambdaRoute::discount_a: {
                const auto sol =
                    vanishing_discount(model, driver, grid, sched_a, opts.pde_tol);
                r.route = "discount-a";
                r.lambda = sol.lambda;
                r.has_v = true;
                r.v = sol.v;
                zeta_for_mc = sol.zeta;
                break;
            }
            case LambdaRoute::discount_b: {
                const auto sol =
                    vanishing_discount(model, driver, grid, sched_b, opts.pde_tol);
                r.route = "discount-b";
                r.lambda = sol.lambda;
                r.has_v = true;
                r.v = sol.v;
                break;
            }
            case LambdaRoute::slope: {
                // Clamp the step target to the grid's transport bound and
                // force an even layer count so both slope endpoints land on
                // stored layers.
                double max_drift = 0.0;
                for (int i = 0; i < grid.n_nodes; ++i) {
                    max_drift = std::max(max_drift,
                                         std::abs(model.drift(grid.node(i))));
                }
                const double dt_target = std::min(
                    opts.slope_dt, 0.9 * grid.h() / (max_drift + 1.0));
                const int half = std::max(
                    1, static_cast<int>(
                           std::ceil(opts.slope_T / (2.0 * dt_target) - 1e-9)));
                const auto u = solve_finite_horizon(
                    model, driver, catalog_terminal("zero"), opts.slope_T, grid,
                    opts.slope_T / (2 * half));
                r.route = "slope";
                r.lambda =
                    lambda_from_slope(u, opts.slope_T / 2.0, opts.slope_T);
                break;
            }
            case LambdaRoute::invariant_measure: {
                r.route = "invariant-measure";
                r.lambda = invariant_average(
                    model, driver, grid, zeta_for_mc, opts.mc_T, opts.mc_dt,
                    opts.mc_paths, opts.mc_burn_fraction, opts.seed);
                break;
            }
        }
        rep.routes.push_back(std::move(r));
    }

    for (std::size_t i = 0; i < rep.routes.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.routes.size(); ++j) {
            rep.max_pairwise_dlambda =
                std::max(rep.max_pairwise_dlambda,
                         std::abs(rep.routes[i].lambda - rep.routes[j].lambda));
            if (rep.routes[i].has_v && rep.routes[j].has_v) {
                rep.max_sup_dv =
                    std::max(rep.max_sup_dv,
                             sup_gap(grid, rep.routes[i].v, rep.routes[j].v));
            }
        }
    }
    rep.pass = rep.max_pairwise_dlambda <= rep.tol_lambda &&
               rep.max_sup_dv <= rep.tol_v;
    return rep;
}

}  // namespace ebsde
