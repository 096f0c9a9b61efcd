// End-to-end acceptance battery.  Each check exercises one structural claim
// of the library across module boundaries, with every tolerance pinned right
// here.  Output is one line per check plus a summary; the exit code is the
// number of failed checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ebsde/bsde_mc.hpp"
#include "ebsde/cli.hpp"
#include "ebsde/control.hpp"
#include "ebsde/ergodic.hpp"
#include "ebsde/errors.hpp"
#include "ebsde/large_time.hpp"
#include "ebsde/model.hpp"
#include "ebsde/pde.hpp"
#include "ebsde/rng.hpp"
#include "ebsde/sde.hpp"
#include "ebsde/semigroup.hpp"

namespace {

using namespace ebsde;

struct CheckResult {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

double sup_abs_window(const Grid1D& g, const std::vector<double>& f,
                      double lo, double hi) {
    double s = 0.0;
    for (int i = 0; i < g.n_nodes; ++i) {
        const double x = g.node(i);
        if (x >= lo && x <= hi) s = std::max(s, std::abs(f[i]));
    }
    return s;
}

// Shared solve for the oscillating-driver model: several checks compare
// against the same construction, so build it once.
const ErgodicSolution& erg_ou_cos() {
    static const ErgodicSolution erg = [] {
        const auto model = catalog_model("ou");
        const auto driver = catalog_driver("cos");
        const auto grid = Grid1D::auto_box(model, 0.0, 0.05);
        return vanishing_discount(model, driver, grid);
    }();
    return erg;
}

// ---------------------------------------------------------------------------
// 1. A constant driver makes everything exact: the long-run rate is the
//    constant, the potential vanishes, start values grow linearly, and every
//    control policy under a flat running cost pays the same.
CheckResult constant_driver_exactness() {
    const auto model = catalog_model("ou");
    const auto driver = catalog_driver("const", {{"c", 0.3}});
    const auto grid = Grid1D::auto_box(model, 0.0, 0.05);

    const auto erg = vanishing_discount(model, driver, grid,
                                        default_alpha_schedule(), 1e-10);
    const double dlam = std::abs(erg.lambda - 0.3);
    double dv = 0.0;
    for (double vi : erg.v) dv = std::max(dv, std::abs(vi));

    const double T = 1.0;
    const auto u = solve_finite_horizon(model, driver,
                                        catalog_terminal("zero"), T, grid,
                                        0.005);
    double du = 0.0;
    for (std::size_t k = 0; k < u.times.size(); ++k) {
        for (int i = 0; i < grid.n_nodes; ++i) {
            du = std::max(du, std::abs(u.u[k][i] - 0.3 * (T - u.times[k])));
        }
    }

    const auto prof =
        large_time_profile(model, driver, catalog_terminal("zero"), erg,
                           {2.0, 4.0, 8.0}, {-2.0, 0.0, 2.0}, 0.005);
    double dw = 0.0;
    for (const auto& row : prof.w) {
        for (double wv : row) dw = std::max(dw, std::abs(wv));
    }

    // Flat running cost: every policy, constant or random, pays 0.3 per unit
    // time no matter what it does to the dynamics.
    ControlProblem cp;
    cp.name = "flat-cost";
    cp.actions = {{"0", 0.0}, {"+1", 1.0}};
    cp.running_cost = [](double, int) { return 0.3; };
    cp.shift_bound = 1.0;
    cp.cost_lip_x = 0.0;
    cp.cost_growth = 0.3;
    cp.terminal = catalog_terminal("zero");
    double dcost = 0.0;
    for (int a = 0; a < 2; ++a) {
        const auto pol = FeedbackPolicy::constant(cp, grid, a);
        const auto c =
            evaluate_cost_finite(cp, model, pol, 0.0, T, 0.005, 200, 5);
        dcost = std::max(dcost, std::abs(c.value - 0.3 * T));
    }
    const auto rnd = FeedbackPolicy::random(cp, grid, 42);
    const auto cr = evaluate_cost_finite(cp, model, rnd, 0.0, T, 0.005, 200, 6);
    dcost = std::max(dcost, std::abs(cr.value - 0.3 * T));
    const auto jr =
        evaluate_cost_ergodic(cp, model, rnd, 0.0, 40.0, 0.02, 100, 7);
    dcost = std::max(dcost, std::abs(jr.value - 0.3));

    CheckResult r;
    r.pass = dlam <= 1e-10 && dv <= 1e-12 && du <= 1e-10 && dw <= 1e-8 &&
             dcost <= 1e-12;
    r.detail = fmt("|lambda-0.3|=%.1e sup|v|=%.1e sup|u-0.3(T-t)|=%.1e "
                   "sup|w|=%.1e cost-dev=%.1e",
                   dlam, dv, du, dw, dcost);
    return r;
}

// ---------------------------------------------------------------------------
// 2. Three independent routes to the long-run rate of the oscillating driver
//    agree with each other and land in a narrow window around the
//    stationary average exp(-1/4).
CheckResult stationary_average_routes() {
    const auto model = catalog_model("ou");
    const auto driver = catalog_driver("cos");
    const auto grid = Grid1D::auto_box(model, 0.0, 0.05);
    CrosscheckOptions opts;
    opts.mc_paths = 4000;
    const auto rep = uniqueness_crosscheck(
        model, driver, grid,
        {LambdaRoute::discount_a, LambdaRoute::slope,
         LambdaRoute::invariant_measure},
        opts);

    bool in_window = true;
    std::string vals;
    for (const auto& route : rep.routes) {
        in_window = in_window && route.lambda >= 0.7688 &&
                    route.lambda <= 0.7888;
        vals += fmt(" %s=%.4f", route.route.c_str(), route.lambda);
    }
    CheckResult r;
    r.pass = in_window && rep.max_pairwise_dlambda <= 0.02;
    r.detail = fmt("window [0.7688,0.7888]%s pairwise=%.4f", vals.c_str(),
                   rep.max_pairwise_dlambda);
    return r;
}

// ---------------------------------------------------------------------------
// 3. A driver built so that a known profile solves the stationary equation
//    exactly is solved back to that profile: rate within 1e-3, potential
//    within 1e-2 on the window, and the planted pair has a tiny residual.
CheckResult manufactured_solution_recovery() {
    const auto model = catalog_model("weakdiss");
    const auto mp = manufactured_problem(model, one_minus_cos_field(), 0.3,
                                         0.5);
    const auto grid = Grid1D::auto_box(model, 0.0, 0.02);

    const auto erg = vanishing_discount(model, mp.driver, grid);
    const double dlam = std::abs(erg.lambda - mp.lambda_star);

    double dv = 0.0;
    for (int i = 0; i < grid.n_nodes; ++i) {
        const double x = grid.node(i);
        if (std::abs(x) > 3.0) continue;
        dv = std::max(dv, std::abs(erg.v[i] - mp.v_star.value(x)));
    }

    std::vector<double> vstar(grid.n_nodes);
    for (int i = 0; i < grid.n_nodes; ++i) {
        vstar[i] = mp.v_star.value(grid.node(i));
    }
    const auto res =
        ergodic_residual(model, mp.driver, vstar, mp.lambda_star, grid);

    CheckResult r;
    r.pass = dlam <= 1e-3 && dv <= 1e-2 && res.sup_residual <= 1e-2;
    r.detail = fmt("|lambda-0.3|=%.2e sup|v-v*|=%.2e planted residual=%.2e",
                   dlam, dv, res.sup_residual);
    return r;
}

// ---------------------------------------------------------------------------
// 4. With a quadratic terminal payoff the start-value correction relaxes to
//    a constant at a fitted exponential rate; the fitted constant is stable
//    under extending the horizon, and the deviations respect a weighted
//    envelope in the start point.
CheckResult large_time_relaxation() {
    const auto model = catalog_model("ou");
    const auto driver = catalog_driver("cos");
    const auto terminal = catalog_terminal("quadratic");
    const auto& erg = erg_ou_cos();
    const std::vector<double> xs = {-3, -2, -1, 0, 1, 2, 3};
    const std::vector<double> Ts = {2, 2.5, 3, 3.5, 4, 5, 6, 8, 10};
    std::vector<double> Ts_long = Ts;
    Ts_long.push_back(12);
    Ts_long.push_back(14);

    const auto prof =
        large_time_profile(model, driver, terminal, erg, Ts, xs, 0.005, 1e-3);
    const auto prof14 = large_time_profile(model, driver, terminal, erg,
                                           Ts_long, xs, 0.005, 1e-3);
    const auto env = rate_vs_x_check(prof, 2.0, 2.0);
    const double dL = std::abs(prof14.L_hat - prof.L_hat);

    CheckResult r;
    r.pass = !prof.fit_degenerate && prof.nu_hat > 0.0 &&
             prof.fit_r2 >= 0.9 && dL <= 0.02 && env.envelope_holds;
    r.detail = fmt("nu=%.3f r2=%.3f L=%.4f |L(14)-L(10)|=%.2e envelope=%s",
                   prof.nu_hat, prof.fit_r2, prof.L_hat, dL,
                   env.envelope_holds ? "yes" : "no");
    return r;
}

// ---------------------------------------------------------------------------
// 5. Start values minus the linear trend stay bounded for every catalog
//    model/driver pair: the deviation table over doubling horizons never
//    doubles past its running maximum at any probe point.
CheckResult linear_growth_of_start_values() {
    const std::vector<std::pair<std::string, std::string>> problems = {
        {"ou", "const"},       {"ou", "cos"},       {"ou", "cos-tanh"},
        {"weakdiss", "const"}, {"weakdiss", "cos"}, {"weakdiss", "cos-tanh"},
    };
    const std::vector<double> Ts = {2, 4, 8, 16};
    const std::vector<double> xs = {-3, -1.5, 0, 1.5, 3};

    bool all_ok = true;
    double worst_entry = 0.0;
    std::string failed;
    for (const auto& [mname, dname] : problems) {
        const auto model = catalog_model(mname);
        const auto driver =
            dname == "const" ? catalog_driver("const", {{"c", 0.3}})
                             : catalog_driver(dname, {}, &model);
        const auto grid = Grid1D::auto_box(model, 0.0, 0.05);
        const auto erg = vanishing_discount(model, driver, grid);

        double bmax = 0.0;
        for (int i = 0; i < grid.n_nodes; ++i) {
            bmax = std::max(bmax, std::abs(model.drift(grid.node(i))));
        }
        // Layer count divisible by 8 puts every probed horizon on a layer.
        const double dt_target = 0.8 * grid.h() / (bmax + 1.0);
        const int M =
            8 * static_cast<int>(std::ceil(16.0 / (8.0 * dt_target)));
        const auto u = solve_finite_horizon(
            model, driver, catalog_terminal("zero"), 16.0, grid, 16.0 / M);

        const auto table = first_behavior_check(u, erg.lambda, Ts, xs);
        for (const auto& row : table.value) {
            for (double e : row) worst_entry = std::max(worst_entry, e);
        }
        if (!table.no_doubling(0.01)) {
            all_ok = false;
            failed += " " + mname + "+" + dname;
        }
    }
    CheckResult r;
    r.pass = all_ok;
    r.detail = fmt("6 problems, floor 0.01, max|u-lambda T|=%.3f%s%s",
                   worst_entry, all_ok ? "" : " doubling at:",
                   failed.c_str());
    return r;
}

// ---------------------------------------------------------------------------
// 6. The quadratic drift-condition constants match their closed forms and
//    the inequality holds at every working-box node outside the ball.
CheckResult drift_condition_constants() {
    struct Expect {
        const char* name;
        double R, a, b;
    };
    const Expect cases[] = {
        {"ou", 1.70710678118655, 1.65685424949238, 1.0},
        {"weakdiss", 2.4213381090374, 0.648870623145019, 2.0},
    };
    const auto t0 = std::chrono::steady_clock::now();

    bool ok = true;
    double worst = -1e300;
    for (const auto& c : cases) {
        const auto model = catalog_model(c.name);
        const auto rep = lyapunov_check(model, 2.0);
        ok = ok && rep.ok && std::abs(rep.R - c.R) <= 1e-9 &&
             std::abs(rep.a - c.a) <= 1e-9 && std::abs(rep.b - c.b) <= 1e-9;
        const auto grid = Grid1D::auto_box(model, 0.0, 0.05);
        for (int i = 0; i < grid.n_nodes; ++i) {
            const double x = grid.node(i);
            if (std::abs(x) <= rep.R) continue;
            const double s = model.diffusion(x);
            const double lhs =
                2.0 * x * model.drift(x) + s * s + rep.a * x * x;
            worst = std::max(worst, lhs);
            ok = ok && lhs <= 1e-9;
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    CheckResult r;
    r.pass = ok && secs < 1.0;
    r.detail = fmt("constants to 1e-9, worst off-ball value=%.2e (%.3fs)",
                   worst, secs);
    return r;
}

// ---------------------------------------------------------------------------
// 7. Coupling: the linear model contracts deterministically path by path,
//    and the weakly dissipative model shows a clean exponential decay of a
//    bounded observable gap under common random numbers.
CheckResult coupling_contraction() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ou = catalog_model("ou");

    const double dt = 1e-3;
    const auto series = coupled_simulate(ou, 1.0, -2.0, 2.0, dt, 256, 11);
    double worst_hw = 0.0, worst_spread = 0.0, worst_disc = 0.0,
           worst_cont = 0.0;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const double t = series.times[k];
        const double exact = 3.0 * std::pow(1.0 - dt, static_cast<double>(k));
        worst_hw = std::max(worst_hw, series.half_width_95[k]);
        worst_spread = std::max(
            worst_spread, series.max_distance[k] - series.mean_distance[k]);
        worst_disc =
            std::max(worst_disc, std::abs(series.mean_distance[k] - exact));
        worst_cont = std::max(
            worst_cont,
            std::abs(series.mean_distance[k] - 3.0 * std::exp(-t)));
    }

    const auto fit = contraction_fit(
        catalog_model("weakdiss"), [](double x) { return std::cos(x); }, 2.0,
        -2.0, {1, 2, 3, 4, 5, 6, 7, 8}, 0.01, 100000, 12);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    CheckResult r;
    r.pass = worst_hw <= 1e-13 && worst_spread <= 1e-13 &&
             worst_disc <= 1e-9 && worst_cont <= 2e-3 && fit.nu_hat > 0.0 &&
             fit.r2 >= 0.9 && secs < 300.0;
    r.detail = fmt("path spread=%.1e |d-step decay|=%.1e |d-e^-t|=%.1e "
                   "nu=%.3f r2=%.3f (%.1fs)",
                   std::max(worst_hw, worst_spread), worst_disc, worst_cont,
                   fit.nu_hat, fit.r2, secs);
    return r;
}

// ---------------------------------------------------------------------------
// 8. A bounded drift shift of size 0.1 keeps the second moment uniformly
//    bounded in time: the shifted model still passes the structural gates,
//    the t=0 moment is exact, and the sweep stays under a pilot-calibrated
//    cap over fifty time units.
CheckResult shifted_moment_cap() {
    SdeModel shifted = catalog_model("ou");
    const auto base_drift = shifted.drift;
    const auto sigma = shifted.diffusion;
    shifted.name = "ou-shifted";
    shifted.drift = [base_drift, sigma](double x) {
        return base_drift(x) + 0.1 * sigma(x);
    };
    // x(-x + 0.1) <= 0.05 - 0.95 x^2 by completing the square.
    shifted.eta1 = 0.05;
    shifted.eta2 = 0.95;
    shifted.xi1 = shifted.xi1 + 0.1;

    const auto gate = validate(shifted, catalog_driver("const", {{"c", 0.3}}));

    std::vector<double> times;
    for (int t = 0; t <= 50; ++t) times.push_back(t);
    const double x0 = 1.5;
    const auto pilot =
        moment_sweep(shifted, x0, 50.0, 0.02, 4000, 2024, 2.0, times);
    double cap = 0.0;
    for (const auto& m : pilot) {
        if (m.t >= 1.0) cap = std::max(cap, m.value);
    }
    cap *= 1.5;

    const auto sweep =
        moment_sweep(shifted, x0, 50.0, 0.02, 20000, 77, 2.0, times);
    double sup = 0.0;
    for (const auto& m : sweep) {
        if (m.t >= 1.0) sup = std::max(sup, m.value);
    }
    const bool exact_start =
        sweep[0].value == x0 * x0 && sweep[0].half_width_95 == 0.0;

    CheckResult r;
    r.pass = gate.all_ok() && exact_start && sup <= cap;
    r.detail = fmt("gates=%s start moment %.4f exact=%s sup_{t>=1}=%.4f "
                   "cap=%.4f",
                   gate.all_ok() ? "ok" : "VIOLATED", sweep[0].value,
                   exact_start ? "yes" : "no", sup, cap);
    return r;
}

// ---------------------------------------------------------------------------
// 9. The slope field is reproduced by both backends.  With no driver and a
//    linear payoff the field is exp(-(T-t)) exactly; the grid slope matches
//    it to 0.02 and the binned raw path projections match within their own
//    confidence bands with the same floor.  With the nonlinear driver the
//    two backends agree bin by bin with a 0.05 floor.
CheckResult slope_field_agreement() {
    const auto model = catalog_model("ou");
    const auto grid = Grid1D::auto_box(model, 0.0, 0.05);

    const auto no_driver = catalog_driver("const", {{"c", 0.0}});
    const auto linear = catalog_terminal("linear");
    const double T = 1.0;
    const auto pde =
        solve_finite_horizon(model, no_driver, linear, T, grid, 1.0 / 160);

    double worst_pde = 0.0;
    for (double t : {0.25, 0.5, 0.75}) {
        const auto z = extract_z(pde.layer_at_time(t), model, grid);
        for (int i = 0; i < grid.n_nodes; ++i) {
            if (std::abs(grid.node(i)) > 3.0) continue;
            worst_pde =
                std::max(worst_pde, std::abs(z[i] - std::exp(-(T - t))));
        }
    }

    const auto rep = z_representation_check(
        model, no_driver, linear, 0.0, T, 0.01, 350000,
        RegressionBasis::polynomial(3, -3.5, 3.5), pde, 12, 424242, 2000);
    double worst_truth = -1e300, worst_cross = -1e300;
    for (const auto& row : rep.rows) {
        const double band = std::max(2.0 * row.half_width_95, 0.02);
        worst_truth = std::max(
            worst_truth,
            std::abs(row.z_mc - std::exp(-(T - row.t))) - band);
        worst_cross =
            std::max(worst_cross, std::abs(row.z_mc - row.z_pde) - band);
    }

    const auto tanh_driver = catalog_driver("cos-tanh", {}, &model);
    const auto zero = catalog_terminal("zero");
    const auto pde2 =
        solve_finite_horizon(model, tanh_driver, zero, 2.0, grid, 2.0 / 256);
    // Degree five over the data-carrying window: the backward values feed
    // the raw projections, and a stiffer basis leaves a visible tail bias.
    const auto rep2 = z_representation_check(
        model, tanh_driver, zero, 0.0, 2.0, 0.02, 350000,
        RegressionBasis::polynomial(5, -3.0, 3.0), pde2, 12, 515151, 5000);
    double worst_nl = -1e300;
    for (const auto& row : rep2.rows) {
        const double band = std::max(2.0 * row.half_width_95, 0.05);
        worst_nl =
            std::max(worst_nl, std::abs(row.z_mc - row.z_pde) - band);
    }

    CheckResult r;
    r.pass = worst_pde <= 0.02 && worst_truth <= 0.0 && worst_cross <= 0.0 &&
             worst_nl <= 0.0 && !rep.rows.empty() && !rep2.rows.empty();
    r.detail = fmt("grid slope dev=%.3f, bins past band: exact=%.3f "
                   "cross=%.3f nonlinear=%.3f (rows %zu/%zu)",
                   worst_pde, worst_truth, worst_cross, worst_nl,
                   rep.rows.size(), rep2.rows.size());
    return r;
}

// ---------------------------------------------------------------------------
// 10. Discounted values grow at most linearly with weight 1/alpha, and the
//     normalised potentials are weighted-Lipschitz, both with a single
//     constant across the discount schedule calibrated on a coarse pilot.
CheckResult discounted_growth_bounds() {
    const auto model = catalog_model("ou");
    const auto driver = catalog_driver("cos");
    const std::vector<double> alphas = {1.0, 0.5, 0.25, 0.125};

    auto growth_const = [&](const Grid1D& g, const std::vector<double>& v,
                            double alpha) {
        double c = 0.0;
        for (int i = 0; i < g.n_nodes; ++i) {
            c = std::max(c,
                         alpha * std::abs(v[i]) / (1.0 + std::abs(g.node(i))));
        }
        return c;
    };
    auto lip_const = [&](const Grid1D& g, const std::vector<double>& v) {
        const double v0 = v[static_cast<std::size_t>(g.zero_index())];
        double c = 0.0;
        for (int i = 0; i < g.n_nodes; ++i) {
            for (int j = i + 1; j < g.n_nodes; ++j) {
                const double xi = g.node(i), xj = g.node(j);
                const double w = (1.0 + std::abs(xi) + std::abs(xj)) *
                                 std::abs(xi - xj);
                c = std::max(c, std::abs((v[i] - v0) - (v[j] - v0)) / w);
            }
        }
        return c;
    };

    const auto coarse = Grid1D::auto_box(model, 0.0, 0.1);
    double pilot_growth = 0.0, pilot_lip = 0.0;
    for (double a : alphas) {
        const auto sol = solve_discounted(model, driver, a, coarse);
        pilot_growth = std::max(pilot_growth, growth_const(coarse, sol.v, a));
        pilot_lip = std::max(pilot_lip, lip_const(coarse, sol.v));
    }
    const double cap_growth = 1.2 * pilot_growth;
    const double cap_lip = 1.2 * pilot_lip;

    const auto fine = Grid1D::auto_box(model, 0.0, 0.05);
    double v1_at_zero = 0.0;
    double worst_growth = 0.0, worst_lip = 0.0;
    for (double a : alphas) {
        const auto sol = solve_discounted(model, driver, a, fine);
        if (a == 1.0) {
            v1_at_zero = sol.v[static_cast<std::size_t>(fine.zero_index())];
        }
        worst_growth = std::max(worst_growth, growth_const(fine, sol.v, a));
        worst_lip = std::max(worst_lip, lip_const(fine, sol.v));
    }
    const double dref = std::abs(v1_at_zero - 0.848872767004044);

    CheckResult r;
    r.pass = worst_growth <= cap_growth && worst_lip <= cap_lip &&
             std::isfinite(cap_growth) && std::isfinite(cap_lip) &&
             dref <= 5e-3;
    r.detail = fmt("growth %.4f<=%.4f lipschitz %.4f<=%.4f |v1(0)-ref|=%.1e",
                   worst_growth, cap_growth, worst_lip, cap_lip, dref);
    return r;
}

// ---------------------------------------------------------------------------
// 11. Control pricing: twenty seeded random policies never beat the
//     constructed rate (long run) or the solved start value (finite
//     horizon), and the minimising feedbacks achieve both within bands.
CheckResult policy_cost_ordering() {
    const auto model = catalog_model("ou");
    const auto cp = catalog_control("bang-control");
    const auto driver = induced_driver(cp, model);
    const auto grid = Grid1D::auto_box(model, 0.0, 0.05);

    const auto erg = vanishing_discount(model, driver, grid);
    const auto star = optimal_feedback(cp, model, erg);
    const auto jstar =
        evaluate_cost_ergodic(cp, model, star, 0.0, 60.0, 0.02, 4000, 21);
    const double dstar = std::abs(jstar.value - erg.lambda);

    const double T = 4.0;
    const int M = 512;
    const auto u =
        solve_finite_horizon(model, driver, cp.terminal, T, grid, T / M);
    const double u0 = u.value(0.0, 0.0);

    // Finite-horizon minimiser: at each layer take the action minimising the
    // Hamiltonian along that layer's slope field, then pay the running cost
    // along the shifted dynamics.
    std::vector<std::vector<double>> zs(u.u.size());
    for (std::size_t k = 0; k < u.u.size(); ++k) {
        zs[k] = extract_z(u.u[k], model, grid);
    }
    const double dtf = T / M;
    const double sq = std::sqrt(dtf);
    const int n_paths = 30000;
    double sum = 0.0, sumsq = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        double x = 0.0, cost = 0.0;
        for (int k = 0; k < M; ++k) {
            const double z = grid.interp(zs[static_cast<std::size_t>(k)], x);
            const int a = hamiltonian(cp, model, x, z).argmin;
            cost += cp.running_cost(x, a) * dtf;
            x += (model.drift(x) +
                  cp.actions[static_cast<std::size_t>(a)].shift) *
                     dtf +
                 model.diffusion(x) * sq *
                     rng::normal_draw(23, static_cast<std::uint64_t>(p),
                                      static_cast<std::uint64_t>(k), 0);
        }
        cost += cp.terminal.g(x);
        sum += cost;
        sumsq += cost * cost;
    }
    const double jt = sum / n_paths;
    const double var = std::max(0.0, sumsq / n_paths - jt * jt);
    const double hw = 1.96 * std::sqrt(var / n_paths);
    const double dfin = std::abs(jt - u0);
    const double band_fin = std::max(2.0 * hw, 0.03);

    double worst_erg = 1e300, worst_fin = 1e300;
    bool ordered = true;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto pol = FeedbackPolicy::random(cp, grid, s);
        const auto j =
            evaluate_cost_ergodic(cp, model, pol, 0.0, 40.0, 0.02, 400,
                                  9000 + s);
        worst_erg = std::min(worst_erg, j.value - (erg.lambda - 0.02));
        const auto jtf = evaluate_cost_finite(cp, model, pol, 0.0, T, 0.008,
                                              2000, 9100 + s);
        const double slack = std::max(2.0 * jtf.half_width_95, 0.03);
        worst_fin = std::min(worst_fin, jtf.value - (u0 - slack));
        ordered = ordered && j.value >= erg.lambda - 0.02 &&
                  jtf.value >= u0 - slack;
    }

    CheckResult r;
    r.pass = ordered && dstar <= 0.02 && dfin <= band_fin;
    r.detail = fmt("|J*-lambda|=%.4f |JT*-u0|=%.4f band=%.4f, random "
                   "margins: long=%.3f finite=%.3f",
                   dstar, dfin, band_fin, worst_erg, worst_fin);
    return r;
}

// ---------------------------------------------------------------------------
// 12. Hygiene: halving the steps, halving the spacing, or doubling the box
//     moves every reported number by far less than its acceptance band, and
//     rerunning the CLI with fixed seeds reproduces its CSV output byte for
//     byte.
CheckResult resolution_and_reproducibility() {
    namespace fs = std::filesystem;
    const auto model = catalog_model("ou");
    const auto driver = catalog_driver("cos");
    const auto terminal = catalog_terminal("quadratic");
    const std::vector<double> xs = {-3, -2, -1, 0, 1, 2, 3};
    const std::vector<double> Ts = {2, 2.5, 3, 3.5, 4, 5, 6, 8, 10};

    const auto& base = erg_ou_cos();
    const auto fine_grid = Grid1D::auto_box(model, 0.0, 0.025);
    const auto fine = vanishing_discount(model, driver, fine_grid);
    const auto box_grid = Grid1D::symmetric(8.5, 0.05);
    const auto box = vanishing_discount(model, driver, box_grid);

    const double sup_base = sup_abs_window(base.grid, base.v, -3, 3);
    const double sup_fine = sup_abs_window(fine_grid, fine.v, -3, 3);
    const double sup_box = sup_abs_window(box_grid, box.v, -3, 3);

    const auto prof_base = large_time_profile(model, driver, terminal, base,
                                              Ts, xs, 0.005, 1e-3);
    const auto prof_fine = large_time_profile(model, driver, terminal, fine,
                                              Ts, xs, 0.0025, 1e-3);
    const auto prof_box = large_time_profile(model, driver, terminal, box,
                                             Ts, xs, 0.005, 1e-3);

    const double dlam_fine = std::abs(fine.lambda - base.lambda);
    const double dlam_box = std::abs(box.lambda - base.lambda);
    const double dsup_fine = std::abs(sup_fine - sup_base);
    const double dsup_box = std::abs(sup_box - sup_base);
    const double dL_fine = std::abs(prof_fine.L_hat - prof_base.L_hat);
    const double dL_box = std::abs(prof_box.L_hat - prof_base.L_hat);

    // Refinement may move each number by at most four times its acceptance
    // band (0.01 for the rate and the potential, 0.02 for the offset);
    // enlarging the box by at most one band.
    const bool stable = dlam_fine <= 0.04 && dlam_box <= 0.01 &&
                        dsup_fine <= 0.04 && dsup_box <= 0.01 &&
                        dL_fine <= 0.08 && dL_box <= 0.02;

    // CSV reproducibility through the CLI.
    const fs::path scratch =
        fs::temp_directory_path() / "ebsde-acceptance-scratch";
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    auto write_cfg = [&](const std::string& name, const std::string& body) {
        const fs::path p = scratch / name;
        std::ofstream out(p);
        out << body;
        return p.string();
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string sim_common = "model = ou\n"
                                   "x0 = 0.5\n"
                                   "x0_b = -0.5\n"
                                   "T = 0.5\n"
                                   "dt = 0.01\n"
                                   "n_paths = 64\n"
                                   "csv_paths = 8\n"
                                   "seed = 9\n";
    const std::string erg_common = "model = ou\n"
                                   "driver = const\n"
                                   "driver.c = 0.3\n"
                                   "alpha_schedule = 1,0.5,0.25\n"
                                   "tol = 1e-5\n"
                                   "h = 0.05\n";
    bool csv_ok = true;
    int rc = 0;
    rc |= cli::run("simulate",
                   write_cfg("sim_a.cfg", sim_common + "out_dir = \"" +
                                              (scratch / "sa").string() +
                                              "\"\n"));
    rc |= cli::run("simulate",
                   write_cfg("sim_b.cfg", sim_common + "out_dir = \"" +
                                              (scratch / "sb").string() +
                                              "\"\n"));
    rc |= cli::run("ergodic",
                   write_cfg("erg_a.cfg", erg_common + "out_dir = \"" +
                                              (scratch / "ea").string() +
                                              "\"\n"));
    rc |= cli::run("ergodic",
                   write_cfg("erg_b.cfg", erg_common + "out_dir = \"" +
                                              (scratch / "eb").string() +
                                              "\"\n"));
    csv_ok = rc == 0;
    const std::string pa = slurp(scratch / "sa" / "paths.csv");
    csv_ok = csv_ok && !pa.empty() &&
             pa == slurp(scratch / "sb" / "paths.csv");
    const std::string ea = slurp(scratch / "ea" / "ergodic.csv");
    const std::string ta = slurp(scratch / "ea" / "ergodic_trace.csv");
    csv_ok = csv_ok && !ea.empty() &&
             ea == slurp(scratch / "eb" / "ergodic.csv") && !ta.empty() &&
             ta == slurp(scratch / "eb" / "ergodic_trace.csv");
    fs::remove_all(scratch);

    CheckResult r;
    r.pass = stable && csv_ok;
    r.detail = fmt("refine dlam=%.1e dsup=%.1e dL=%.1e, box dlam=%.1e "
                   "dsup=%.1e dL=%.1e, csv=%s",
                   dlam_fine, dsup_fine, dL_fine, dlam_box, dsup_box, dL_box,
                   csv_ok ? "identical" : "DIFFER");
    return r;
}

}  // namespace

int main() {
    struct Item {
        const char* name;
        CheckResult (*fn)();
    };
    const Item items[] = {
        {"constant-driver exactness", constant_driver_exactness},
        {"stationary-average routes", stationary_average_routes},
        {"manufactured-solution recovery", manufactured_solution_recovery},
        {"large-time relaxation", large_time_relaxation},
        {"linear growth of start values", linear_growth_of_start_values},
        {"drift-condition constants", drift_condition_constants},
        {"coupling contraction", coupling_contraction},
        {"shifted-drift moment cap", shifted_moment_cap},
        {"slope-field agreement", slope_field_agreement},
        {"discounted growth bounds", discounted_growth_bounds},
        {"policy cost ordering", policy_cost_ordering},
        {"resolution and reproducibility", resolution_and_reproducibility},
    };

    int failures = 0;
    const auto all0 = std::chrono::steady_clock::now();
    for (const auto& item : items) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult res;
        try {
            res = item.fn();
        } catch (const std::exception& e) {
            res.pass = false;
            res.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
        std::printf("[%s] %-32s %s (%.1fs)\n", res.pass ? "PASS" : "FAIL",
                    item.name, res.detail.c_str(), secs);
        std::fflush(stdout);
        if (!res.pass) ++failures;
    }
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - all0)
            .count();
    if (failures == 0) {
        std::printf("all 12 checks passed in %.1fs\n", total);
    } else {
        std::printf("%d of 12 checks FAILED (%.1fs)\n", failures, total);
    }
    return failures;
}
