#include "ebsde/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ebsde/bsde_mc.hpp"
#include "ebsde/config.hpp"
#include "ebsde/control.hpp"
#include "ebsde/csv.hpp"
#include "ebsde/ergodic.hpp"
#include "ebsde/errors.hpp"
#include "ebsde/large_time.hpp"
#include "ebsde/model.hpp"
#include "ebsde/pde.hpp"
#include "ebsde/sde.hpp"
#include "ebsde/semigroup.hpp"

namespace ebsde::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;
using csv::num;

std::vector<double> get_list(const ExperimentConfig& cfg,
                             const std::string& key,
                             const std::string& fallback) {
    std::vector<double> out;
    std::stringstream ss(cfg.get_string(key, fallback));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw ConfigError("key '" + key + "' lists no values");
    return out;
}

Grid1D grid_from_config(const ExperimentConfig& cfg, const SdeModel& model,
                        double x0) {
    const double h = cfg.get_double("h", 0.02);
    if (cfg.has("x_max")) {
        return Grid1D::symmetric(cfg.get_double("x_max"), h);
    }
    return Grid1D::auto_box(model, std::abs(x0), h);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
    const fs::path dir = cfg.get_string("out_dir", "out");
    fs::create_directories(dir);
    return (dir / file).string();
}

void write_manifest(const ExperimentConfig& cfg, const std::string& subcommand,
                    nlohmann::json extra) {
    nlohmann::json m;
    m["subcommand"] = subcommand;
    m["config_hash"] = cfg.hash();
    m["version"] = kVersion;
    if (cfg.has("seed")) m["seed"] = cfg.seed();
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    // Timestamp is informational only; reproducibility comparisons must key
    // on the other fields and the CSV payloads.
    m["timestamp"] = stamp;
    m["results"] = std::move(extra);
    std::ofstream out(out_path(cfg, "manifest.json"));
    out << m.dump(2) << '\n';
}

int do_validate(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const auto driver = driver_from_config(cfg, model);
    ValidateOptions opts;
    opts.mu = cfg.get_double("mu", 2.0);
    opts.p = cfg.get_double("p", 2.0);
    opts.gamma_bound = cfg.get_double("gamma_bound", -1.0);
    const auto report = validate(model, driver, opts);

    csv::Writer w(out_path(cfg, "gate_report.csv"), {"check", "value", "ok"});
    w.write_row({"drift_gate_margin", num(report.drift_gate_margin),
                 report.drift_gate_ok ? "1" : "0"});
    w.write_row({"equation_gate_margin", num(report.equation_gate_margin),
                 report.equation_gate_ok ? "1" : "0"});
    for (const auto& s : report.samples) {
        w.write_row({s.name, num(s.worst_residual),
                     s.worst_residual <= 1e-9 ? "1" : "0"});
    }
    std::cout << "drift gate margin      " << num(report.drift_gate_margin)
              << (report.drift_gate_ok ? "  ok" : "  VIOLATED") << "\n"
              << "equation gate margin   " << num(report.equation_gate_margin)
              << (report.equation_gate_ok ? "  ok" : "  VIOLATED") << "\n";
    for (const auto& s : report.samples) {
        std::cout << "assumption " << s.name << ": worst residual "
                  << num(s.worst_residual) << " at x=" << num(s.at_x) << "\n";
    }
    write_manifest(cfg, "validate",
                   {{"all_ok", report.all_ok()},
                    {"drift_gate_margin", report.drift_gate_margin},
                    {"equation_gate_margin", report.equation_gate_margin}});
    return report.all_ok() ? 0 : 2;
}

int do_simulate(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const double x0 = cfg.get_double("x0", 0.0);
    const double T = cfg.get_double("T", 1.0);
    const double dt = cfg.get_double("dt", 0.01);
    const int n_paths = static_cast<int>(cfg.get_long("n_paths", 1000));
    const auto seed = cfg.seed();
    const int n_csv = static_cast<int>(
        cfg.get_long("csv_paths", std::min(n_paths, 100)));

    const bool paired = cfg.has("x0_b");
    const auto ens = simulate(model, x0, T, dt, n_csv, seed);
    if (paired) {
        const auto ens_b =
            simulate(model, cfg.get_double("x0_b"), T, dt, n_csv, seed);
        csv::Writer w(out_path(cfg, "paths.csv"), {"path", "t", "x1", "x2"});
        for (int p = 0; p < n_csv; ++p) {
            for (int k = 0; k <= ens.n_steps(); ++k) {
                w.write_row({num(p), num(ens.times[static_cast<std::size_t>(k)]),
                             num(ens.state(p, k)), num(ens_b.state(p, k))});
            }
        }
    } else {
        csv::Writer w(out_path(cfg, "paths.csv"), {"path", "t", "x1"});
        for (int p = 0; p < n_csv; ++p) {
            for (int k = 0; k <= ens.n_steps(); ++k) {
                w.write_row({num(p), num(ens.times[static_cast<std::size_t>(k)]),
                             num(ens.state(p, k))});
            }
        }
    }
    // Full-ensemble second moment at the horizon, streamed.
    const auto est = moment_sweep(model, x0, T, dt, n_paths, seed,
                                  cfg.get_double("moment_p", 2.0), {T});
    std::cout << "E|X_T|^p = " << num(est[0].value) << " +- "
              << num(est[0].half_width_95) << " (p=" << num(est[0].p)
              << ", n=" << n_paths << ")\n";
    write_manifest(cfg, "simulate",
                   {{"moment", est[0].value},
                    {"moment_half_width", est[0].half_width_95}});
    return 0;
}

int do_contraction(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const double a = cfg.get_double("x0_a", 2.0);
    const double b = cfg.get_double("x0_b", -2.0);
    const double T = cfg.get_double("T", 10.0);
    const double dt = cfg.get_double("dt", 0.01);
    const int n_paths = static_cast<int>(cfg.get_long("n_paths", 10000));
    const auto fit = contraction_fit(model, a, b, T, dt, n_paths, cfg.seed());

    csv::Writer w(out_path(cfg, "gap.csv"), {"t", "gap", "ci"});
    for (std::size_t k = 0; k < fit.series.times.size(); ++k) {
        w.write_row({num(fit.series.times[k]), num(fit.series.mean_distance[k]),
                     num(fit.series.half_width_95[k])});
    }
    std::cout << "nu_hat = " << num(fit.nu_hat) << "  c_hat = " << num(fit.c_hat)
              << "  r2 = " << num(fit.r2) << "  points = " << fit.n_used
              << "\n";
    write_manifest(cfg, "contraction",
                   {{"nu_hat", fit.nu_hat},
                    {"c_hat", fit.c_hat},
                    {"r2", fit.r2},
                    {"n_used", fit.n_used}});
    return fit.nu_hat > 0.0 ? 0 : 2;
}

int do_solve_finite(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const auto driver = driver_from_config(cfg, model);
    const auto terminal = terminal_from_config(cfg);
    const double x0 = cfg.get_double("x0", 0.0);
    const double T = cfg.get_double("T", 4.0);
    const double dt = cfg.get_double("dt", 0.002);
    const auto grid = grid_from_config(cfg, model, x0);
    const auto sol = solve_finite_horizon(model, driver, terminal, T, grid, dt);

    const long n_csv_times = cfg.get_long("csv_times", 21);
    const long M = static_cast<long>(sol.times.size()) - 1;
    const long stride = std::max(1L, M / std::max(1L, n_csv_times - 1));
    csv::Writer w(out_path(cfg, "solution.csv"), {"t", "x", "u"});
    for (long m = 0; m <= M; m += stride) {
        for (int i = 0; i < grid.n_nodes; ++i) {
            w.write_row({num(sol.times[static_cast<std::size_t>(m)]),
                         num(grid.node(i)),
                         num(sol.u[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)])});
        }
    }
    const double u0 = sol.value(0.0, x0);
    std::cout << "u(0, " << num(x0) << ") = " << num(u0) << "\n";

    nlohmann::json extra{{"u0", u0}};
    if (cfg.get_long("mc_paths", 0) > 0) {
        const int mc_paths = static_cast<int>(cfg.get_long("mc_paths", 0));
        const double mc_dt = cfg.get_double("mc_dt", 0.02);
        const auto basis = RegressionBasis::polynomial(
            static_cast<int>(cfg.get_long("mc_degree", 6)), grid.x_min,
            grid.x_max);
        const auto mc = solve_finite_mc(model, driver, terminal, x0, T, mc_dt,
                                        mc_paths, basis, cfg.seed());
        const auto zrep = z_representation_check(
            model, driver, terminal, x0, T, mc_dt, mc_paths, basis, sol,
            static_cast<int>(cfg.get_long("mc_bins", 32)), cfg.seed());
        csv::Writer wb(out_path(cfg, "bsde_bins.csv"),
                       {"t", "bin_center", "z_mc", "z_pde"});
        for (const auto& row : zrep.rows) {
            wb.write_row({num(row.t), num(row.bin_center), num(row.z_mc),
                          num(row.z_pde)});
        }
        std::cout << "mc y0 = " << num(mc.y0) << " +- "
                  << num(mc.y0_half_width_95) << "  (pde " << num(u0) << ")\n"
                  << "z field sup discrepancy = " << num(zrep.sup_discrepancy)
                  << " over " << zrep.rows.size() << " bins\n";
        extra["mc_y0"] = mc.y0;
        extra["mc_y0_half_width"] = mc.y0_half_width_95;
        extra["z_sup_discrepancy"] = zrep.sup_discrepancy;
    }
    write_manifest(cfg, "solve-finite", extra);
    return 0;
}

int do_solve_discounted(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const auto driver = driver_from_config(cfg, model);
    const double alpha = cfg.get_double("alpha");
    const double x0 = cfg.get_double("x0", 0.0);
    const auto grid = grid_from_config(cfg, model, x0);
    const auto sol = solve_discounted(model, driver, alpha, grid,
                                      cfg.get_double("tol", 1e-6),
                                      cfg.get_double("max_pseudo_time", 0.0));

    csv::Writer w(out_path(cfg, "valpha.csv"), {"x", "v_alpha"});
    for (int i = 0; i < grid.n_nodes; ++i) {
        w.write_row({num(grid.node(i)), num(sol.v[static_cast<std::size_t>(i)])});
    }
    const double v0 = sol.v[static_cast<std::size_t>(grid.zero_index())];
    std::cout << "v_alpha(0) = " << num(v0) << "  alpha*v_alpha(0) = "
              << num(alpha * v0) << "  iterations = " << sol.iterations << "\n";

    nlohmann::json extra{{"v0", v0},
                         {"alpha_v0", alpha * v0},
                         {"iterations", sol.iterations}};
    if (cfg.get_long("mc_paths", 0) > 0) {
        const auto basis = RegressionBasis::polynomial(
            static_cast<int>(cfg.get_long("mc_degree", 6)), grid.x_min,
            grid.x_max);
        const auto mc = solve_discounted_mc(
            model, driver, alpha, x0, cfg.get_double("mc_tol", 0.01),
            cfg.get_double("mc_dt", 0.05),
            static_cast<int>(cfg.get_long("mc_paths", 0)), basis, cfg.seed());
        std::cout << "mc v_alpha(x0) = " << num(mc.value) << " +- "
                  << num(mc.half_width_95) << " (horizon " << num(mc.horizon)
                  << ")\n";
        extra["mc_value"] = mc.value;
        extra["mc_half_width"] = mc.half_width_95;
    }
    write_manifest(cfg, "solve-discounted", extra);
    return 0;
}

std::vector<double> schedule_from_config(const ExperimentConfig& cfg) {
    if (cfg.has("alpha_schedule")) {
        return get_list(cfg, "alpha_schedule", "");
    }
    std::vector<double> s;
    const long k_max = cfg.get_long("schedule_k", 6);
    for (long k = 0; k <= k_max; ++k) s.push_back(std::ldexp(1.0, -static_cast<int>(k)));
    return s;
}

int do_ergodic(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const auto driver = driver_from_config(cfg, model);
    const auto grid = grid_from_config(cfg, model, cfg.get_double("x0", 0.0));
    const auto sol = vanishing_discount(model, driver, grid,
                                        schedule_from_config(cfg),
                                        cfg.get_double("tol", 1e-6));

    csv::Writer w(out_path(cfg, "ergodic.csv"), {"x", "v", "zeta"});
    for (int i = 0; i < grid.n_nodes; ++i) {
        w.write_row({num(grid.node(i)), num(sol.v[static_cast<std::size_t>(i)]),
                     num(sol.zeta[static_cast<std::size_t>(i)])});
    }
    csv::Writer wt(out_path(cfg, "ergodic_trace.csv"),
                   {"alpha", "lambda_alpha", "v_gap"});
    for (std::size_t k = 0; k < sol.alpha_schedule.size(); ++k) {
        wt.write_row({num(sol.alpha_schedule[k]), num(sol.lambda_trace[k]),
                      num(k == 0 ? 0.0 : sol.v_trace_gaps[k - 1])});
    }
    std::cout << "lambda = " << num(sol.lambda)
              << "  residual = " << num(sol.residual) << "\n";
    write_manifest(cfg, "ergodic",
                   {{"lambda", sol.lambda}, {"residual", sol.residual}});
    return 0;
}

int do_large_time(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const auto driver = driver_from_config(cfg, model);
    const auto terminal = terminal_from_config(cfg);
    const auto grid = grid_from_config(cfg, model, 0.0);
    const auto erg = vanishing_discount(model, driver, grid,
                                        schedule_from_config(cfg),
                                        cfg.get_double("tol", 1e-6));
    const auto T_list = get_list(cfg, "horizons", "2,4,6,8,10");
    const auto x_list = get_list(cfg, "probe_points", "-3,-1.5,0,1.5,3");
    const auto prof = large_time_profile(model, driver, terminal, erg, T_list,
                                         x_list, cfg.get_double("dt", 0.002),
                                         cfg.get_double("tol_floor", 3e-4));

    csv::Writer w(out_path(cfg, "large_time.csv"), {"T", "x", "w"});
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        for (std::size_t j = 0; j < x_list.size(); ++j) {
            w.write_row({num(T_list[i]), num(x_list[j]), num(prof.w[i][j])});
        }
    }
    csv::Writer wf(out_path(cfg, "large_time_fit.csv"),
                   {"L_hat", "nu_hat", "fit_r2", "C_hat", "fit_degenerate"});
    wf.write_row({num(prof.L_hat), num(prof.nu_hat), num(prof.fit_r2),
                  num(prof.C_hat), prof.fit_degenerate ? "1" : "0"});
    std::cout << "L_hat = " << num(prof.L_hat) << "  nu_hat = "
              << num(prof.nu_hat) << "  r2 = " << num(prof.fit_r2)
              << (prof.fit_degenerate ? "  (converged beyond measurement)"
                                      : "")
              << "\n";
    write_manifest(cfg, "large-time",
                   {{"L_hat", prof.L_hat},
                    {"nu_hat", prof.nu_hat},
                    {"fit_r2", prof.fit_r2},
                    {"fit_degenerate", prof.fit_degenerate}});
    return 0;
}

int do_control(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const auto cp = catalog_control(cfg.get_string("control", "bang-control"),
                                    cfg.params_with_prefix("control"));
    const auto driver = induced_driver(cp, model);
    const auto grid = grid_from_config(cfg, model, 0.0);
    const auto erg = vanishing_discount(model, driver, grid,
                                        schedule_from_config(cfg),
                                        cfg.get_double("tol", 1e-6));
    const auto best = optimal_feedback(cp, model, erg);

    csv::Writer w(out_path(cfg, "control.csv"), {"x", "action_label"});
    for (int i = 0; i < grid.n_nodes; ++i) {
        w.write_row({num(grid.node(i)),
                     cp.actions[static_cast<std::size_t>(
                                    best.action_idx[static_cast<std::size_t>(i)])]
                         .label});
    }

    const double T_long = cfg.get_double("T_long", 40.0);
    const double dt = cfg.get_double("dt_mc", 0.02);
    const int n_paths = static_cast<int>(cfg.get_long("n_paths", 400));
    const double x0 = cfg.get_double("x0", 0.0);
    const auto seed = cfg.seed();

    csv::Writer wc(out_path(cfg, "control_costs.csv"),
                   {"policy", "cost", "ci"});
    const auto opt_cost = evaluate_cost_ergodic(cp, model, best, x0, T_long, dt,
                                                n_paths, seed);
    wc.write_row({"optimal", num(opt_cost.value), num(opt_cost.half_width_95)});
    std::cout << "lambda = " << num(erg.lambda) << "\n"
              << "optimal policy long-run cost = " << num(opt_cost.value)
              << " +- " << num(opt_cost.half_width_95) << "\n";
    for (std::size_t a = 0; a < cp.actions.size(); ++a) {
        const auto pol = FeedbackPolicy::constant(cp, grid, static_cast<int>(a));
        const auto cost = evaluate_cost_ergodic(cp, model, pol, x0, T_long, dt,
                                                n_paths, seed);
        wc.write_row({"constant-" + cp.actions[a].label, num(cost.value),
                      num(cost.half_width_95)});
        std::cout << "constant '" << cp.actions[a].label
                  << "' long-run cost = " << num(cost.value) << " +- "
                  << num(cost.half_width_95) << "\n";
    }
    write_manifest(cfg, "control",
                   {{"lambda", erg.lambda},
                    {"optimal_cost", opt_cost.value},
                    {"optimal_cost_half_width", opt_cost.half_width_95}});
    return 0;
}

int do_verify_all(const ExperimentConfig& cfg) {
    const auto model = model_from_config(cfg);
    const auto driver = driver_from_config(cfg, model);
    int failures = 0;
    csv::Writer w(out_path(cfg, "verify_summary.csv"),
                  {"check", "value", "pass"});
    auto check = [&](const std::string& name, double value, bool pass) {
        w.write_row({name, num(value), pass ? "1" : "0"});
        std::cout << (pass ? "[ok]   " : "[FAIL] ") << name << " = "
                  << num(value) << "\n";
        if (!pass) ++failures;
    };

    const auto report = validate(model, driver);
    check("drift_gate_margin", report.drift_gate_margin, report.drift_gate_ok);
    check("equation_gate_margin", report.equation_gate_margin,
          report.equation_gate_ok);
    double worst = -1e300;
    for (const auto& s : report.samples) worst = std::max(worst, s.worst_residual);
    check("assumption_worst_residual", worst, report.assumptions_ok);

    const auto lyap = lyapunov_check(model, 2.0);
    check("lyapunov_worst_residual", lyap.worst_residual, lyap.ok);

    const auto grid = Grid1D::auto_box(model, 0.0, cfg.get_double("h", 0.05));
    std::vector<double> schedule;
    for (int k = 0; k <= 5; ++k) schedule.push_back(std::ldexp(1.0, -k));
    const auto erg = vanishing_discount(model, driver, grid, schedule, 1e-5);
    check("ergodic_residual", erg.residual, erg.residual <= 0.05);
    const bool gaps_shrink =
        erg.v_trace_gaps.empty() ||
        erg.v_trace_gaps.back() <= erg.v_trace_gaps.front() + 1e-12;
    check("v_trace_gap_final", erg.v_trace_gaps.empty()
                                   ? 0.0
                                   : erg.v_trace_gaps.back(), gaps_shrink);

    // Even layer count: the slope below reads the solve at T and T/2, and
    // both must land on stored layers.
    const double dt_bound =
        0.8 * grid.h() / (model.xi1 + model.xi2 * grid.x_max + 1.0);
    const int half_steps =
        std::max(1, static_cast<int>(std::ceil(6.0 / dt_bound - 1e-9)));
    const auto u = solve_finite_horizon(model, driver, catalog_terminal("zero"),
                                        12.0, grid, 12.0 / (2 * half_steps));
    const double lam_slope = lambda_from_slope(u, 6.0, 12.0);
    check("lambda_route_gap", std::abs(lam_slope - erg.lambda),
          std::abs(lam_slope - erg.lambda) <= 0.02);

    write_manifest(cfg, "verify-all",
                   {{"failures", failures}, {"lambda", erg.lambda}});
    return failures == 0 ? 0 : 2;
}

}  // namespace

int run(const std::string& subcommand, const std::string& config_path) {
    try {
        const auto cfg = ExperimentConfig::from_file(config_path);
        if (subcommand == "validate") return do_validate(cfg);
        if (subcommand == "simulate") return do_simulate(cfg);
        if (subcommand == "contraction") return do_contraction(cfg);
        if (subcommand == "solve-finite") return do_solve_finite(cfg);
        if (subcommand == "solve-discounted") return do_solve_discounted(cfg);
        if (subcommand == "ergodic") return do_ergodic(cfg);
        if (subcommand == "large-time") return do_large_time(cfg);
        if (subcommand == "control") return do_control(cfg);
        if (subcommand == "verify-all") return do_verify_all(cfg);
        std::cerr << "unknown subcommand '" << subcommand << "'\n";
        return 1;
    } catch (const GateViolated& e) {
        std::cerr << "gate violated: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientSignal& e) {
        std::cerr << "insufficient signal: " << e.what() << "\n";
        return 2;
    } catch (const NonConvergent& e) {
        std::cerr << "not convergent: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ebsde::cli
