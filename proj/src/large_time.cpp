#include "ebsde/large_time.hpp"

#include <algorithm>
#include <cmath>

#include "ebsde/errors.hpp"
#include "ebsde/stats.hpp"

namespace ebsde {

namespace {

double row_mean(const std::vector<double>& row) {
    double s = 0.0;
    for (double v : row) s += v;
    return s / static_cast<double>(row.size());
}

}  // namespace

LargeTimeProfile large_time_profile(const SdeModel& model,
                                    const Driver& driver,
                                    const TerminalCondition& terminal,
                                    const ErgodicSolution& erg,
                                    const std::vector<double>& T_list,
                                    const std::vector<double>& x_list,
                                    double dt, double tol_floor) {
    if (T_list.empty() || x_list.empty()) {
        throw Error("profile needs horizons and evaluation points");
    }
    for (std::size_t i = 1; i < T_list.size(); ++i) {
        if (!(T_list[i] > T_list[i - 1])) {
            throw Error("horizons must increase strictly");
        }
    }
    const double maxT = T_list.back();
    const auto u = solve_finite_horizon(model, driver, terminal, maxT,
                                        erg.grid, dt);

    LargeTimeProfile prof;
    prof.T_list = T_list;
    prof.x_list = x_list;
    prof.tol_floor = tol_floor;
    prof.w.assign(T_list.size(), std::vector<double>(x_list.size()));
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        const double t_layer = maxT - T_list[i];
        for (std::size_t j = 0; j < x_list.size(); ++j) {
            const double y0 = u.value(t_layer, x_list[j]);
            prof.w[i][j] = y0 - erg.lambda * T_list[i] -
                           erg.grid.interp(erg.v, x_list[j]);
        }
    }

    // Fit mean_x w(T) ~ L + C exp(-nu T).  First estimate of the limit: the
    // last row; the fit then corrects it once for its own tail term.
    const double L0 = row_mean(prof.w.back());
    std::vector<double> ts, logs;
    double first_gap_sign = 0.0;
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        const double gap = row_mean(prof.w[i]) - L0;
        if (std::abs(gap) > tol_floor) {
            ts.push_back(T_list[i]);
            logs.push_back(std::log(std::abs(gap)));
            if (first_gap_sign == 0.0) first_gap_sign = gap > 0 ? 1.0 : -1.0;
        }
    }
    if (ts.size() < 3) {
        prof.fit_degenerate = true;
        prof.L_hat = L0;
        return prof;
    }
    const auto line = stats::fit_line(ts, logs);
    prof.nu_hat = -line.slope;
    prof.C_hat = std::exp(line.intercept);
    prof.fit_r2 = line.r2;
    prof.L_hat =
        L0 - first_gap_sign * prof.C_hat * std::exp(-prof.nu_hat * maxT);
    return prof;
}

bool FirstBehaviorTable::no_doubling(double floor) const {
    // Compare against the running maximum: a bounded deviation may dip and
    // recover (the limit profile can cross the transient), but it never
    // doubles past the largest level already seen, while a wrong rate grows
    // linearly and does.
    for (std::size_t j = 0; j < x_list.size(); ++j) {
        double seen = std::max(floor, value[0][j]);
        for (std::size_t i = 1; i < T_list.size(); ++i) {
            if (value[i][j] > 2.0 * seen) return false;
            seen = std::max(seen, value[i][j]);
        }
    }
    return true;
}

FirstBehaviorTable first_behavior_check(const FiniteHorizonSolution& u,
                                        double lambda,
                                        const std::vector<double>& T_list,
                                        const std::vector<double>& x_list) {
    FirstBehaviorTable table;
    table.T_list = T_list;
    table.x_list = x_list;
    table.value.assign(T_list.size(), std::vector<double>(x_list.size()));
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        if (T_list[i] > u.horizon() + 1e-9) {
            throw WindowOutOfRange("horizon " + std::to_string(T_list[i]) +
                                   " exceeds the computed solution");
        }
        const double t_layer = u.horizon() - T_list[i];
        for (std::size_t j = 0; j < x_list.size(); ++j) {
            const double y0 = u.value(t_layer, x_list[j]);
            table.value[i][j] = std::abs(y0 - lambda * T_list[i]);
        }
    }
    return table;
}

RateEnvelopeReport rate_vs_x_check(const LargeTimeProfile& profile, double mu,
                                   double safety) {
    RateEnvelopeReport rep;
    rep.mu = mu;

    auto weight = [mu](double x) { return 1.0 + std::pow(std::abs(x), mu); };

    if (profile.fit_degenerate) {
        // Everything already sits at the resolution floor.
        double c = 0.0;
        for (std::size_t i = 0; i < profile.T_list.size(); ++i) {
            for (std::size_t j = 0; j < profile.x_list.size(); ++j) {
                c = std::max(c, std::abs(profile.w[i][j] - profile.L_hat) /
                                    weight(profile.x_list[j]));
            }
        }
        rep.C_hat = c;
        rep.envelope_holds = c <= 10.0 * profile.tol_floor;
        return rep;
    }

    // Calibrate the constant on the early half of the usable horizons and
    // require the rest of the profile to stay inside a fixed multiple.
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < profile.T_list.size(); ++i) {
        if (std::abs(row_mean(profile.w[i]) - profile.L_hat) >
            profile.tol_floor) {
            usable.push_back(i);
        }
    }
    if (usable.empty()) {
        rep.envelope_holds = true;
        return rep;
    }
    const std::size_t n_cal = (usable.size() + 1) / 2;
    for (std::size_t u = 0; u < n_cal; ++u) {
        const std::size_t i = usable[u];
        for (std::size_t j = 0; j < profile.x_list.size(); ++j) {
            const double ratio =
                std::abs(profile.w[i][j] - profile.L_hat) *
                std::exp(profile.nu_hat * profile.T_list[i]) /
                weight(profile.x_list[j]);
            rep.C_hat = std::max(rep.C_hat, ratio);
        }
    }
    rep.envelope_holds = true;
    for (std::size_t i = 0; i < profile.T_list.size(); ++i) {
        for (std::size_t j = 0; j < profile.x_list.size(); ++j) {
            const double bound = safety * rep.C_hat * weight(profile.x_list[j]) *
                                     std::exp(-profile.nu_hat *
                                              profile.T_list[i]) +
                                 profile.tol_floor;
            if (std::abs(profile.w[i][j] - profile.L_hat) > bound) {
                rep.envelope_holds = false;
            }
        }
    }
    return rep;
}

}  // namespace ebsde
