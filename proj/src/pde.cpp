#include "ebsde/pde.hpp"

#include <algorithm>
#include <cmath>

#include "ebsde/errors.hpp"

namespace ebsde {

namespace {

// Tridiagonal solve (Thomas).  lower/diag/upper are the three bands; rhs is
// overwritten with the solution.
void solve_tridiagonal(const std::vector<double>& lower,
                       const std::vector<double>& diag,
                       const std::vector<double>& upper,
                       std::vector<double>& rhs, std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    double pivot = diag[0];
    scratch[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

struct Stencil {
    std::vector<double> x, drift, sigma;
    double h = 0.0;
    double max_drift = 0.0;
};

Stencil make_stencil(const SdeModel& model, const Grid1D& grid) {
    Stencil s;
    const int n = grid.n_nodes;
    s.h = grid.h();
    s.x.resize(n);
    s.drift.resize(n);
    s.sigma.resize(n);
    for (int i = 0; i < n; ++i) {
        s.x[i] = grid.node(i);
        s.drift[i] = model.drift(s.x[i]);
        s.sigma[i] = model.diffusion(s.x[i]);
        if (!std::isfinite(s.drift[i]) || !std::isfinite(s.sigma[i]) ||
            s.sigma[i] <= 0.0) {
            throw NonFiniteEvaluation("model coefficients invalid on grid");
        }
        s.max_drift = std::max(s.max_drift, std::abs(s.drift[i]));
    }
    return s;
}

// Explicit part of the splitting: the driver on the centered slope.
// Diffusion and transport live in the implicit tridiagonal; the two boundary
// rows have no implicit part, so they carry one-sided transport here.
void explicit_rhs(const Stencil& s, const Driver& driver,
                  const std::vector<double>& u, double dt,
                  std::vector<double>& rhs) {
    const int n = static_cast<int>(s.x.size());
    const double h = s.h;
    for (int i = 0; i < n; ++i) {
        double slope;
        double transport = 0.0;
        if (i == 0) {
            slope = (u[1] - u[0]) / h;
            transport = s.drift[i] * slope;
        } else if (i == n - 1) {
            slope = (u[i] - u[i - 1]) / h;
            transport = s.drift[i] * slope;
        } else {
            slope = (u[i + 1] - u[i - 1]) / (2.0 * h);
        }
        rhs[i] = u[i] + dt * (transport +
                              driver.psi(s.x[i], slope * s.sigma[i]));
    }
}

// Tridiagonal of I - dt (1/2 sigma^2 D2 + drift Dc) on interior rows,
// identity (+ extra_diag, used for the discount) on every row.  Centered
// transport keeps the relaxed solution consistent with the centered residual;
// rows stay diagonally dominant for any dt under the CFL rule.
void build_bands(const Stencil& s, double dt, double extra_diag,
                 std::vector<double>& lower, std::vector<double>& diag,
                 std::vector<double>& upper) {
    const int n = static_cast<int>(s.x.size());
    lower.assign(static_cast<std::size_t>(n), 0.0);
    diag.assign(static_cast<std::size_t>(n), 1.0 + extra_diag);
    upper.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i < n - 1; ++i) {
        const double theta = dt * s.sigma[i] * s.sigma[i] / (2.0 * s.h * s.h);
        const double adv = dt * s.drift[i] / (2.0 * s.h);
        lower[static_cast<std::size_t>(i)] = -theta + adv;
        diag[static_cast<std::size_t>(i)] = 1.0 + extra_diag + 2.0 * theta;
        upper[static_cast<std::size_t>(i)] = -theta - adv;
    }
}

void check_layer_finite(const std::vector<double>& u, double t) {
    for (double v : u) {
        if (!std::isfinite(v)) {
            throw NonFiniteLayer("non-finite solver layer at t=" +
                                 std::to_string(t));
        }
    }
}

}  // namespace

int Grid1D::nearest_index(double x) const {
    const double pos = (x - x_min) / h();
    long i = std::lround(pos);
    if (i < 0) i = 0;
    if (i >= n_nodes) i = n_nodes - 1;
    return static_cast<int>(i);
}

Grid1D Grid1D::symmetric(double half_width, double h_target) {
    if (!(half_width > 0.0) || !(h_target > 0.0)) {
        throw Error("grid requires positive half width and spacing");
    }
    const int n_half = std::max(
        1, static_cast<int>(std::ceil(half_width / h_target - 1e-9)));
    Grid1D g;
    g.x_max = n_half * h_target;
    g.x_min = -g.x_max;
    g.n_nodes = 2 * n_half + 1;
    return g;
}

Grid1D Grid1D::auto_box(const SdeModel& model, double x0_abs,
                        double h_target) {
    const double denom = 2.0 * model.eta2 - model.r2;
    if (denom <= 0.0) {
        throw GateViolated(
            "2 eta2 - r2 <= 0: no stationary scale for a default box");
    }
    const double half = 6.0 * std::sqrt(model.r1 / denom) + std::abs(x0_abs);
    return symmetric(half, h_target);
}

double Grid1D::interp(const std::vector<double>& field, double x) const {
    const double xc = std::clamp(x, x_min, x_max);
    const double pos = (xc - x_min) / h();
    int i = static_cast<int>(std::floor(pos));
    if (i >= n_nodes - 1) i = n_nodes - 2;
    const double w = pos - i;
    return (1.0 - w) * field[static_cast<std::size_t>(i)] +
           w * field[static_cast<std::size_t>(i) + 1];
}

int FiniteHorizonSolution::layer_index(double t) const {
    if (times.size() < 2) throw TimeNotOnGrid("empty solution");
    const double dt = times[1] - times[0];
    const long k = std::lround(t / dt);
    if (k < 0 || k >= static_cast<long>(times.size()) ||
        std::abs(times[static_cast<std::size_t>(k)] - t) >
            1e-9 * std::max(1.0, std::abs(t))) {
        throw TimeNotOnGrid("time " + std::to_string(t) +
                            " is not a stored layer");
    }
    return static_cast<int>(k);
}

const std::vector<double>& FiniteHorizonSolution::layer_at_time(double t) const {
    return u[static_cast<std::size_t>(layer_index(t))];
}

double FiniteHorizonSolution::value(double t, double x) const {
    return grid.interp(layer_at_time(t), x);
}

FiniteHorizonSolution solve_finite_horizon(const SdeModel& model,
                                           const Driver& driver,
                                           const TerminalCondition& terminal,
                                           double T, const Grid1D& grid,
                                           double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw Error("need T > 0 and dt > 0");
    const auto s = make_stencil(model, grid);
    const int M = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double dt_eff = T / M;
    const double cfl = s.h / (s.max_drift + 1.0);
    if (dt_eff > cfl * (1.0 + 1e-12)) {
        throw CflViolated("dt=" + std::to_string(dt_eff) +
                          " exceeds the transport bound " + std::to_string(cfl));
    }
    const int n = grid.n_nodes;
    if (static_cast<std::size_t>(M + 1) * static_cast<std::size_t>(n) >
        40'000'000) {
        throw Error("layer storage too large; coarsen dt or the grid");
    }

    FiniteHorizonSolution sol;
    sol.model_name = model.name;
    sol.driver_name = driver.name;
    sol.terminal_name = terminal.name;
    sol.grid = grid;
    sol.times.resize(static_cast<std::size_t>(M) + 1);
    for (int m = 0; m <= M; ++m) sol.times[static_cast<std::size_t>(m)] = m * dt_eff;
    sol.u.assign(static_cast<std::size_t>(M) + 1, std::vector<double>(n));

    auto& top = sol.u[static_cast<std::size_t>(M)];
    for (int i = 0; i < n; ++i) top[static_cast<std::size_t>(i)] = terminal.g(s.x[i]);
    check_layer_finite(top, T);

    std::vector<double> lower, diag, upper;
    build_bands(s, dt_eff, 0.0, lower, diag, upper);

    std::vector<double> rhs(n), scratch;
    for (int m = M - 1; m >= 0; --m) {
        explicit_rhs(s, driver, sol.u[static_cast<std::size_t>(m) + 1], dt_eff, rhs);
        solve_tridiagonal(lower, diag, upper, rhs, scratch);
        sol.u[static_cast<std::size_t>(m)] = rhs;
        check_layer_finite(sol.u[static_cast<std::size_t>(m)], sol.times[static_cast<std::size_t>(m)]);
    }
    return sol;
}

StationarySolution solve_discounted(const SdeModel& model,
                                    const Driver& driver, double alpha,
                                    const Grid1D& grid, double tol,
                                    double max_pseudo_time) {
    if (!(alpha > 0.0)) throw Error("need alpha > 0");
    if (!(tol > 0.0)) throw Error("need tol > 0");
    const auto s = make_stencil(model, grid);
    const int n = grid.n_nodes;
    const double dtau = s.h / (s.max_drift + 1.0);
    if (max_pseudo_time <= 0.0) {
        // Relaxation error decays like exp(-alpha tau); budget a generous
        // multiple of the implied settling time.
        max_pseudo_time = (50.0 + 25.0 * std::log(1.0 / tol)) / alpha;
    }

    std::vector<double> lower, diag, upper;
    build_bands(s, dtau, alpha * dtau, lower, diag, upper);

    StationarySolution sol;
    sol.model_name = model.name;
    sol.driver_name = driver.name;
    sol.grid = grid;
    sol.alpha = alpha;
    sol.v.assign(static_cast<std::size_t>(n), 0.0);

    std::vector<double> rhs(n), scratch;
    double pseudo_time = 0.0;
    while (true) {
        explicit_rhs(s, driver, sol.v, dtau, rhs);
        solve_tridiagonal(lower, diag, upper, rhs, scratch);
        double update = 0.0;
        for (int i = 0; i < n; ++i) {
            update = std::max(update,
                              std::abs(rhs[static_cast<std::size_t>(i)] -
                                       sol.v[static_cast<std::size_t>(i)]));
        }
        sol.v.swap(rhs);
        ++sol.iterations;
        pseudo_time += dtau;
        sol.final_update_norm = update / dtau;
        check_layer_finite(sol.v, pseudo_time);
        if (sol.final_update_norm <= tol * alpha) break;
        if (pseudo_time > max_pseudo_time) {
            throw MaxPseudoTimeExceeded(
                "discounted relaxation at alpha=" + std::to_string(alpha) +
                " still moving after pseudo-time " +
                std::to_string(pseudo_time));
        }
    }
    return sol;
}

ResidualField ergodic_residual(const SdeModel& model, const Driver& driver,
                               const std::vector<double>& v, double lambda,
                               const Grid1D& grid) {
    const auto s = make_stencil(model, grid);
    const int n = grid.n_nodes;
    if (static_cast<int>(v.size()) != n) {
        throw Error("field size does not match grid");
    }
    ResidualField out;
    out.field.assign(static_cast<std::size_t>(n), 0.0);
    out.sup_residual = 0.0;
    for (int i = 1; i < n - 1; ++i) {
        const double d2 = (v[static_cast<std::size_t>(i) + 1] -
                           2.0 * v[static_cast<std::size_t>(i)] +
                           v[static_cast<std::size_t>(i) - 1]) /
                          (s.h * s.h);
        const double d1 = (v[static_cast<std::size_t>(i) + 1] -
                           v[static_cast<std::size_t>(i) - 1]) /
                          (2.0 * s.h);
        const double r = 0.5 * s.sigma[i] * s.sigma[i] * d2 +
                         s.drift[i] * d1 +
                         driver.psi(s.x[i], d1 * s.sigma[i]) - lambda;
        out.field[static_cast<std::size_t>(i)] = r;
        out.sup_residual = std::max(out.sup_residual, std::abs(r));
    }
    return out;
}

std::vector<double> extract_z(const std::vector<double>& v,
                              const SdeModel& model, const Grid1D& grid) {
    const int n = grid.n_nodes;
    if (static_cast<int>(v.size()) != n) {
        throw Error("field size does not match grid");
    }
    const double h = grid.h();
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double slope;
        if (i == 0) {
            slope = (v[1] - v[0]) / h;
        } else if (i == n - 1) {
            slope = (v[static_cast<std::size_t>(i)] -
                     v[static_cast<std::size_t>(i) - 1]) / h;
        } else {
            slope = (v[static_cast<std::size_t>(i) + 1] -
                     v[static_cast<std::size_t>(i) - 1]) / (2.0 * h);
        }
        z[static_cast<std::size_t>(i)] = slope * model.diffusion(grid.node(i));
    }
    return z;
}

}  // namespace ebsde
