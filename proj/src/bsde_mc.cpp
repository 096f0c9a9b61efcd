#include "ebsde/bsde_mc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ebsde/errors.hpp"
#include "ebsde/rng.hpp"
#include "ebsde/sde.hpp"
#include "ebsde/stats.hpp"

namespace ebsde {

namespace {

int bin_of(const RegressionBasis& b, double x) {
    const double w = (b.hi - b.lo) / b.size;
    int i = static_cast<int>(std::floor((x - b.lo) / w));
    return std::clamp(i, 0, b.size - 1);
}

// Fitted conditional expectations of next-step value and of the increment
// projection, evaluated at arbitrary points of the current layer.
class LayerFit {
  public:
    LayerFit(const RegressionBasis& basis, const double* x, const double* y,
             const double* ydw_over_dt, int n, long& clipped)
        : basis_(basis) {
        if (basis.kind == RegressionBasis::Kind::polynomial) {
            set_layer_window(x, n);
            fit_polynomial(x, y, ydw_over_dt, n, clipped);
        } else {
            fit_bins(x, y, ydw_over_dt, n);
        }
    }

    double ce(double x, long& clipped) const { return eval(false, x, clipped); }
    double z(double x, long& clipped) const { return eval(true, x, clipped); }

  private:
    // Early layers cluster tightly around the start point; mapping the
    // sample range (inside the declared box) onto [-1, 1] keeps the normal
    // equations well conditioned at every layer.
    void set_layer_window(const double* x, int n) {
        double lo = basis_.hi, hi = basis_.lo;
        for (int p = 0; p < n; ++p) {
            const double xc = std::clamp(x[p], basis_.lo, basis_.hi);
            lo = std::min(lo, xc);
            hi = std::max(hi, xc);
        }
        if (!(hi - lo > 1e-8)) {
            const double mid = 0.5 * (lo + hi);
            lo = mid - 1e-8;
            hi = mid + 1e-8;
        }
        map_lo_ = lo;
        map_hi_ = hi;
    }

    // Chebyshev values on the layer window; excursions past the declared
    // box are clamped and counted.
    void cheb(double x, double* out, long& clipped) const {
        if (x < basis_.lo || x > basis_.hi) ++clipped;
        const double xc = std::clamp(x, map_lo_, map_hi_);
        const double xi = 2.0 * (xc - map_lo_) / (map_hi_ - map_lo_) - 1.0;
        out[0] = 1.0;
        if (basis_.size > 1) out[1] = xi;
        for (int j = 2; j < basis_.size; ++j) {
            out[j] = 2.0 * xi * out[j - 1] - out[j - 2];
        }
    }

    void fit_polynomial(const double* x, const double* y,
                        const double* ydw, int n, long& clipped) {
        const int B = basis_.size;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(B, B);
        Eigen::VectorXd rhs_ce = Eigen::VectorXd::Zero(B);
        Eigen::VectorXd rhs_z = Eigen::VectorXd::Zero(B);
        std::vector<double> phi(static_cast<std::size_t>(B));
        for (int p = 0; p < n; ++p) {
            cheb(x[p], phi.data(), clipped);
            for (int i = 0; i < B; ++i) {
                for (int j = i; j < B; ++j) A(i, j) += phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)];
                rhs_ce(i) += phi[static_cast<std::size_t>(i)] * y[p];
                rhs_z(i) += phi[static_cast<std::size_t>(i)] * ydw[p];
            }
        }
        A = A.selfadjointView<Eigen::Upper>();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(1e-10);
        if (lu.rank() < B) {
            throw SingularRegression(
                "regression normal equations are rank deficient (" +
                std::to_string(lu.rank()) + " of " + std::to_string(B) + ")");
        }
        coef_ce_ = lu.solve(rhs_ce);
        coef_z_ = lu.solve(rhs_z);
    }

    void fit_bins(const double* x, const double* y, const double* ydw, int n) {
        const int B = basis_.size;
        bin_ce_.assign(static_cast<std::size_t>(B), 0.0);
        bin_z_.assign(static_cast<std::size_t>(B), 0.0);
        std::vector<long> count(static_cast<std::size_t>(B), 0);
        for (int p = 0; p < n; ++p) {
            const int b = bin_of(basis_, x[p]);
            bin_ce_[static_cast<std::size_t>(b)] += y[p];
            bin_z_[static_cast<std::size_t>(b)] += ydw[p];
            ++count[static_cast<std::size_t>(b)];
        }
        int first_filled = -1;
        int last_filled = -1;
        for (int b = 0; b < B; ++b) {
            const auto c = count[static_cast<std::size_t>(b)];
            if (c > 0) {
                bin_ce_[static_cast<std::size_t>(b)] /= static_cast<double>(c);
                bin_z_[static_cast<std::size_t>(b)] /= static_cast<double>(c);
                if (first_filled < 0) first_filled = b;
                last_filled = b;
            } else if (last_filled >= 0) {
                bin_ce_[static_cast<std::size_t>(b)] = bin_ce_[static_cast<std::size_t>(last_filled)];
                bin_z_[static_cast<std::size_t>(b)] = bin_z_[static_cast<std::size_t>(last_filled)];
            }
        }
        if (first_filled < 0) {
            throw SingularRegression("no populated bins in regression layer");
        }
        for (int b = 0; b < first_filled; ++b) {
            bin_ce_[static_cast<std::size_t>(b)] = bin_ce_[static_cast<std::size_t>(first_filled)];
            bin_z_[static_cast<std::size_t>(b)] = bin_z_[static_cast<std::size_t>(first_filled)];
        }
    }

    double eval(bool want_z, double x, long& clipped) const {
        if (basis_.kind == RegressionBasis::Kind::local_bins) {
            const auto& tab = want_z ? bin_z_ : bin_ce_;
            return tab[static_cast<std::size_t>(bin_of(basis_, x))];
        }
        const Eigen::VectorXd& coef = want_z ? coef_z_ : coef_ce_;
        std::vector<double> phi(static_cast<std::size_t>(basis_.size));
        cheb(x, phi.data(), clipped);
        double v = 0.0;
        for (int j = 0; j < basis_.size; ++j) v += coef(j) * phi[static_cast<std::size_t>(j)];
        return v;
    }

    const RegressionBasis basis_;
    double map_lo_ = -1.0, map_hi_ = 1.0;
    Eigen::VectorXd coef_ce_, coef_z_;
    std::vector<double> bin_ce_, bin_z_;
};

struct BackwardOptions {
    double alpha = 0.0;           // discount; 0 for the plain equation
    // Layers whose raw increment projections Y_{k+1} dW_k / dt to keep; the
    // per-path samples are unbiased for Z up to O(dt), unlike the smoothed
    // regression values, so binned means carry honest confidence widths.
    const std::vector<int>* z_layers = nullptr;
};

struct BackwardOutput {
    double y0 = 0.0;
    double y0_ci = 0.0;
    double clip_fraction = 0.0;
    std::vector<double> z_abs_mean;                 // one per step layer
    std::vector<std::vector<double>> z_kept;        // raw samples per request
};

BackwardOutput backward_pass(const Driver& driver,
                             const std::function<double(double)>& g,
                             const PathEnsemble& ens,
                             const RegressionBasis& basis,
                             const BackwardOptions& opt) {
    const int N = ens.n_steps();
    const int n = ens.n_paths;
    const double dt = ens.times[1] - ens.times[0];
    const double sqrt_dt = std::sqrt(dt);
    const double divisor = 1.0 + opt.alpha * dt;

    std::vector<double> y(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) y[static_cast<std::size_t>(p)] = g(ens.state(p, N));

    BackwardOutput out;
    out.z_abs_mean.assign(static_cast<std::size_t>(N), 0.0);
    if (opt.z_layers) out.z_kept.resize(opt.z_layers->size());

    long clipped = 0;
    long evals = 0;
    std::vector<double> xk(static_cast<std::size_t>(n)), ydw(static_cast<std::size_t>(n));

    for (int k = N - 1; k >= 0; --k) {
        for (int p = 0; p < n; ++p) {
            xk[static_cast<std::size_t>(p)] = ens.state(p, k);
            const double dw = sqrt_dt * rng::normal_draw(
                ens.seed, static_cast<std::uint64_t>(p),
                static_cast<std::uint64_t>(k), 0);
            ydw[static_cast<std::size_t>(p)] = y[static_cast<std::size_t>(p)] * dw / dt;
        }
        evals += 2L * n;

        if (k == 0) {
            // Every path sits at x0: conditional means are plain means.
            stats::RunningMoments my, mz;
            for (int p = 0; p < n; ++p) {
                my.add(y[static_cast<std::size_t>(p)]);
                mz.add(ydw[static_cast<std::size_t>(p)]);
            }
            const double z0 = mz.mean();
            out.y0 = (my.mean() + dt * driver.psi(xk[0], z0)) / divisor;
            out.y0_ci = my.half_width_95() / divisor;
            out.z_abs_mean[0] = std::abs(z0);
        } else {
            LayerFit fit(basis, xk.data(), y.data(), ydw.data(), n, clipped);
            stats::RunningMoments mz;
            for (int p = 0; p < n; ++p) {
                const double x = xk[static_cast<std::size_t>(p)];
                const double zp = fit.z(x, clipped);
                const double cep = fit.ce(x, clipped);
                y[static_cast<std::size_t>(p)] = (cep + dt * driver.psi(x, zp)) / divisor;
                mz.add(std::abs(zp));
            }
            out.z_abs_mean[static_cast<std::size_t>(k)] = mz.mean();
        }

        if (opt.z_layers) {
            for (std::size_t i = 0; i < opt.z_layers->size(); ++i) {
                if ((*opt.z_layers)[i] == k) out.z_kept[i] = ydw;
            }
        }
        for (int p = 0; p < n; ++p) {
            if (!std::isfinite(y[static_cast<std::size_t>(p)])) {
                throw NonFiniteLayer("regression layer " + std::to_string(k) +
                                     " produced a non-finite value");
            }
        }
    }
    out.clip_fraction =
        evals > 0 ? static_cast<double>(clipped) / static_cast<double>(evals)
                  : 0.0;
    return out;
}

}  // namespace

RegressionBasis RegressionBasis::polynomial(int degree, double lo, double hi) {
    if (degree < 0 || !(hi > lo)) throw Error("need degree >= 0 and hi > lo for a polynomial basis");
    return {Kind::polynomial, degree + 1, lo, hi};
}

RegressionBasis RegressionBasis::local_bins(int bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw Error("need bins >= 1 and hi > lo for a bin basis");
    return {Kind::local_bins, bins, lo, hi};
}

BsdeMcSolution solve_finite_mc(const SdeModel& model, const Driver& driver,
                               const TerminalCondition& terminal, double x0,
                               double T, double dt, int n_paths,
                               const RegressionBasis& basis,
                               std::uint64_t seed) {
    const auto ens = simulate(model, x0, T, dt, n_paths, seed);
    const auto res = backward_pass(driver, terminal.g, ens, basis, {});

    BsdeMcSolution sol;
    sol.model_name = model.name;
    sol.driver_name = driver.name;
    sol.y0 = res.y0;
    sol.y0_half_width_95 = res.y0_ci;
    sol.T = T;
    sol.dt = ens.times[1] - ens.times[0];
    sol.n_paths = n_paths;
    sol.seed = seed;
    sol.clip_fraction = res.clip_fraction;
    sol.z_abs_mean = res.z_abs_mean;
    return sol;
}

DiscountedMcResult solve_discounted_mc(const SdeModel& model,
                                       const Driver& driver, double alpha,
                                       double x0, double tol, double dt,
                                       int n_paths,
                                       const RegressionBasis& basis,
                                       std::uint64_t seed, double c_pilot) {
    if (!(alpha > 0.0) || !(tol > 0.0) || !(c_pilot > 0.0)) {
        throw Error("discounted solve needs alpha, tol, c_pilot > 0");
    }
    // Truncation so the discounted tail beyond T stays under tol.
    const double T = std::max(1.0 / alpha,
                              std::log(c_pilot / (alpha * tol)) / alpha);
    const auto ens = simulate(model, x0, T, dt, n_paths, seed);
    BackwardOptions opt;
    opt.alpha = alpha;
    const auto res = backward_pass(
        driver, [](double) { return 0.0; }, ens, basis, opt);
    return {res.y0, res.y0_ci, T, alpha};
}

ZDiscrepancyReport z_representation_check(const SdeModel& model,
                                          const Driver& driver,
                                          const TerminalCondition& terminal,
                                          double x0, double T, double dt,
                                          int n_paths,
                                          const RegressionBasis& basis,
                                          const FiniteHorizonSolution& pde,
                                          int n_bins, std::uint64_t seed,
                                          int min_bin_count) {
    const auto ens = simulate(model, x0, T, dt, n_paths, seed);
    const int N = ens.n_steps();
    std::vector<int> layers;
    for (double f : {0.25, 0.5, 0.75}) {
        const int k = std::clamp(static_cast<int>(std::lround(f * N)), 1, N - 1);
        if (layers.empty() || layers.back() != k) layers.push_back(k);
    }
    BackwardOptions opt;
    opt.z_layers = &layers;
    const auto res = backward_pass(driver, terminal.g, ens, basis, opt);

    ZDiscrepancyReport rep;
    const double lo = pde.grid.x_min;
    const double hi = pde.grid.x_max;
    const double w = (hi - lo) / n_bins;
    const double dt_eff = ens.times[1] - ens.times[0];
    const double pde_dt = pde.times[1] - pde.times[0];

    for (std::size_t li = 0; li < layers.size(); ++li) {
        const int k = layers[li];
        const double t = k * dt_eff;
        // Nearest stored PDE layer; mismatch is at most half a PDE step.
        const long pl = std::clamp<long>(std::lround(t / pde_dt), 0,
                                         static_cast<long>(pde.times.size()) - 1);
        const auto z_field = extract_z(pde.u[static_cast<std::size_t>(pl)],
                                       model, pde.grid);

        std::vector<stats::RunningMoments> bins(static_cast<std::size_t>(n_bins));
        for (int p = 0; p < n_paths; ++p) {
            const double x = ens.state(p, k);
            if (x < lo || x > hi) continue;
            int b = std::clamp(static_cast<int>((x - lo) / w), 0, n_bins - 1);
            bins[static_cast<std::size_t>(b)].add(res.z_kept[li][static_cast<std::size_t>(p)]);
        }
        for (int b = 0; b < n_bins; ++b) {
            const auto& acc = bins[static_cast<std::size_t>(b)];
            if (static_cast<int>(acc.count()) < min_bin_count) {
                ++rep.dropped_bins;
                continue;
            }
            ZBinRow row;
            row.t = t;
            row.bin_center = lo + (b + 0.5) * w;
            row.z_mc = acc.mean();
            row.z_pde = pde.grid.interp(z_field, row.bin_center);
            row.half_width_95 = acc.half_width_95();
            row.count = static_cast<int>(acc.count());
            rep.rows.push_back(row);
            rep.sup_discrepancy = std::max(rep.sup_discrepancy,
                                           std::abs(row.z_mc - row.z_pde));
        }
    }
    return rep;
}

}  // namespace ebsde
