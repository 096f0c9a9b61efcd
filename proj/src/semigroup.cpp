#include "ebsde/semigroup.hpp"

#include <cmath>
#include <vector>

#include "ebsde/errors.hpp"
#include "ebsde/parallel.hpp"
#include "ebsde/rng.hpp"
#include "ebsde/stats.hpp"

namespace ebsde {

namespace {
constexpr std::size_t kChunk = 4096;
}

SemigroupValue semigroup_apply(const SdeModel& model,
                               const std::function<double(double)>& phi,
                               double x, double t, double dt, int n_paths,
                               std::uint64_t seed, double guard_radius) {
    const int n_steps = steps_for(t, dt);
    const double dt_eff = t / n_steps;
    const double sqrt_dt = std::sqrt(dt_eff);

    const std::size_t n_chunks =
        (static_cast<std::size_t>(n_paths) + kChunk - 1) / kChunk;
    std::vector<stats::RunningMoments> partial(n_chunks);

    parallel::for_chunks(
        static_cast<std::size_t>(n_paths), kChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            for (std::size_t path = begin; path < end; ++path) {
                double s = x;
                for (int k = 0; k < n_steps; ++k) {
                    const double noise =
                        rng::normal_draw(seed, path,
                                         static_cast<std::uint64_t>(k), 0);
                    s += model.drift(s) * dt_eff +
                         model.diffusion(s) * sqrt_dt * noise;
                    if (!(std::abs(s) <= guard_radius)) {
                        throw BlowUp("path " + std::to_string(path) +
                                     " left the guard ball");
                    }
                }
                const double v = phi(s);
                if (!std::isfinite(v)) {
                    throw NonFiniteEvaluation(
                        "test function returned a non-finite value");
                }
                partial[chunk].add(v);
            }
        });

    stats::RunningMoments total;
    for (const auto& c : partial) total.merge(c);
    return {t, total.mean(), total.half_width_95(), n_paths};
}

LyapunovReport lyapunov_check(const SdeModel& model, double mu,
                              int n_samples) {
    if (mu < 2.0) throw GateViolated("drift condition needs mu >= 2");
    const double shrink = model.eta2 - 0.5 * (mu - 1.0) * model.r2;
    if (shrink <= 0.0) {
        throw GateViolated(
            "eta2 - (mu-1)/2 * r2 <= 0: no drift condition at this exponent");
    }

    LyapunovReport rep;
    rep.mu = mu;
    rep.R = std::sqrt((model.eta1 + 0.5 * (mu - 1.0) * model.r1) / shrink) + 1.0;
    rep.b = mu * model.eta1 + 0.5 * mu * (mu - 1.0) * model.r1;
    rep.a = mu * model.eta2 - 0.5 * mu * (mu - 1.0) * model.r2 -
            rep.b / (rep.R * rep.R);

    // Generator of |x|^mu-type observables; |x|^0 is taken as 1 at x = 0 so
    // the mu = 2 case reduces to 2 x drift + sigma^2.
    auto gen_V = [&](double x) {
        const double ax = std::abs(x);
        const double pow_m2 = mu == 2.0 ? 1.0 : std::pow(ax, mu - 2.0);
        const double s = model.diffusion(x);
        return mu * pow_m2 * (x * model.drift(x)) +
               0.5 * mu * (mu - 1.0) * pow_m2 * s * s;
    };

    rep.worst_residual = -1e300;
    const double hi = 3.0 * rep.R + 1.0;
    for (int i = 0; i < n_samples; ++i) {
        const double x = -hi + 2.0 * hi * i / (n_samples - 1);
        const double V = std::pow(std::abs(x), mu);
        const double indicator = std::abs(x) <= rep.R ? 1.0 : 0.0;
        const double residual = gen_V(x) + rep.a * V - rep.b * indicator;
        if (residual > rep.worst_residual) {
            rep.worst_residual = residual;
            rep.at_x = x;
        }
    }
    rep.ok = rep.worst_residual <= 1e-9;
    return rep;
}

ContractionFit contraction_fit(const SdeModel& model, double x0_a, double x0_b,
                               double T, double dt, int n_paths,
                               std::uint64_t seed, double guard_radius) {
    ContractionFit fit;
    fit.series = coupled_simulate(model, x0_a, x0_b, T, dt, n_paths, seed,
                                  guard_radius);

    std::vector<double> ts, logs;
    for (std::size_t k = 0; k < fit.series.times.size(); ++k) {
        const double gap = fit.series.mean_distance[k];
        if (gap > 3.0 * fit.series.half_width_95[k] && gap > 1e-300) {
            ts.push_back(fit.series.times[k]);
            logs.push_back(std::log(gap));
        }
    }
    fit.n_used = static_cast<int>(ts.size());
    if (fit.n_used < 4) {
        throw InsufficientSignal(
            "only " + std::to_string(fit.n_used) +
            " coupling gaps clear three half-widths; need at least 4");
    }
    const auto line = stats::fit_line(ts, logs);
    fit.nu_hat = -line.slope;
    fit.c_hat = std::exp(line.intercept);
    fit.r2 = line.r2;
    return fit;
}

ContractionFit contraction_fit(const SdeModel& model,
                               const std::function<double(double)>& phi,
                               double x0_a, double x0_b,
                               const std::vector<double>& t_grid, double dt,
                               int n_paths, std::uint64_t seed, double c_phi,
                               const DriftShift* shift, double guard_radius) {
    if (t_grid.size() < 4) {
        throw Error("need at least 4 probe times, got " +
                    std::to_string(t_grid.size()));
    }
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (t_grid[k] <= 0.0 || (k > 0 && t_grid[k] <= t_grid[k - 1])) {
            throw Error("probe times must be positive and increasing");
        }
    }
    if (n_paths < 2) throw Error("need at least 2 paths");
    if (c_phi <= 0.0) throw Error("c_phi must be positive");

    const double T = t_grid.back();
    const int n_steps = steps_for(T, dt);
    const double dt_eff = T / n_steps;
    const double sqrt_dt = std::sqrt(dt_eff);

    // Snap every probe time onto the step grid.
    std::vector<int> probe(t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        int idx = static_cast<int>(std::lround(t_grid[k] / dt_eff));
        probe[k] = std::min(std::max(idx, 1), n_steps);
    }

    const std::size_t n_chunks =
        (static_cast<std::size_t>(n_paths) + kChunk - 1) / kChunk;
    std::vector<std::vector<stats::RunningMoments>> partial(
        n_chunks, std::vector<stats::RunningMoments>(t_grid.size()));
    std::vector<std::vector<double>> partial_max(
        n_chunks, std::vector<double>(t_grid.size(), 0.0));

    parallel::for_chunks(
        static_cast<std::size_t>(n_paths), kChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            for (std::size_t path = begin; path < end; ++path) {
                double a = x0_a, b = x0_b;
                std::size_t next = 0;
                for (int k = 0; k < n_steps && next < probe.size(); ++k) {
                    const double t = k * dt_eff;
                    const double noise =
                        rng::normal_draw(seed, path,
                                         static_cast<std::uint64_t>(k), 0);
                    const double sa = shift ? shift->shift(t, a) : 0.0;
                    const double sb = shift ? shift->shift(t, b) : 0.0;
                    a += (model.drift(a) + sa) * dt_eff +
                         model.diffusion(a) * sqrt_dt * noise;
                    b += (model.drift(b) + sb) * dt_eff +
                         model.diffusion(b) * sqrt_dt * noise;
                    if (!(std::abs(a) <= guard_radius) ||
                        !(std::abs(b) <= guard_radius)) {
                        throw BlowUp("path " + std::to_string(path) +
                                     " left the guard ball");
                    }
                    while (next < probe.size() && probe[next] == k + 1) {
                        const double d = phi(a) - phi(b);
                        if (!std::isfinite(d)) {
                            throw NonFiniteEvaluation(
                                "test function returned a non-finite value");
                        }
                        partial[chunk][next].add(d);
                        partial_max[chunk][next] =
                            std::max(partial_max[chunk][next], std::abs(d));
                        ++next;
                    }
                }
            }
        });

    ContractionFit fit;
    fit.series.n_paths = n_paths;
    std::vector<double> ts, logs;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        stats::RunningMoments total;
        double worst = 0.0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            total.merge(partial[c][k]);
            worst = std::max(worst, partial_max[c][k]);
        }
        const double t = probe[k] * dt_eff;
        const double gap = std::abs(total.mean());
        const double hw = total.half_width_95();
        fit.series.times.push_back(t);
        fit.series.mean_distance.push_back(gap);
        fit.series.half_width_95.push_back(hw);
        fit.series.max_distance.push_back(worst);
        if (gap > 3.0 * hw && gap > 1e-300) {
            ts.push_back(t);
            logs.push_back(std::log(gap));
        }
    }
    fit.n_used = static_cast<int>(ts.size());
    if (fit.n_used < 4) {
        throw InsufficientSignal(
            "only " + std::to_string(fit.n_used) +
            " observable gaps clear three half-widths; need at least 4");
    }
    const auto line = stats::fit_line(ts, logs);
    fit.nu_hat = -line.slope;
    fit.c_hat = std::exp(line.intercept) /
                (c_phi * (1.0 + x0_a * x0_a + x0_b * x0_b));
    fit.r2 = line.r2;
    return fit;
}

}  // namespace ebsde
