#include "ebsde/sde.hpp"

#include <cmath>
#include <stdexcept>

#include "ebsde/errors.hpp"
#include "ebsde/parallel.hpp"
#include "ebsde/rng.hpp"
#include "ebsde/stats.hpp"

namespace ebsde {

namespace {

constexpr std::size_t kChunk = 4096;

void check_grid_args(double T, double dt, int n_paths) {
    if (!(T > 0.0) || !(dt > 0.0)) {
        throw Error("simulation requires T > 0 and dt > 0");
    }
    if (n_paths <= 0) throw Error("simulation requires n_paths > 0");
}

[[noreturn]] void blow_up(int path, double t, double x) {
    throw BlowUp("path " + std::to_string(path) + " left the guard ball at t=" +
                 std::to_string(t) + " (x=" + std::to_string(x) + ")");
}

// Evolves one path, invoking on_state(step, t, x) for every stored state
// including step 0.  Noise is addressed by (seed, path, step, 0), so any
// sub-range of paths reproduces exactly.
template <class F>
void run_path(const SdeModel& model, double x0, int n_steps, double dt,
              int path, std::uint64_t seed, const DriftShift* shift,
              double guard, F&& on_state) {
    const double sqrt_dt = std::sqrt(dt);
    double x = x0;
    on_state(0, 0.0, x);
    for (int k = 0; k < n_steps; ++k) {
        const double t = k * dt;
        double drift = model.drift(x);
        if (shift) drift += shift->shift(t, x);
        const double noise = rng::normal_draw(
            seed, static_cast<std::uint64_t>(path),
            static_cast<std::uint64_t>(k), 0);
        x += drift * dt + model.diffusion(x) * sqrt_dt * noise;
        if (!(std::abs(x) <= guard)) blow_up(path, t + dt, x);
        on_state(k + 1, t + dt, x);
    }
}

std::vector<int> snapshot_indices(const std::vector<double>& wanted,
                                  int n_steps, double dt) {
    std::vector<int> idx;
    idx.reserve(wanted.size());
    for (double t : wanted) {
        const double k_real = t / dt;
        const int k = static_cast<int>(std::llround(k_real));
        if (k < 0 || k > n_steps ||
            std::abs(k_real - k) > 1e-9 * std::max(1.0, k_real)) {
            throw TimeNotOnGrid("time " + std::to_string(t) +
                                " is not a multiple of dt=" + std::to_string(dt));
        }
        idx.push_back(k);
    }
    return idx;
}

}  // namespace

int steps_for(double T, double dt) {
    const int m = static_cast<int>(std::ceil(T / dt - 1e-9));
    return m < 1 ? 1 : m;
}

int PathEnsemble::step_index(double t) const {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (std::abs(times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
            return static_cast<int>(k);
        }
    }
    throw TimeNotOnGrid("time " + std::to_string(t) +
                        " is not on the stored grid");
}

PathEnsemble simulate(const SdeModel& model, double x0, double T, double dt,
                      int n_paths, std::uint64_t seed, const DriftShift* shift,
                      double guard_radius) {
    check_grid_args(T, dt, n_paths);
    const int n_steps = steps_for(T, dt);
    const double dt_eff = T / n_steps;
    const std::size_t n_states =
        static_cast<std::size_t>(n_paths) * (static_cast<std::size_t>(n_steps) + 1);
    if (n_states > 40'000'000) {
        throw Error("ensemble of " + std::to_string(n_states) +
                    " states is too large to materialise; "
                    "use a streaming estimator");
    }

    PathEnsemble out;
    out.model_name = model.name;
    out.shift_name = shift ? shift->name : "";
    out.seed = seed;
    out.n_paths = n_paths;
    out.times.resize(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 0; k <= n_steps; ++k) out.times[static_cast<std::size_t>(k)] = k * dt_eff;
    out.states.resize(n_states);

    parallel::for_chunks(
        static_cast<std::size_t>(n_paths), kChunk,
        [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                double* row = out.states.data() + p * (static_cast<std::size_t>(n_steps) + 1);
                run_path(model, x0, n_steps, dt_eff, static_cast<int>(p), seed,
                         shift, guard_radius,
                         [row](int k, double, double x) { row[k] = x; });
            }
        });
    return out;
}

MomentEstimate moment(const PathEnsemble& ensemble, double p, double t) {
    const int k = ensemble.step_index(t);
    stats::RunningMoments acc;
    for (int path = 0; path < ensemble.n_paths; ++path) {
        acc.add(std::pow(std::abs(ensemble.state(path, k)), p));
    }
    return {p, ensemble.times[static_cast<std::size_t>(k)], acc.mean(),
            acc.half_width_95(), ensemble.n_paths};
}

std::vector<MomentEstimate> moment_sweep(const SdeModel& model, double x0,
                                         double T, double dt, int n_paths,
                                         std::uint64_t seed, double p,
                                         const std::vector<double>& times,
                                         const DriftShift* shift,
                                         double guard_radius) {
    check_grid_args(T, dt, n_paths);
    const int n_steps = steps_for(T, dt);
    const double dt_eff = T / n_steps;
    const auto snaps = snapshot_indices(times, n_steps, dt_eff);

    // step index -> position in the requested list (last wins on duplicates)
    std::vector<int> slot(static_cast<std::size_t>(n_steps) + 1, -1);
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        slot[static_cast<std::size_t>(snaps[i])] = static_cast<int>(i);
    }

    const std::size_t n_chunks =
        (static_cast<std::size_t>(n_paths) + kChunk - 1) / kChunk;
    std::vector<std::vector<stats::RunningMoments>> partial(
        n_chunks, std::vector<stats::RunningMoments>(times.size()));

    parallel::for_chunks(
        static_cast<std::size_t>(n_paths), kChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            auto& acc = partial[chunk];
            for (std::size_t path = begin; path < end; ++path) {
                run_path(model, x0, n_steps, dt_eff, static_cast<int>(path),
                         seed, shift, guard_radius,
                         [&](int k, double, double x) {
                             const int s = slot[static_cast<std::size_t>(k)];
                             if (s >= 0) {
                                 acc[static_cast<std::size_t>(s)].add(
                                     std::pow(std::abs(x), p));
                             }
                         });
            }
        });

    std::vector<MomentEstimate> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        stats::RunningMoments total;
        for (std::size_t c = 0; c < n_chunks; ++c) total.merge(partial[c][i]);
        out[i] = {p, snaps[i] * dt_eff, total.mean(), total.half_width_95(),
                  n_paths};
    }
    return out;
}

CouplingSeries coupled_simulate(const SdeModel& model, double x0_a,
                                double x0_b, double T, double dt, int n_paths,
                                std::uint64_t seed, double guard_radius) {
    check_grid_args(T, dt, n_paths);
    const int n_steps = steps_for(T, dt);
    const double dt_eff = T / n_steps;
    const double sqrt_dt = std::sqrt(dt_eff);

    const std::size_t n_chunks =
        (static_cast<std::size_t>(n_paths) + kChunk - 1) / kChunk;
    std::vector<std::vector<stats::RunningMoments>> partial(
        n_chunks,
        std::vector<stats::RunningMoments>(static_cast<std::size_t>(n_steps) + 1));
    std::vector<std::vector<double>> partial_max(
        n_chunks, std::vector<double>(static_cast<std::size_t>(n_steps) + 1, 0.0));

    parallel::for_chunks(
        static_cast<std::size_t>(n_paths), kChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            auto& acc = partial[chunk];
            auto& mx = partial_max[chunk];
            for (std::size_t path = begin; path < end; ++path) {
                double a = x0_a, b = x0_b;
                acc[0].add(std::abs(a - b));
                mx[0] = std::max(mx[0], std::abs(a - b));
                for (int k = 0; k < n_steps; ++k) {
                    const double noise = rng::normal_draw(
                        seed, static_cast<std::uint64_t>(path),
                        static_cast<std::uint64_t>(k), 0);
                    a += model.drift(a) * dt_eff +
                         model.diffusion(a) * sqrt_dt * noise;
                    b += model.drift(b) * dt_eff +
                         model.diffusion(b) * sqrt_dt * noise;
                    if (!(std::abs(a) <= guard_radius)) {
                        blow_up(static_cast<int>(path), (k + 1) * dt_eff, a);
                    }
                    if (!(std::abs(b) <= guard_radius)) {
                        blow_up(static_cast<int>(path), (k + 1) * dt_eff, b);
                    }
                    const double d = std::abs(a - b);
                    acc[static_cast<std::size_t>(k) + 1].add(d);
                    mx[static_cast<std::size_t>(k) + 1] =
                        std::max(mx[static_cast<std::size_t>(k) + 1], d);
                }
            }
        });

    CouplingSeries out;
    out.n_paths = n_paths;
    out.times.resize(static_cast<std::size_t>(n_steps) + 1);
    out.mean_distance.resize(out.times.size());
    out.half_width_95.resize(out.times.size());
    out.max_distance.resize(out.times.size());
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        out.times[k] = static_cast<double>(k) * dt_eff;
        stats::RunningMoments total;
        double mx = 0.0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            total.merge(partial[c][k]);
            mx = std::max(mx, partial_max[c][k]);
        }
        out.mean_distance[k] = total.mean();
        out.half_width_95[k] = total.half_width_95();
        out.max_distance[k] = mx;
    }
    return out;
}

HitFraction hitting_fraction(const SdeModel& model, double x0, double target,
                             double radius, double t, double dt, int n_paths,
                             std::uint64_t seed, double guard_radius) {
    check_grid_args(t, dt, n_paths);
    const int n_steps = steps_for(t, dt);
    const double dt_eff = t / n_steps;

    const std::size_t n_chunks =
        (static_cast<std::size_t>(n_paths) + kChunk - 1) / kChunk;
    std::vector<stats::RunningMoments> partial(n_chunks);

    parallel::for_chunks(
        static_cast<std::size_t>(n_paths), kChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            for (std::size_t path = begin; path < end; ++path) {
                double last = x0;
                run_path(model, x0, n_steps, dt_eff, static_cast<int>(path),
                         seed, nullptr, guard_radius,
                         [&last](int, double, double x) { last = x; });
                partial[chunk].add(std::abs(last - target) < radius ? 1.0 : 0.0);
            }
        });

    stats::RunningMoments total;
    for (const auto& c : partial) total.merge(c);
    return {total.mean(), total.half_width_95(), n_paths};
}

}  // namespace ebsde
