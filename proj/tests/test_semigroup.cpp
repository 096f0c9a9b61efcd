#include <doctest.h>

#include <cmath>

#include "ebsde/errors.hpp"
#include "ebsde/model.hpp"
#include "ebsde/semigroup.hpp"

using namespace ebsde;

TEST_SUITE("semigroup") {

TEST_CASE("constants are preserved exactly") {
    const SdeModel ou = catalog_model("ou");
    const SemigroupValue v = semigroup_apply(
        ou, [](double) { return 1.0; }, 2.0, 1.0, 0.1, 200, 1);
    CHECK(v.value == 1.0);
    CHECK(v.half_width_95 == 0.0);
    CHECK(v.n_paths == 200);
}

TEST_CASE("ou propagates cos to its Gaussian average") {
    // E[cos X_5 | X_0=0] = exp(-Var_5/2) with Var_5 = (1-e^-10)/2; frozen
    // reference 0.77880962249678098. Allowance covers the O(dt) variance
    // bias of the Euler chain on top of the Monte Carlo band.
    const SdeModel ou = catalog_model("ou");
    const SemigroupValue v = semigroup_apply(
        ou, [](double x) { return std::cos(x); }, 0.0, 5.0, 0.01, 40000, 2);
    CHECK(std::abs(v.value - 0.77880962249678098) <=
          3.0 * v.half_width_95 + 2e-3);
}

TEST_CASE("non-finite test functions are rejected") {
    const SdeModel ou = catalog_model("ou");
    CHECK_THROWS_AS(semigroup_apply(
                        ou, [](double x) { return std::log(x - 100.0); }, 0.0,
                        0.5, 0.05, 50, 1),
                    NonFiniteEvaluation);
}

TEST_CASE("drift condition constants for the linear model") {
    const LyapunovReport rep = lyapunov_check(catalog_model("ou"), 2.0);
    CHECK(rep.R == doctest::Approx(1.70710678118655).epsilon(1e-12));
    CHECK(rep.a == doctest::Approx(1.65685424949238).epsilon(1e-12));
    CHECK(rep.b == 1.0);
    CHECK(rep.worst_residual <= 1e-9);
    CHECK(rep.ok);
}

TEST_CASE("drift condition constants for the weakly dissipative model") {
    const LyapunovReport rep = lyapunov_check(catalog_model("weakdiss"), 2.0);
    CHECK(rep.R == doctest::Approx(2.4213381090374).epsilon(1e-12));
    CHECK(rep.a == doctest::Approx(0.648870623145019).epsilon(1e-12));
    CHECK(rep.b == 2.0);
    CHECK(rep.worst_residual <= 1e-9);
    CHECK(rep.ok);
}

TEST_CASE("higher exponents follow the same constant formulas") {
    const LyapunovReport rep = lyapunov_check(catalog_model("ou"), 4.0);
    CHECK(rep.b == 6.0);
    CHECK(rep.R == doctest::Approx(std::sqrt(1.5) + 1.0).epsilon(1e-12));
    CHECK(rep.a ==
          doctest::Approx(4.0 - 6.0 / (rep.R * rep.R)).epsilon(1e-12));
}

TEST_CASE("exponents past the diffusion budget are refused") {
    // eta2 - (mu-1)/2 * r2 hits zero at mu = 101 for the weakdiss constants.
    CHECK_THROWS_AS(lyapunov_check(catalog_model("weakdiss"), 101.0),
                    GateViolated);
    CHECK_THROWS_AS(lyapunov_check(catalog_model("ou"), 1.5), GateViolated);
}

TEST_CASE("coupling fit recovers the linear contraction rate") {
    // The ou coupling is deterministic, d_k = d_0 (1 - dt)^k, so the log-gap
    // regression is an essentially perfect line with slope -> -1 as dt -> 0.
    const ContractionFit fit =
        contraction_fit(catalog_model("ou"), 2.0, -1.0, 3.0, 0.01, 2000, 3);
    CHECK(fit.n_used >= 250);
    CHECK(fit.nu_hat == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.c_hat == doctest::Approx(3.0).epsilon(0.05));
    CHECK(fit.r2 > 0.999999);
}

TEST_CASE("coupling fit sees exponential decay off the linear model") {
    const ContractionFit fit = contraction_fit(catalog_model("weakdiss"), 2.0,
                                               -1.0, 6.0, 0.01, 4000, 4);
    CHECK(fit.nu_hat > 0.5);
    CHECK(fit.r2 > 0.9);
}

TEST_CASE("identical starting points leave nothing to fit") {
    CHECK_THROWS_AS(
        contraction_fit(catalog_model("ou"), 1.0, 1.0, 2.0, 0.01, 500, 5),
        InsufficientSignal);
}

TEST_CASE("observable gap fit is exact for the identity on ou") {
    // phi = id makes the per-path gap deterministic: the shared noise cancels
    // and phi(X_t) - phi(Y_t) = (x - y)(1 - dt)^k for every path, so the
    // half-widths vanish, every probe survives, and the rate is recovered.
    const std::vector<double> ts = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    const ContractionFit fit =
        contraction_fit(catalog_model("ou"), [](double x) { return x; }, 1.0,
                        -1.0, ts, 0.01, 64, 6);
    CHECK(fit.n_used == 6);
    CHECK(fit.nu_hat == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.r2 > 0.999999);
    // intercept ~ 2, weight 1 + 1 + 1
    CHECK(fit.c_hat == doctest::Approx(2.0 / 3.0).epsilon(0.05));
    for (double hw : fit.series.half_width_95) CHECK(hw <= 1e-12);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        CHECK(fit.series.times[k] == doctest::Approx(ts[k]).epsilon(1e-12));
        CHECK(fit.series.mean_distance[k] ==
              doctest::Approx(2.0 * std::pow(0.99, 100.0 * ts[k]))
                  .epsilon(1e-9));
    }
}

TEST_CASE("observable gap fit decays for a bounded test function") {
    const auto model = catalog_model("weakdiss");
    const std::vector<double> ts = {1, 2, 3, 4, 5, 6, 7, 8};
    const ContractionFit fit = contraction_fit(
        model, [](double x) { return std::cos(x); }, 2.0, -2.0, ts, 0.02,
        20000, 7);
    CHECK(fit.nu_hat > 0.0);
    CHECK(fit.r2 >= 0.9);
    CHECK(fit.n_used >= 4);
    // Every surviving probe sits near the fitted envelope.
    const double weight = 1.0 + 4.0 + 4.0;
    for (std::size_t k = 0; k < fit.series.times.size(); ++k) {
        const double gap = fit.series.mean_distance[k];
        if (gap <= 3.0 * fit.series.half_width_95[k]) continue;
        const double pred =
            fit.c_hat * weight * std::exp(-fit.nu_hat * fit.series.times[k]);
        CHECK(gap <= 4.0 * pred);
        CHECK(gap >= pred / 4.0);
    }
}

TEST_CASE("bounded drift shifts do not destroy the observable decay") {
    const auto model = catalog_model("weakdiss");
    const std::vector<double> ts = {1, 2, 3, 4, 5, 6};
    const DriftShift rho{"wiggle",
                         [](double t, double x) {
                             return 0.1 * std::cos(t + x);
                         },
                         0.1};
    const ContractionFit base = contraction_fit(
        model, [](double x) { return std::cos(x); }, 2.0, -2.0, ts, 0.02,
        20000, 8);
    const ContractionFit shifted = contraction_fit(
        model, [](double x) { return std::cos(x); }, 2.0, -2.0, ts, 0.02,
        20000, 8, 1.0, &rho);
    CHECK(shifted.nu_hat > 0.0);
    CHECK(std::abs(shifted.nu_hat - base.nu_hat) < 0.75);
}

TEST_CASE("observable gap fit validates its probe grid") {
    const auto model = catalog_model("ou");
    const auto id = [](double x) { return x; };
    CHECK_THROWS_AS(
        contraction_fit(model, id, 1.0, -1.0, {1.0, 2.0, 3.0}, 0.01, 100, 9),
        Error);
    CHECK_THROWS_AS(contraction_fit(model, id, 1.0, -1.0, {1.0, 2.0, 2.0, 3.0},
                                    0.01, 100, 9),
                    Error);
    CHECK_THROWS_AS(contraction_fit(model, id, 1.0, -1.0,
                                    {-1.0, 1.0, 2.0, 3.0}, 0.01, 100, 9),
                    Error);
    CHECK_THROWS_AS(
        contraction_fit(model, id, 1.0, 1.0, {1.0, 2.0, 3.0, 4.0}, 0.01, 100,
                        9),
        InsufficientSignal);
}

}  // TEST_SUITE
