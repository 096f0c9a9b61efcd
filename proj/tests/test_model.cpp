#include <doctest.h>

#include <cmath>

#include "ebsde/errors.hpp"
#include "ebsde/model.hpp"

using namespace ebsde;

TEST_SUITE("model") {

TEST_CASE("ou catalog exposes the linear model and its constants") {
    const SdeModel m = catalog_model("ou");
    CHECK(m.drift(2.0) == -2.0);
    CHECK(m.drift(-0.5) == 0.5);
    CHECK(m.diffusion(123.0) == 1.0);
    CHECK(m.eta1 == 0.0);
    CHECK(m.eta2 == 1.0);
    CHECK(m.r1 == 1.0);
    CHECK(m.r2 == 0.0);
    CHECK(m.sigma_inv_bound == 1.0);

    const SdeModel c = catalog_model("ou", {{"eta", 2.0}, {"sigma", 0.5}});
    CHECK(c.drift(3.0) == -6.0);
    CHECK(c.diffusion(0.0) == 0.5);
    CHECK(c.eta2 == 2.0);
    CHECK(c.r1 == 0.25);
    CHECK(c.sigma_inv_bound == 2.0);

    CHECK_THROWS_AS(catalog_model("ou", {{"eta", -1.0}}), MissingParam);
}

TEST_CASE("weakdiss catalog satisfies every declared bound") {
    const SdeModel m = catalog_model("weakdiss");
    const Driver d = catalog_driver("cos");
    const GateReport rep = validate(m, d);
    REQUIRE(rep.samples.size() == 6);
    for (const auto& s : rep.samples) {
        INFO(s.name, " worst residual ", s.worst_residual, " at x=", s.at_x);
        CHECK(s.worst_residual <= 1e-9);
    }
    CHECK(rep.assumptions_ok);
    CHECK(rep.all_ok());
}

TEST_CASE("gate margins match hand-computed values") {
    const SdeModel ou = catalog_model("ou");
    const Driver cosd = catalog_driver("cos");
    const GateReport g1 = validate(ou, cosd);
    // r2 = 0 wipes both correction terms, so each margin is exactly eta2.
    CHECK(g1.drift_gate_margin == 1.0);
    CHECK(g1.equation_gate_margin == 1.0);
    CHECK(g1.all_ok());

    const SdeModel wd = catalog_model("weakdiss");
    const Driver ct = catalog_driver("cos-tanh", {}, &wd);
    const GateReport g2 = validate(wd, ct);
    // 0.5 - sqrt(0.01)*0.5*1 - 0.5*1*0.01
    CHECK(g2.drift_gate_margin == doctest::Approx(0.445).epsilon(1e-12));
    CHECK(g2.gamma_bound == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g2.all_ok());

    ValidateOptions heavy;
    heavy.mu = 101.0;
    const GateReport g3 = validate(wd, ct, heavy);
    // 0.5 - 0.05 - 50*0.01: the variance correction eats the whole margin.
    CHECK(g3.drift_gate_margin == doctest::Approx(-0.05).epsilon(1e-9));
    CHECK_FALSE(g3.drift_gate_ok);
    CHECK_FALSE(g3.all_ok());

    ValidateOptions custom;
    custom.gamma_bound = 0.2;
    custom.p = 4.0;
    const GateReport g4 = validate(wd, ct, custom);
    // 0.5 - 0.1*0.2 - 1.5*0.01
    CHECK(g4.equation_gate_margin == doctest::Approx(0.465).epsilon(1e-12));
    CHECK(g4.gamma_bound == 0.2);
}

TEST_CASE("driver catalog") {
    CHECK_THROWS_AS(catalog_driver("const"), MissingParam);
    const Driver c = catalog_driver("const", {{"c", 0.3}});
    CHECK(c.psi(5.0, 7.0) == 0.3);
    CHECK(c.K_x == 0.0);
    CHECK(c.K_z == 0.0);
    CHECK(c.M_psi == 0.3);

    const Driver cs = catalog_driver("cos");
    CHECK(cs.psi(0.0, 3.0) == 1.0);
    CHECK(cs.K_x == 1.0);
    CHECK(cs.K_z == 0.0);

    CHECK_THROWS_AS(catalog_driver("cos-tanh"), MissingParam);
    const SdeModel ou = catalog_model("ou");
    const Driver ct = catalog_driver("cos-tanh", {}, &ou);
    CHECK(ct.K_z == 0.5);
    CHECK(ct.psi(0.0, 0.0) == 1.0);
    CHECK(ct.psi(0.0, 1.0) ==
          doctest::Approx(1.0 + 0.5 * std::tanh(1.0)).epsilon(1e-15));
    const Driver ct2 = catalog_driver("cos-tanh", {{"k", 0.25}}, &ou);
    CHECK(ct2.K_z == 0.25);

    CHECK_THROWS_AS(catalog_driver("bogus"), UnknownCatalogEntry);
}

TEST_CASE("terminal catalog") {
    const TerminalCondition z = catalog_terminal("zero");
    CHECK(z.g(42.0) == 0.0);
    CHECK(z.growth_const == 0.0);

    const TerminalCondition q = catalog_terminal("quadratic");
    CHECK(q.g(5.0) == 25.0);
    CHECK(q.g(-5.0) == 25.0);
    CHECK(q.g(200.0) == 10000.0);  // clipped at the default cap
    const TerminalCondition q2 = catalog_terminal("quadratic", {{"clip", 2.0}});
    CHECK(q2.g(3.0) == 4.0);

    const TerminalCondition l = catalog_terminal("linear");
    CHECK(l.g(-1.5) == -1.5);

    CHECK_THROWS_AS(catalog_terminal("bogus"), UnknownCatalogEntry);
}

TEST_CASE("control catalog lists the idle action first") {
    const ControlProblem cp = catalog_control("bang-control");
    REQUIRE(cp.actions.size() == 3);
    CHECK(cp.actions[0].label == "0");
    CHECK(cp.actions[0].shift == 0.0);
    CHECK(cp.actions[1].shift == -1.0);
    CHECK(cp.actions[2].shift == 1.0);
    CHECK(cp.running_cost(0.0, 0) == 1.0);          // cos(0) + 0
    CHECK(cp.running_cost(0.0, 1) == 1.5);          // cos(0) + 0.5*|-1|
    CHECK(cp.shift_bound == 1.0);
    CHECK(cp.terminal.g(7.0) == 0.0);
    CHECK_THROWS_AS(catalog_control("bogus"), UnknownCatalogEntry);
}

TEST_CASE("unknown catalog names are rejected") {
    CHECK_THROWS_AS(catalog_model("bogus"), UnknownCatalogEntry);
}

TEST_CASE("non-finite user callables are rejected by validate") {
    SdeModel bad = catalog_model("ou");
    bad.drift = [](double x) { return std::sqrt(x); };  // NaN for x < 0
    CHECK_THROWS_AS(validate(bad, catalog_driver("cos")), NonFiniteEvaluation);

    SdeModel flat = catalog_model("ou");
    flat.diffusion = [](double x) { return x; };  // not strictly positive
    CHECK_THROWS_AS(validate(flat, catalog_driver("cos")), NonFiniteEvaluation);
}

TEST_CASE("smooth profile derivatives are consistent") {
    const SmoothScalarField f = one_minus_cos_field();
    CHECK(f.value(0.0) == 0.0);
    CHECK(f.second(0.0) == 1.0);
    const double h = 1e-6;
    for (double x : {-2.0, -0.3, 0.7, 1.9}) {
        const double fd = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
        CHECK(f.deriv(x) == doctest::Approx(fd).epsilon(1e-8));
        const double fd2 = (f.deriv(x + h) - f.deriv(x - h)) / (2.0 * h);
        CHECK(f.second(x) == doctest::Approx(fd2).epsilon(1e-8));
    }
}

TEST_CASE("manufactured driver solves its own ergodic identity") {
    const SdeModel ou = catalog_model("ou");
    const ManufacturedProblem mp =
        manufactured_problem(ou, one_minus_cos_field(), 0.5, 0.5);
    CHECK(mp.lambda_star == 0.5);
    CHECK(mp.driver.K_z == 0.5);
    CHECK(mp.driver.K_x > 0.0);
    CHECK(mp.driver.M_psi > 0.0);

    // Plug (v*, z* = v*' sigma) back in: generator(v*) + psi(x, z*) must
    // reproduce lambda* pointwise, with the z-term vanishing identically.
    for (double x = -6.0; x <= 6.0; x += 0.37) {
        const double s = ou.diffusion(x);
        const double gen = ou.drift(x) * mp.v_star.deriv(x) +
                           0.5 * s * s * mp.v_star.second(x);
        const double z_star = mp.v_star.deriv(x) * s;
        CHECK(gen + mp.driver.psi(x, z_star) ==
              doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("manufactured driver passes validation against its model") {
    const SdeModel wd = catalog_model("weakdiss");
    const ManufacturedProblem mp =
        manufactured_problem(wd, one_minus_cos_field(), 0.5, 0.5);
    const GateReport rep = validate(wd, mp.driver);
    for (const auto& s : rep.samples) {
        INFO(s.name, " worst residual ", s.worst_residual);
        CHECK(s.worst_residual <= 1e-9);
    }
    CHECK(rep.assumptions_ok);

    CHECK_THROWS_AS(manufactured_problem(wd, one_minus_cos_field(), 0.5, -1.0),
                    MissingParam);
}

}  // TEST_SUITE
