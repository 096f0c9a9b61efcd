#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace ebsde {

// One-dimensional diffusion dX = drift(X) dt + diffusion(X) dW together with
// the structural constants the solvers and gate checks consume:
//   x * drift(x)       <= eta1 - eta2 * x^2      (weak dissipativity)
//   diffusion(x)^2     <= r1 + r2 * x^2          (at most linear growth)
//   |drift(x)|         <= xi1 + xi2 * |x|
//   1 / diffusion(x)   <= sigma_inv_bound        (uniform ellipticity)
struct SdeModel {
    std::string name;
    std::function<double(double)> drift;
    std::function<double(double)> diffusion;
    double eta1 = 0.0;
    double eta2 = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double xi1 = 0.0;
    double xi2 = 0.0;
    double sigma_inv_bound = 0.0;
};

// Driver psi(x, z) of the backward equations.  z enters Lipschitz-ly through
// z / diffusion(x):
//   |psi(x,0)|              <= M_psi * (1 + |x|)
//   |psi(x,z) - psi(x',z')| <= K_x |x-x'| + K_z |z/sigma(x) - z'/sigma(x')|
struct Driver {
    std::string name;
    std::function<double(double, double)> psi;
    double K_x = 0.0;
    double K_z = 0.0;
    double M_psi = 0.0;
};

// Terminal payoff g with polynomial growth and weighted Lipschitz constants:
//   |g(x)|        <= growth_const * (1 + |x|^growth_exp)
//   |g(x)-g(x')|  <= lip_weighted * (1 + |x| + |x'|) * |x-x'|
struct TerminalCondition {
    std::string name;
    std::function<double(double)> g;
    double growth_const = 0.0;
    double growth_exp = 2.0;
    double lip_weighted = 0.0;
};

// Scalar field with analytic first and second derivatives, used for
// manufactured solutions.
struct SmoothScalarField {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::function<double(double)> second;
};

// Finite-action control data: shifted drift dX = [drift + shift(a)] dt + ...,
// running cost L(x, a), terminal payoff.  Actions keep their listed order;
// minimisers break ties toward the earliest entry.
struct ControlAction {
    std::string label;
    double shift = 0.0;
};

struct ControlProblem {
    std::string name;
    std::vector<ControlAction> actions;
    std::function<double(double, int)> running_cost;  // L(x, action index)
    double shift_bound = 0.0;   // max_a |shift(a)|
    double cost_lip_x = 0.0;    // sup_a Lipschitz constant of L(., a)
    double cost_growth = 0.0;   // |L(x,a)| <= cost_growth * (1 + |x|)
    TerminalCondition terminal;
};

struct AssumptionSample {
    std::string name;
    double worst_residual = 0.0;  // <= 0 means the declared bound holds
    double at_x = 0.0;
    double at_aux = 0.0;  // second coordinate of the worst sample, if any
};

// Result of validate(): margins of the two smallness gates (positive means
// the gate holds) plus sampled residuals of every declared bound.
struct GateReport {
    double mu = 2.0;          // moment exponent the drift gate was asked for
    double p = 2.0;           // growth exponent the equation gate was asked for
    double gamma_bound = 0.0; // bound on the z-coefficient used by the gate
    double drift_gate_margin = 0.0;
    double equation_gate_margin = 0.0;
    bool drift_gate_ok = false;
    bool equation_gate_ok = false;
    std::vector<AssumptionSample> samples;
    bool assumptions_ok = false;

    bool all_ok() const {
        return drift_gate_ok && equation_gate_ok && assumptions_ok;
    }
};

struct ValidateOptions {
    double mu = 2.0;
    double p = 2.0;
    // z-coefficient bound for the equation gate; <= 0 derives the default
    // K_z * sigma_inv_bound from the driver.
    double gamma_bound = -1.0;
    int n_samples = 10000;
    double x_lo = -10.0;
    double x_hi = 10.0;
    double z_lo = -3.0;
    double z_hi = 3.0;
};

// Checks the declared structural constants against low-discrepancy samples
// and evaluates both smallness gates.  Throws NonFiniteEvaluation if any
// user callable returns NaN/inf on the probe set.
GateReport validate(const SdeModel& model, const Driver& driver,
                    const ValidateOptions& opts = {});

using Params = std::map<std::string, double>;

// Named desk-scale instances.  Unknown names throw UnknownCatalogEntry,
// missing required parameters throw MissingParam.
SdeModel catalog_model(const std::string& name, const Params& params = {});
Driver catalog_driver(const std::string& name, const Params& params = {},
                      const SdeModel* paired_model = nullptr);
TerminalCondition catalog_terminal(const std::string& name,
                                   const Params& params = {});
ControlProblem catalog_control(const std::string& name,
                               const Params& params = {});

// Driver built so that (lambda_star, v_star, v_star' * sigma) solves the
// ergodic equation for `model` exactly; kappa sets the z-sensitivity.
struct ManufacturedProblem {
    Driver driver;
    SmoothScalarField v_star;
    double lambda_star = 0.0;
    double kappa = 0.0;
};

ManufacturedProblem manufactured_problem(const SdeModel& model,
                                         const SmoothScalarField& v_star,
                                         double lambda_star, double kappa);

// Default manufactured profile 1 - cos(x): bounded, zero at the origin.
SmoothScalarField one_minus_cos_field();

}  // namespace ebsde
