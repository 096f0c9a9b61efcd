#include "ebsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ebsde/errors.hpp"

namespace ebsde {

namespace {

double get_param(const Params& params, const std::string& key,
                 std::optional<double> fallback, const std::string& ctx) {
    auto it = params.find(key);
    if (it != params.end()) return it->second;
    if (fallback) return *fallback;
    throw MissingParam(ctx + " requires parameter '" + key + "'");
}

// Additive low-discrepancy sequence on [0,1): frac(i * alpha_d), one
// quadratic irrational per coordinate.
double weyl(int i, int dim) {
    static const double alphas[4] = {std::sqrt(2.0), std::sqrt(3.0),
                                     std::sqrt(5.0), std::sqrt(7.0)};
    double v = static_cast<double>(i + 1) * alphas[dim % 4];
    return v - std::floor(v);
}

double require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw NonFiniteEvaluation(std::string(what) +
                                  " returned a non-finite value");
    }
    return v;
}

}  // namespace

GateReport validate(const SdeModel& model, const Driver& driver,
                    const ValidateOptions& opts) {
    GateReport report;
    report.mu = opts.mu;
    report.p = opts.p;
    report.gamma_bound = opts.gamma_bound > 0.0
                             ? opts.gamma_bound
                             : driver.K_z * model.sigma_inv_bound;

    const double sqrt_r2 = std::sqrt(std::max(model.r2, 0.0));
    report.drift_gate_margin =
        model.eta2 - sqrt_r2 * driver.K_z * model.sigma_inv_bound -
        0.5 * (opts.mu - 1.0) * model.r2;
    report.equation_gate_margin =
        model.eta2 - sqrt_r2 * report.gamma_bound -
        0.5 * (std::max(opts.p, 2.0) - 1.0) * model.r2;
    report.drift_gate_ok = report.drift_gate_margin > 0.0;
    report.equation_gate_ok = report.equation_gate_margin > 0.0;

    AssumptionSample dissipativity{"dissipativity", -1e300, 0.0, 0.0};
    AssumptionSample drift_growth{"drift-growth", -1e300, 0.0, 0.0};
    AssumptionSample diffusion_growth{"diffusion-growth", -1e300, 0.0, 0.0};
    AssumptionSample ellipticity{"ellipticity", -1e300, 0.0, 0.0};
    AssumptionSample driver_zero{"driver-at-zero", -1e300, 0.0, 0.0};
    AssumptionSample driver_lip{"driver-lipschitz", -1e300, 0.0, 0.0};

    auto track = [](AssumptionSample& s, double residual, double x,
                    double aux) {
        if (residual > s.worst_residual) {
            s.worst_residual = residual;
            s.at_x = x;
            s.at_aux = aux;
        }
    };

    const double span = opts.x_hi - opts.x_lo;
    const double z_span = opts.z_hi - opts.z_lo;
    for (int i = 0; i < opts.n_samples; ++i) {
        const double x = opts.x_lo + span * weyl(i, 0);
        const double xi = require_finite(model.drift(x), "drift");
        const double sg = require_finite(model.diffusion(x), "diffusion");
        if (sg <= 0.0) {
            throw NonFiniteEvaluation("diffusion must be strictly positive");
        }
        track(dissipativity, x * xi - (model.eta1 - model.eta2 * x * x), x, 0);
        track(drift_growth, std::abs(xi) - (model.xi1 + model.xi2 * std::abs(x)),
              x, 0);
        track(diffusion_growth, sg * sg - (model.r1 + model.r2 * x * x), x, 0);
        track(ellipticity, 1.0 / sg - model.sigma_inv_bound, x, 0);
        const double p0 = require_finite(driver.psi(x, 0.0), "driver");
        track(driver_zero,
              std::abs(p0) - driver.M_psi * (1.0 + std::abs(x)), x, 0);

        // Pair sample for the two-argument Lipschitz bound.
        const double xp = opts.x_lo + span * weyl(i, 1);
        const double z = opts.z_lo + z_span * weyl(i, 2);
        const double zp = opts.z_lo + z_span * weyl(i, 3);
        const double sgp = require_finite(model.diffusion(xp), "diffusion");
        const double lhs = std::abs(require_finite(driver.psi(x, z), "driver") -
                                    require_finite(driver.psi(xp, zp), "driver"));
        const double rhs = driver.K_x * std::abs(x - xp) +
                           driver.K_z * std::abs(z / sg - zp / sgp);
        track(driver_lip, lhs - rhs, x, xp);
    }

    report.samples = {dissipativity, drift_growth, diffusion_growth,
                      ellipticity, driver_zero, driver_lip};
    report.assumptions_ok = true;
    for (const auto& s : report.samples) {
        // Allow double-rounding dust on bounds that are tight by design.
        if (s.worst_residual > 1e-9) report.assumptions_ok = false;
    }
    return report;
}

SdeModel catalog_model(const std::string& name, const Params& params) {
    if (name == "ou") {
        const double eta = get_param(params, "eta", 1.0, "model ou");
        const double sigma = get_param(params, "sigma", 1.0, "model ou");
        if (eta <= 0.0 || sigma <= 0.0) {
            throw MissingParam("model ou needs eta > 0 and sigma > 0");
        }
        SdeModel m;
        m.name = "ou";
        m.drift = [eta](double x) { return -eta * x; };
        m.diffusion = [sigma](double) { return sigma; };
        m.eta1 = 0.0;
        m.eta2 = eta;
        m.r1 = sigma * sigma;
        m.r2 = 0.0;
        m.xi1 = 0.0;
        m.xi2 = eta;
        m.sigma_inv_bound = 1.0 / sigma;
        return m;
    }
    if (name == "weakdiss") {
        // drift -x + cos x: x * drift <= -x^2 + |x| <= 1/2 - x^2/2.
        SdeModel m;
        m.name = "weakdiss";
        m.drift = [](double x) { return -x + std::cos(x); };
        m.diffusion = [](double x) { return std::sqrt(1.0 + 0.01 * x * x); };
        m.eta1 = 0.5;
        m.eta2 = 0.5;
        m.r1 = 1.0;
        m.r2 = 0.01;
        m.xi1 = 1.0;
        m.xi2 = 1.0;
        m.sigma_inv_bound = 1.0;
        return m;
    }
    throw UnknownCatalogEntry("unknown model '" + name + "'");
}

Driver catalog_driver(const std::string& name, const Params& params,
                      const SdeModel* paired_model) {
    if (name == "const") {
        const double c = get_param(params, "c", std::nullopt, "driver const");
        Driver d;
        d.name = "const";
        d.psi = [c](double, double) { return c; };
        d.K_x = 0.0;
        d.K_z = 0.0;
        d.M_psi = std::abs(c);
        return d;
    }
    if (name == "cos") {
        Driver d;
        d.name = "cos";
        d.psi = [](double x, double) { return std::cos(x); };
        d.K_x = 1.0;
        d.K_z = 0.0;
        d.M_psi = 1.0;
        return d;
    }
    if (name == "cos-tanh") {
        const double k = get_param(params, "k", 0.5, "driver cos-tanh");
        if (paired_model == nullptr) {
            throw MissingParam("driver cos-tanh requires a paired model");
        }
        auto sigma = paired_model->diffusion;
        Driver d;
        d.name = "cos-tanh";
        d.psi = [k, sigma](double x, double z) {
            return std::cos(x) + k * std::tanh(z / sigma(x));
        };
        d.K_x = 1.0;
        d.K_z = k;
        d.M_psi = 1.0;
        return d;
    }
    throw UnknownCatalogEntry("unknown driver '" + name + "'");
}

TerminalCondition catalog_terminal(const std::string& name,
                                   const Params& params) {
    if (name == "zero") {
        TerminalCondition t;
        t.name = "zero";
        t.g = [](double) { return 0.0; };
        t.growth_const = 0.0;
        t.growth_exp = 2.0;
        t.lip_weighted = 0.0;
        return t;
    }
    if (name == "quadratic") {
        const double clip =
            get_param(params, "clip", 100.0, "terminal quadratic");
        TerminalCondition t;
        t.name = "quadratic";
        t.g = [clip](double x) { return std::min(x * x, clip * clip); };
        t.growth_const = 1.0;
        t.growth_exp = 2.0;
        t.lip_weighted = 1.0;
        return t;
    }
    if (name == "linear") {
        TerminalCondition t;
        t.name = "linear";
        t.g = [](double x) { return x; };
        t.growth_const = 1.0;
        t.growth_exp = 2.0;
        t.lip_weighted = 1.0;
        return t;
    }
    throw UnknownCatalogEntry("unknown terminal condition '" + name + "'");
}

ControlProblem catalog_control(const std::string& name, const Params&) {
    if (name == "bang-control") {
        ControlProblem cp;
        cp.name = "bang-control";
        // "do nothing" listed first so exact cost ties resolve to it.
        cp.actions = {{"0", 0.0}, {"-1", -1.0}, {"+1", 1.0}};
        std::vector<double> shifts;
        for (const auto& a : cp.actions) shifts.push_back(a.shift);
        cp.running_cost = [shifts](double x, int a) {
            return std::cos(x) + 0.5 * std::abs(shifts[static_cast<std::size_t>(a)]);
        };
        cp.shift_bound = 1.0;
        cp.cost_lip_x = 1.0;
        cp.cost_growth = 1.5;
        cp.terminal = catalog_terminal("zero");
        return cp;
    }
    throw UnknownCatalogEntry("unknown control problem '" + name + "'");
}

SmoothScalarField one_minus_cos_field() {
    SmoothScalarField f;
    f.name = "one-minus-cos";
    f.value = [](double x) { return 1.0 - std::cos(x); };
    f.deriv = [](double x) { return std::sin(x); };
    f.second = [](double x) { return std::cos(x); };
    return f;
}

ManufacturedProblem manufactured_problem(const SdeModel& model,
                                         const SmoothScalarField& v_star,
                                         double lambda_star, double kappa) {
    if (kappa < 0.0) throw MissingParam("manufactured kappa must be >= 0");

    auto drift = model.drift;
    auto sigma = model.diffusion;
    auto dv = v_star.deriv;
    auto d2v = v_star.second;
    // x-only part: lambda* minus the generator applied to v*.
    auto base = [drift, sigma, dv, d2v, lambda_star](double x) {
        const double s = sigma(x);
        return lambda_star - (drift(x) * dv(x) + 0.5 * s * s * d2v(x));
    };

    // Declared constants are sampled sups over the working window with a
    // small safety factor so later validation at other points still passes.
    const int n = 2001;
    const double lo = -10.0, hi = 10.0;
    const double h = (hi - lo) / (n - 1);
    double base_lip = 0.0, d2v_sup = 0.0, m_psi = 0.0;
    double prev = require_finite(base(lo), "manufactured driver");
    for (int i = 0; i < n; ++i) {
        const double x = lo + i * h;
        const double b = require_finite(base(x), "manufactured driver");
        if (i > 0) base_lip = std::max(base_lip, std::abs(b - prev) / h);
        prev = b;
        d2v_sup = std::max(d2v_sup, std::abs(d2v(x)));
        // psi(x, 0) = base(x) + kappa * tanh(-v*'(x)).
        const double at_zero = b + kappa * std::tanh(-dv(x));
        m_psi = std::max(m_psi, std::abs(at_zero) / (1.0 + std::abs(x)));
    }

    ManufacturedProblem out;
    out.v_star = v_star;
    out.lambda_star = lambda_star;
    out.kappa = kappa;
    out.driver.name = "manufactured(" + v_star.name + ")";
    out.driver.psi = [base, sigma, dv, kappa](double x, double z) {
        return base(x) + kappa * std::tanh(z / sigma(x) - dv(x));
    };
    out.driver.K_x = 1.01 * (base_lip + kappa * d2v_sup);
    out.driver.K_z = kappa;
    out.driver.M_psi = 1.01 * m_psi + 1e-12;
    return out;
}

}  // namespace ebsde
