#!/usr/bin/env python3
"""Generates the frozen reference values used by the C++ test suites.

Everything printed here is independent of the C++ code: closed forms,
quadrature against exact Gaussian marginals, and third-party RNG output
(numpy's Philox4x64-10). Values are pasted into the tests as literals;
rerun this script to audit them.
"""
import numpy as np
from scipy import stats
from scipy.integrate import quad


def sec(title):
    print()
    print("##", title)


# ---------------------------------------------------------------- RNG ----
sec("philox4x64-10 known-answer blocks (counter[4], key[2] -> out[4])")
# numpy's generator increments its 256-bit counter before producing each
# block, so random_raw(4) with counter=c yields the raw bijection applied to
# c+1. Seed with c-1 to freeze the value of philox4x64(c, key) itself.
MASK = (1 << 64) - 1
cases = [
    ([0, 0, 0, 0], [0, 0]),
    ([1, 2, 3, 4], [0xDEADBEEF, 0xCAFEF00D]),
    ([0xFFFFFFFFFFFFFFFF] * 4, [0xFFFFFFFFFFFFFFFF] * 2),
    ([0x0123456789ABCDEF, 1, 2, 3], [42, 7]),
]
for ctr, key in cases:
    wide = sum(w << (64 * i) for i, w in enumerate(ctr))
    wide = (wide - 1) % (1 << 256)
    prev = [(wide >> (64 * i)) & MASK for i in range(4)]
    bg = np.random.Philox(counter=prev, key=key)
    out = bg.random_raw(4)
    print("ctr", [hex(c) for c in ctr], "key", [hex(k) for k in key])
    print("  ->", ", ".join("0x%016x" % v for v in out))

sec("standard normal quantiles (scipy.stats.norm.ppf)")
for u in [1e-12, 1e-6, 0.025, 0.31, 0.5, 0.6827, 0.975, 1 - 1e-6, 1 - 1e-12]:
    print("  ppf(%.12g) = %.17g" % (u, stats.norm.ppf(u)))

# --------------------------------------------------- OU closed forms ----
# dX = -eta X dt + sigma dW, eta = sigma = 1 unless noted.
sec("Ornstein-Uhlenbeck closed forms (eta=1, sigma=1)")
print("  mean from x0=2 at T=1: 2*exp(-1)        = %.17g" % (2 * np.exp(-1)))
print("  stationary variance sigma^2/(2 eta)     = %.17g" % 0.5)
print("  stationary fourth moment 3 Var^2        = %.17g" % (3 * 0.25))
print("  E_mu[cos X] = exp(-Var/2) = exp(-1/4)   = %.17g" % np.exp(-0.25))
var5 = (1 - np.exp(-10)) / 2
print("  Var(X_5 | X_0=0) = (1-e^-10)/2          = %.17g" % var5)
print("  E[cos X_5 | X_0=0] = exp(-Var/2)        = %.17g" % np.exp(-var5 / 2))

sec("OU transition hit probability P(|X_1 - 3| < 0.5 | X_0 = 0)")
sd1 = np.sqrt((1 - np.exp(-2)) / 2)
p_hit = stats.norm.cdf(3.5 / sd1) - stats.norm.cdf(2.5 / sd1)
print("  sd(X_1) = %.17g" % sd1)
print("  p_hit   = %.17g" % p_hit)

sec("E[ cos X_t | X_0=x ] = cos(x e^-t) exp(-(1-e^-2t)/4): time integrals")


def expected_cos(t, x):
    return np.cos(x * np.exp(-t)) * np.exp(-(1 - np.exp(-2 * t)) / 4)


for T in [4.0, 6.0, 10.0]:
    val, err = quad(lambda t: expected_cos(t, 0.0), 0, T, limit=200)
    print("  int_0^%-4g E[cos X_t | x=0] dt = %.15g  (quad err %.1e)" % (T, val, err))

lam = np.exp(-0.25)
tail, _ = quad(lambda t: expected_cos(t, 0.0) - lam, 0, 200, limit=400)
print("  L(g=0, x=0) = int_0^inf (E cos X_t - lambda) dt = %.15g" % tail)

sec("discounted values v^alpha(0) = int_0^inf e^{-alpha t} E[cos X_t|x=0] dt")
for k in range(0, 7):
    a = 0.5 ** k
    val, err = quad(lambda t: np.exp(-a * t) * expected_cos(t, 0.0), 0,
                    np.inf, limit=400)
    print("  alpha=2^-%d: v=%.15g   alpha*v = %.15g" % (k, val, a * val))

# ------------------------------------------------- Lyapunov constants ----
sec("Lyapunov drift constants R, a, b for V = |x|^mu (mu = 2)")


def lyapunov(eta1, eta2, r1, r2, mu):
    R = np.sqrt((eta1 + (mu - 1) / 2 * r1) / (eta2 - (mu - 1) / 2 * r2)) + 1
    b = mu * eta1 + mu * (mu - 1) / 2 * r1
    a = mu * eta2 - mu * (mu - 1) / 2 * r2 - b / R ** 2
    return R, a, b


R, a, b = lyapunov(0.0, 1.0, 1.0, 0.0, 2.0)
print("  ou       (0, 1, 1, 0):        R=%.15g a=%.15g b=%.15g" % (R, a, b))
R, a, b = lyapunov(0.5, 0.5, 1.0, 0.01, 2.0)
print("  weakdiss (1/2, 1/2, 1, .01):  R=%.15g a=%.15g b=%.15g" % (R, a, b))

sec("structural gate margins  eta2 - sqrt(r2) Kz |s^-1| - (mu-1)/2 r2")
for name, eta2, r2, kz, mu in [
    ("ou+cos     mu=2", 1.0, 0.0, 0.0, 2),
    ("weakdiss   mu=2 Kz=.5", 0.5, 0.01, 0.5, 2),
    ("weakdiss   mu=101 Kz=.5", 0.5, 0.01, 0.5, 101),
]:
    m = eta2 - np.sqrt(r2) * kz * 1.0 - (mu - 1) / 2 * r2
    print("  %-24s margin = %.15g" % (name, m))

sec("default truncation half-width 6 sqrt(r1/(2 eta2 - r2)) + |x0|")
print("  ou (x0=0):       %.15g" % (6 * np.sqrt(1 / 2)))
print("  weakdiss (x0=0): %.15g" % (6 * np.sqrt(1 / (1 - 0.01))))

# --------------------------------------- finite-horizon linear problem ----
sec("linear terminal data g(x)=x with zero generator on OU")
print("  Y_0 = x0 exp(-T): x0=2, T=1: %.17g" % (2 * np.exp(-1)))
print("  x0=2, T=4: %.17g" % (2 * np.exp(-4)))
print("  Z_t = exp(-(T-t)) sigma, e.g. T=4, t=0: %.17g" % np.exp(-4.0))

sec("quadratic terminal data propagated by OU: E[X_T^2|x] = x^2 e^{-2T} + Var_T")
for T in [2.0, 4.0, 8.0, 16.0]:
    varT = (1 - np.exp(-2 * T)) / 2
    print("  T=%-4g  from x=0: %.15g   from x=3: %.15g"
          % (T, varT, 9 * np.exp(-2 * T) + varT))
