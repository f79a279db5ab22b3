"""
How many tests will a campaign need?
====================================

Before running anything we can bound the number of tests required to
shrink the posterior entropy below a fraction delta of the prior. The
machinery: a quadratic minorant of the per-test information gain turns
achieved pool probabilities (roughly Gaussian around their target) into
a mean/variance pair for the gain, and a Chebyshev argument converts
those into a success-probability curve over the test budget.
"""

import numpy as np

from pooltest import (
    Prior,
    TestParams,
    chebyshev_curve,
    complexity_report,
    minorant_moments,
    mismatch_alpha,
    optimal_f,
    sample_complexity,
    utility,
)

prior = Prior.uniform(10, 0.1)
params = TestParams(sensitivity=0.8, specificity=0.8)
delta = 0.6
H = prior.entropy_bits()
print(f"prior entropy  {H:.6f} bits, target {delta * H:.6f} bits")

# With every pool exactly on target (zero spread), each test buys the
# peak utility and the horizon is just (1 - delta) H / J(f*).
f_star = optimal_f(params).f_star
peak = float(utility(f_star, params))
t_e = sample_complexity(H, delta, peak)
print(f"peak gain      {peak:.6f} bits/test")
print(f"horizon T_E    {t_e:.4f} tests")

# Real campaigns wobble around the target. A spread nu in the achieved
# pool probability lowers the guaranteed mean gain and adds variance.
for nu in (0.0, 0.02, 0.05):
    m = minorant_moments(f_star, nu, params)
    print(f"nu={nu:.2f}  E_F={m.E_F:.6f}  V_F={m.V_F:.3e}  "
          f"T_E={sample_complexity(H, delta, m.E_F):.4f}")

# The success curve: a lower bound on the probability that T tests
# suffice, trivial at T_E and approaching 1 beyond it.
m = minorant_moments(f_star, 0.05, params)
t_e = sample_complexity(H, delta, m.E_F)
print(f"\nsuccess curve at nu=0.05 (T_E={t_e:.2f}):")
for T in range(int(np.ceil(t_e)), int(np.ceil(t_e)) + 6):
    print(f"  T={T:2d}  P >= {chebyshev_curve(T, t_e, m.E_F, m.V_F):.4f}")

# Designing with the wrong error rates moves pools off target. alpha
# prices that as a fractional increase in the required budget.
assumed = TestParams(sensitivity=0.9, specificity=0.6)
f_prime = optimal_f(assumed).f_star
alpha = mismatch_alpha(params, f_prime, f_star)
print(f"\nassumed (s=0.9, sigma=0.6): f' = {f_prime:.6f}")
print(f"budget inflation alpha = {alpha:.6f}")

# complexity_report bundles the whole story for one configuration.
rep = complexity_report(H, delta, params, assumed_params=assumed)
print(f"report: T_E={rep.T_E:.4f}, alpha={rep.alpha:.6f}, feasible={rep.feasible}")
