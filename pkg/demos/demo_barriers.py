"""Certifying the closed-form barriers numerically.

Each barrier family comes with a differential inequality that the library
checks by adaptive principal-value quadrature on a log-spaced evaluation
band: the upper barrier is a supersolution of the discounted problem, the
compact subsolution obeys its stated right-hand side, and for s <= 1/2 the
logarithmic family certifies that no minimal large solution can exist (its
infimum over k is finite while any minimal solution would have to stay
below every member).
"""

import numpy as np

from censoredhj import IntervalDomain, ProblemParams, c0_root
from censoredhj.barriers import (
    CompactSubsolution,
    NonexistenceBarrier,
    UpperBarrier,
    check_differential_inequality,
    envelope_max,
    halfline_power_constant,
)
from censoredhj.solver import SourceTerm

domain = IntervalDomain(0.0, 1.0)
params = ProblemParams(s=0.75, m=1.4, lam=1.0, C1=1.0)
f = SourceTerm.profile(params)

print("upper barrier W = (C0 + eps) g_gamma + Cstar/lambda:")
W = UpperBarrier(params, domain, c0_root(params).C0, eps=0.25, cstar=25.0)
rep = check_differential_inequality(W, f, (1e-3, 1e-1))
print(f"  min residual {rep.min_residual:+.4f} (tolerance {rep.check_tolerance:.1e})"
      f"  supersolution: {rep.satisfied}")

print("\ncompact subsolution w_R vs its stated bound:")
beta = 0.5 * (2 * params.s - 1)
c_beta = halfline_power_constant(params.s, beta)
for mu in (0.1, 0.02):
    b = CompactSubsolution(params, domain, mu, 3.0, beta)
    rep = check_differential_inequality(
        b, lambda x, d: np.zeros(np.size(x)), (2e-3, 0.9 * b.support_distance),
        direction="sub", lam=0.0, lemma_bound={"c_beta": c_beta},
    )
    print(f"  mu={mu}: max margin (quarter bound) {rep.extra['margin_quarter'].max():+.4f}"
          f"  satisfied: {rep.satisfied}")

print("\nenvelope of the subsolution family (drives the lower blow-up bound):")
r_star, theta = envelope_max(beta, params.gamma, a=0.01)
print(f"  at d=0.01: maximizing R = {r_star:.4f}, envelope value {theta:.4f},"
      f"  i.e. u >= mu * {theta:.2f} there")

print("\nnonexistence regime s <= 1/2: z = M/lambda - k log d is a supersolution"
      " for every k:")
pn = ProblemParams(s=0.45, m=0.8, lam=1.0, C1=1.0, solver_regime=False)
fz = SourceTerm.constant(1.0)
for k in (0.5, 0.1, 0.01):
    z = NonexistenceBarrier(pn, domain, k=k, M=8.0)
    rep = check_differential_inequality(z, fz, (1e-3, 0.45))
    print(f"  k={k}: min residual {rep.min_residual:+.4f}  supersolution: {rep.satisfied}")
print("  inf over k at fixed x is M/lambda: a minimal large solution would be"
      " bounded, contradiction.")
