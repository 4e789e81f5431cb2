"""Half-line scaling constants of the censored fractional Laplacian.

Walks through the structural facts the library is built on: the map
gamma -> c(s, gamma) with -(-Delta)^s_{R+} x^gamma = c x^{gamma - 2s} has
zeros exactly at 0 and 2s - 1, is strictly convex, and is negative only
between the zeros; the log-profile constant changes sign at s = 1/2 and is
computed identically by the 1-D principal-value integral and the
N-dimensional radial-reduction quadrature.
"""

import numpy as np

from censoredhj import halfline_log_constant, halfline_power_constant, nd_log_constant

print("zeros of the power constant: c(s, 0) and c(s, 2s-1)")
for s in (0.6, 0.75, 0.9):
    print(f"  s={s}:  c(0) = {halfline_power_constant(s, 0.0):.3e}"
          f"   c(2s-1) = {halfline_power_constant(s, 2*s - 1):.3e}")

s = 0.75
print(f"\nsign pattern and convexity at s = {s}:")
gam = np.arange(-0.9, 2 * s - 0.05, 0.1)
vals = np.array([halfline_power_constant(s, g) for g in gam])
for g, c in zip(gam, vals):
    bar = "#" * int(min(abs(c) * 40, 60))
    print(f"  gamma={g:+.2f}  c={c:+.5f}  {'-' if c < 0 else '+'}{bar}")
second = vals[:-2] - 2 * vals[1:-1] + vals[2:]
print(f"  min second difference (convexity): {second.min():.3e}  (> 0)")

print("\nlog constant c_s (critical scaling):")
for s in (0.4, 0.5, 0.6, 0.75, 0.9):
    print(f"  s={s}: c_s = {halfline_log_constant(s):+.8f}")

print("\ndimensional reduction (N-dim quadrature equals the 1-D constant):")
for N, s in ((2, 0.75), (3, 0.6)):
    a = nd_log_constant(N, s)
    b = halfline_log_constant(s)
    print(f"  N={N}, s={s}:  {a:+.8f}  vs  {b:+.8f}   diff {abs(a-b):.2e}")
