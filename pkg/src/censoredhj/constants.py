"""Problem parameters, the derived exponent gamma, and the blow-up coefficient C0.

gamma = (2s - m)/(m - 1) for s in (1/2, 1) and m in (s + 1/2, 2s]; gamma = 0
exactly at the critical scaling m = 2s.  The scaling identity
(gamma + 1) m = gamma + 2s holds by construction and is what matches the
gradient term against the kernel scaling.

C0 is the unique positive root of

    subcritical m < 2s:   -C0 c(-gamma) + gamma^m C0^m - C1 = 0
    critical    m = 2s:   -C0 |c_s|     + C0^{2s}       - C1 = 0

where c(-gamma) > 0 is the half-line power constant at exponent -gamma
(the operator acts on the barrier d^{-gamma}) and c_s < 0 is the half-line
log constant.  The critical equation is stated with the coefficient -|c_s|,
which is what substituting C0 * (-log d) into the equation produces; the
alternative reading of the printed equation (coefficient +|c_s|) is kept
available behind ``sign_convention='as_printed'`` and is discriminated
against by the solver's measured blow-up ratio (see the acceptance suite).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fracop import halfline_log_constant, halfline_power_constant

DEFAULT_SIGN_CONVENTION = "derivation"
ROOT_TOLERANCE = 1e-12


def gamma_exponent(s: float, m: float) -> float:
    """(2s - m)/(m - 1), validated on the admissible region."""
    s = float(s)
    m = float(m)
    if not (0.5 < s < 1.0):
        raise ValueError(f"s must lie in (1/2, 1), got s = {s}")
    if not (s + 0.5 < m):
        raise ValueError(f"m must exceed s + 1/2 = {s + 0.5}, got m = {m}")
    if not (m <= 2.0 * s):
        raise ValueError(f"m must not exceed 2s = {2 * s}, got m = {m}")
    g = (2.0 * s - m) / (m - 1.0)
    # the formula lands in [0, 1) on the admissible region
    return max(g, 0.0)


@dataclass(frozen=True)
class ProblemParams:
    """The tuple (s, m, lambda, N) with derived gamma and boundary coefficient C1.

    ``solver_regime=False`` relaxes the admissibility window (used only for
    the nonexistence barriers at s <= 1/2, where gamma is not defined).
    """

    s: float
    m: float
    lam: float = 1.0
    N: int = 1
    C1: float = 1.0
    solver_regime: bool = True
    gamma: float = field(init=False, default=0.0)

    def __post_init__(self):
        s = float(self.s)
        m = float(self.m)
        lam = float(self.lam)
        if not (0.0 < s < 1.0):
            raise ValueError(f"s must lie in (0,1), got {s}")
        if lam < 0.0:
            raise ValueError(f"lambda must be nonnegative, got {lam}")
        if self.C1 < 0.0:
            raise ValueError(f"C1 must be nonnegative, got {self.C1}")
        if int(self.N) < 1:
            raise ValueError("N must be >= 1")
        if self.solver_regime:
            g = gamma_exponent(s, m)
        else:
            if m <= 0.0:
                raise ValueError(f"m must be positive, got {m}")
            g = (2.0 * s - m) / (m - 1.0) if (m > 1.0 and m <= 2.0 * s) else float("nan")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "C1", float(self.C1))
        object.__setattr__(self, "gamma", g)

    @property
    def critical(self) -> bool:
        return self.m == 2.0 * self.s

    @property
    def regime(self) -> str:
        return "critical_m_eq_2s" if self.critical else "subcritical_m_lt_2s"

    def scaling_identity_residual(self) -> float:
        """(gamma + 1) m - (gamma + 2s); zero on the admissible region."""
        return (self.gamma + 1.0) * self.m - (self.gamma + 2.0 * self.s)

    def with_lambda(self, lam: float) -> "ProblemParams":
        return ProblemParams(self.s, self.m, lam, self.N, self.C1, self.solver_regime)

    def with_C1(self, C1: float) -> "ProblemParams":
        return ProblemParams(self.s, self.m, self.lam, self.N, C1, self.solver_regime)


@dataclass(frozen=True)
class BlowupCoefficient:
    C0: float
    regime: str
    residual: float
    sign_convention: str


def c0_equation(params: ProblemParams, c_power: float, c_log: float,
                sign_convention: str = DEFAULT_SIGN_CONVENTION):
    """The defining polynomial phi(t) whose unique positive root is C0."""
    C1 = params.C1
    if params.critical:
        two_s = 2.0 * params.s
        if sign_convention == "derivation":
            coeff = -abs(c_log)
        elif sign_convention == "as_printed":
            coeff = abs(c_log)
        else:
            raise ValueError(f"unknown sign convention {sign_convention!r}")

        def phi(t):
            return coeff * t + t**two_s - C1

    else:
        g = params.gamma
        m = params.m
        # both conventions agree in the subcritical regime: the coefficient
        # is -c(-gamma) with c(-gamma) > 0
        if sign_convention not in ("derivation", "as_printed"):
            raise ValueError(f"unknown sign convention {sign_convention!r}")

        def phi(t):
            return -c_power * t + g**m * t**m - C1

    return phi


def c0_root(
    params: ProblemParams,
    c_power: float | None = None,
    c_log: float | None = None,
    sign_convention: str = DEFAULT_SIGN_CONVENTION,
) -> BlowupCoefficient:
    """Unique positive root of the blow-up coefficient equation.

    Bisection on (0, T] with bracket doubling from T = 1 up to 2^30;
    uniqueness is verified by counting sign changes over a 1000-point
    log-spaced sample of (1e-6, T].  The residual of the accepted root is
    at most 1e-12 (absolute, the equation is O(1)-scaled at desk scale).
    """
    if params.critical:
        if c_log is None:
            c_log = halfline_log_constant(params.s)
    else:
        if c_power is None:
            c_power = halfline_power_constant(params.s, -params.gamma)
        if c_power <= 0.0:
            raise ValueError(
                "c_power must be the positive half-line constant at exponent -gamma"
            )
    phi = c0_equation(params, c_power, c_log, sign_convention)

    if params.C1 == 0.0:
        # degenerate source: the equation still has a positive root unless the
        # linear coefficient is nonnegative
        pass

    T = 1.0
    expansions = 0
    while phi(T) <= 0.0:
        T *= 2.0
        expansions += 1
        if T > 2.0**30:
            raise RuntimeError(
                "no sign change found while expanding the bracket to 2^30; "
                f"phi(2^30) = {phi(T/2):.6g}"
            )

    sample = np.geomspace(1e-6, T, 1000)
    signs = np.sign(phi(sample))
    nz = signs[signs != 0.0]
    changes = int(np.count_nonzero(np.diff(nz) != 0.0))
    if changes > 1:
        raise RuntimeError(
            f"multiple sign changes ({changes}) in the C0 equation; the selected "
            f"sign convention {sign_convention!r} violates the unique-positive-root "
            "structure"
        )

    lo, hi = 0.0, T
    flo = phi(lo) if lo > 0 else -params.C1 if params.C1 > 0 else phi(1e-300)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = phi(mid)
        if abs(fm) <= ROOT_TOLERANCE and (hi - lo) < 1e-13 * max(1.0, mid):
            break
        if fm > 0.0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    res = abs(float(phi(root)))
    if res > ROOT_TOLERANCE:
        # polish with a few Newton steps on the smooth polynomial
        t = root
        for _ in range(60):
            ft = phi(t)
            dt = 1e-8 * max(t, 1.0)
            dft = (phi(t + dt) - phi(t - dt)) / (2 * dt)
            if dft == 0.0:
                break
            t -= ft / dft
            if t <= 0.0:
                t = root
                break
            if abs(phi(t)) <= 0.25 * ROOT_TOLERANCE:
                break
        if abs(phi(t)) < res:
            root, res = t, abs(float(phi(t)))
    if res > ROOT_TOLERANCE:
        raise RuntimeError(f"C0 root residual {res:.3e} exceeds {ROOT_TOLERANCE}")
    return BlowupCoefficient(
        C0=float(root), regime=params.regime, residual=res, sign_convention=sign_convention
    )
