"""Closed-form super/subsolution families and numerical residual certificates.

Four families, all functions of the boundary distance d(x):

- upper barrier      W(x)   = (C0 + eps) g_gamma(x) + offset, the blow-up
  supersolution that caps the truncated iterates from above,
- compact subsolution w_R(x) = mu (R - R^{beta/gamma + 1} d^beta)_+ ,
  vanishing where d >= R^{-1/gamma}, which forces the d^{-gamma} blow-up
  from below as R grows,
- log subsolution    (alpha/beta)(1 - d^beta) - C_delta for the critical
  scaling, with alpha^{m-1} tied to the slope of the power constant at 0,
- nonexistence family z(x) = M/lambda - k log d(x), a blow-up supersolution
  for every k in (0,1) when s <= 1/2, whose infimum over k is finite; this
  is what rules out minimal large solutions in that regime.

``check_differential_inequality`` certifies the relevant inequality of a
barrier numerically: the operator value is computed by adaptive quadrature
of the defining principal-value integral at a log-spaced evaluation set
near the boundary (closed-form barrier values, no interpolation error),
and the signed residual of lam v + (-Delta)^s v + |Dv|^m - f is compared
against the stated right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import ProblemParams
from .fracop import censored_flap_closed_form, halfline_power_constant
from .geometry import GammaProfile, IntervalDomain

DEFAULT_BETA_FRACTION = 0.5  # beta = (2s - 1) * fraction
CPRIME_STEP = 1e-3


def power_constant_slope_at_zero(s: float, step: float = CPRIME_STEP) -> float:
    """c'(0) of the half-line power constant, by central differencing."""
    return (halfline_power_constant(s, step) - halfline_power_constant(s, -step)) / (2 * step)


class Barrier:
    """Base: closed-form evaluation on a domain via the boundary distance.

    Barriers evaluate through the smoothed interior extension of the
    distance, so their censored fractional Laplacian stays bounded away
    from the boundary; near the boundary the extension agrees with d to
    first order and the blow-up asymptotics are unchanged.
    """

    kind = "barrier"
    direction = "super"

    def __init__(self, params: ProblemParams, domain: IntervalDomain,
                 smoothed: bool = True):
        self.params = params
        self.domain = domain
        self.smoothed = smoothed

    def value_of_distance(self, d):
        raise NotImplementedError

    def derivative_of_distance(self, d):
        raise NotImplementedError

    def _dist(self, x):
        if self.smoothed:
            return self.domain.smoothed_distance(x)
        return self.domain.distance(x)

    def __call__(self, x):
        return self.value_of_distance(self._dist(x))

    def gradient_magnitude(self, x):
        if self.smoothed:
            jac = np.abs(self.domain.smoothed_distance_derivative(x))
        else:
            jac = 1.0
        return np.abs(self.derivative_of_distance(self._dist(x))) * jac

    def breakpoints(self):
        return (self.domain.midpoint,)


class UpperBarrier(Barrier):
    """W = (C0 + eps) g_gamma + offset; supersolution of the lam-problem."""

    kind = "upper_W"
    direction = "super"

    def __init__(self, params, domain, c0: float, eps: float, cstar: float,
                 lam_scaled: bool = True, smoothed: bool = True):
        super().__init__(params, domain, smoothed)
        if eps <= 0 or cstar < 0:
            raise ValueError("upper barrier needs eps > 0 and Cstar >= 0")
        self.c0 = float(c0)
        self.eps = float(eps)
        self.cstar = float(cstar)
        if lam_scaled:
            if params.lam <= 0:
                raise ValueError("lam-scaled offset needs lambda > 0")
            self.offset = cstar / params.lam
        else:
            self.offset = cstar
        self.profile = GammaProfile(params.gamma)

    @property
    def amplitude(self) -> float:
        return self.c0 + self.eps

    def value_of_distance(self, d):
        return self.amplitude * self.profile.of_distance(d) + self.offset

    def derivative_of_distance(self, d):
        return self.amplitude * self.profile.derivative_of_distance(d)


class ProfileWitness(Barrier):
    """A g_gamma + B: candidate supersolution for the constant characterization."""

    kind = "profile_witness"
    direction = "super"

    def __init__(self, params, domain, A: float, B: float, smoothed: bool = True):
        super().__init__(params, domain, smoothed)
        self.A = float(A)
        self.B = float(B)
        self.profile = GammaProfile(params.gamma)

    def value_of_distance(self, d):
        return self.A * self.profile.of_distance(d) + self.B

    def derivative_of_distance(self, d):
        return self.A * self.profile.derivative_of_distance(d)


class CompactSubsolution(Barrier):
    """w_R = mu (R - R^{beta/gamma + 1} d^beta)_+, supported on d <= R^{-1/gamma}."""

    kind = "subsolution_wR"
    direction = "sub"

    def __init__(self, params, domain, mu: float, R: float, beta: float,
                 smoothed: bool = True):
        super().__init__(params, domain, smoothed)
        if params.gamma <= 0:
            raise ValueError("the compact subsolution needs gamma > 0")
        if not (0 < beta < 2 * params.s - 1):
            raise ValueError(f"beta must lie in (0, 2s-1), got {beta}")
        if mu <= 0 or R <= 0:
            raise ValueError("mu and R must be positive")
        self.mu = float(mu)
        self.R = float(R)
        self.beta = float(beta)
        self.amp = self.R ** (self.beta / params.gamma + 1.0)

    @property
    def support_distance(self) -> float:
        return self.R ** (-1.0 / self.params.gamma)

    def value_of_distance(self, d):
        d = np.asarray(d, dtype=float)
        return self.mu * np.maximum(self.R - self.amp * d**self.beta, 0.0)

    def derivative_of_distance(self, d):
        d = np.asarray(d, dtype=float)
        inside = self.R - self.amp * d**self.beta > 0.0
        return np.where(inside, -self.mu * self.amp * self.beta * d ** (self.beta - 1.0), 0.0)

    def breakpoints(self):
        d0 = self.support_distance
        pts = [self.domain.midpoint]
        L = self.domain.length
        if self.smoothed:
            if d0 < L / np.pi:
                off = (L / np.pi) * np.arcsin(np.pi * d0 / L)
                pts += [self.domain.left + off, self.domain.right - off]
        elif d0 < 0.5 * L:
            pts += [self.domain.left + d0, self.domain.right - d0]
        return tuple(pts)

    def stated_bound(self, d, c_beta: float, fraction: float = 0.25):
        """The right-hand side c(beta) * fraction * mu R^{beta/gamma+1} d^{beta-2s}."""
        d = np.asarray(d, dtype=float)
        return fraction * c_beta * self.mu * self.amp * d ** (self.beta - 2.0 * self.params.s)


class LogSubsolution(Barrier):
    """(alpha/beta)(1 - d^beta) - C_delta; critical-case lower envelope."""

    kind = "log_subsolution"
    direction = "sub"

    def __init__(self, params, domain, beta: float, cdelta: float, alpha: float | None = None,
                 smoothed: bool = True):
        super().__init__(params, domain, smoothed)
        if not (0 < beta < 2 * params.s - 1):
            raise ValueError(f"beta must lie in (0, 2s-1), got {beta}")
        if alpha is None:
            cp = power_constant_slope_at_zero(params.s)
            alpha = (-cp / 4.0) ** (1.0 / (params.m - 1.0))
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.cdelta = float(cdelta)

    def value_of_distance(self, d):
        d = np.asarray(d, dtype=float)
        return (self.alpha / self.beta) * (1.0 - d**self.beta) - self.cdelta

    def derivative_of_distance(self, d):
        d = np.asarray(d, dtype=float)
        return -self.alpha * d ** (self.beta - 1.0)


class NonexistenceBarrier(Barrier):
    """z = M/lambda - k log d; blow-up supersolution family for s <= 1/2."""

    kind = "nonexistence_z"
    direction = "super"

    def __init__(self, params, domain, k: float, M: float, smoothed: bool = True):
        super().__init__(params, domain, smoothed)
        if not (0 < k < 1):
            raise ValueError(f"k must lie in (0,1), got {k}")
        if params.lam <= 0:
            raise ValueError("the nonexistence barrier needs lambda > 0")
        self.k = float(k)
        self.M = float(M)

    def value_of_distance(self, d):
        d = np.asarray(d, dtype=float)
        return self.M / self.params.lam - self.k * np.log(d)

    def derivative_of_distance(self, d):
        d = np.asarray(d, dtype=float)
        return -self.k / d


def eval_barrier(b: Barrier, x):
    """Closed-form barrier value at interior points."""
    x = np.asarray(x, dtype=float)
    if not b.domain.contains_interior(x):
        raise ValueError("barrier evaluation requires interior points")
    return b(x)


def envelope_max(beta: float, gamma: float, a: float):
    """Maximizer and maximum of R -> (R - R^{beta/gamma + 1} a^beta)_+ .

    R(a) = ((beta + gamma)/gamma)^{-gamma/beta} a^{-gamma} and
    theta_max = (beta/gamma) (1 + beta/gamma)^{-1 - gamma/beta} a^{-gamma};
    this is the envelope that converts the compact subsolution family into
    the d^{-gamma} lower bound.
    """
    beta = float(beta)
    gamma = float(gamma)
    a = float(a)
    if beta <= 0 or gamma <= 0 or a <= 0:
        raise ValueError("envelope_max needs positive beta, gamma, a")
    r_star = ((beta + gamma) / gamma) ** (-gamma / beta) * a ** (-gamma)
    theta = (beta / gamma) * (1.0 + beta / gamma) ** (-1.0 - gamma / beta) * a ** (-gamma)
    return r_star, theta


@dataclass
class ResidualReport:
    """Signed residual sweep of a differential inequality over a band."""

    min_residual: float
    max_residual: float
    argmin_x: float
    argmax_x: float
    checked_region: tuple
    direction: str
    check_tolerance: float
    satisfied: bool
    xs: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    quad_errors: np.ndarray = field(repr=False)
    extra: dict = field(default_factory=dict, repr=False)

    def to_csv(self) -> str:
        lines = ["x,d,residual,tolerance"]
        for x, r, e in zip(self.xs, self.residuals, self.quad_errors):
            lines.append(
                f"{format(float(x),'.17g')},{format(float(min(x, 1)),'.17g')},"
                f"{format(float(r),'.17g')},{format(float(10*e),'.17g')}"
            )
        return "\n".join(lines) + "\n"


def _band_points(domain: IntervalDomain, band: tuple[float, float], n_points: int,
                 two_sided: bool = True):
    d_lo, d_hi = band
    L = domain.length
    if not (0 < d_lo < d_hi <= 0.5 * L):
        raise ValueError(f"band {band} not inside (0, L/2]")
    dvals = np.geomspace(d_hi, d_lo, n_points)
    xs = domain.left + dvals
    if two_sided:
        xs = np.concatenate([xs, domain.right - dvals])
    return np.unique(xs)


def check_differential_inequality(
    b: Barrier,
    f,
    region: tuple[float, float],
    direction: str | None = None,
    lam: float | None = None,
    n_points: int = 14,
    two_sided: bool = True,
    lemma_bound: dict | None = None,
    quad_epsabs: float = 1e-9,
) -> ResidualReport:
    """Certify lam v + (-Delta)^s v + |Dv|^m - f against 0 (or a stated bound).

    ``region`` is a distance band (d_lo, d_hi).  For supersolution checks the
    contract is residual >= -check_tolerance at every evaluation point; for
    subsolution checks residual <= +check_tolerance.  ``lemma_bound`` switches
    the comparison to the compact-subsolution estimate: the residual omits
    the lam term and is measured against c(beta)/4 * mu R' d^{beta-2s}.

    The check tolerance is 10x the accumulated quadrature error estimate,
    reported and never silently absorbed.
    """
    params = b.params
    domain = b.domain
    lam = params.lam if lam is None else float(lam)
    direction = direction or b.direction
    xs = _band_points(domain, region, n_points, two_sided)
    mid = domain.midpoint
    bps = tuple(p for p in b.breakpoints() if p != mid) + (mid,)

    residuals = np.empty(xs.size)
    errors = np.empty(xs.size)
    f_vals = f(xs, domain) if callable(f) else np.zeros(xs.size)
    for j, x in enumerate(xs):
        op, err = censored_flap_closed_form(
            b, x, domain, params.s, epsabs=quad_epsabs,
            interior_breakpoints=bps,
        )
        grad = float(b.gradient_magnitude(x))
        val = float(b(x))
        residuals[j] = lam * val + op + grad**params.m - float(f_vals[j])
        errors[j] = err

    extra = {}
    if lemma_bound is not None:
        dists = np.asarray(b._dist(xs))
        cb = lemma_bound["c_beta"]
        bound4 = b.stated_bound(dists, cb, fraction=0.25)
        bound2 = b.stated_bound(dists, cb, fraction=0.5)
        # the lemma inequality carries no lam term
        residuals = residuals - lam * np.asarray(b(xs), dtype=float)
        extra["margin_quarter"] = residuals - bound4
        extra["margin_half"] = residuals - bound2
        residuals = residuals - bound4

    tol = 10.0 * float(np.max(errors))
    rmin = float(residuals.min())
    rmax = float(residuals.max())
    if direction == "super":
        satisfied = rmin >= -tol
    else:
        satisfied = rmax <= tol
    return ResidualReport(
        min_residual=rmin,
        max_residual=rmax,
        argmin_x=float(xs[np.argmin(residuals)]),
        argmax_x=float(xs[np.argmax(residuals)]),
        checked_region=tuple(region),
        direction=direction,
        check_tolerance=tol,
        satisfied=satisfied,
        xs=xs,
        residuals=residuals,
        quad_errors=errors,
        extra=extra,
    )


def find_mu0(
    params: ProblemParams,
    domain: IntervalDomain,
    beta: float | None = None,
    r_values=(2.0, 3.0, 5.0),
    band_floor: float = 2e-3,
    n_points: int = 10,
    bisection_steps: int = 18,
) -> float:
    """Largest mu (up to bisection tolerance) satisfying the compact-subsolution bound.

    Automates the smallness constant of the lower-barrier estimate on the
    coarsest admissible evaluation band; the result is frozen into run
    configurations rather than recomputed per solve.
    """
    if beta is None:
        beta = DEFAULT_BETA_FRACTION * (2.0 * params.s - 1.0)
    c_beta = halfline_power_constant(params.s, beta)
    if c_beta >= 0:
        raise ValueError("c(beta) must be negative on (0, 2s-1)")

    def admissible(mu: float) -> bool:
        for R in r_values:
            b = CompactSubsolution(params, domain, mu, R, beta)
            d_hi = min(0.95 * b.support_distance, 0.45 * domain.length)
            if d_hi <= band_floor:
                continue
            rep = check_differential_inequality(
                b, lambda x, d: np.zeros(np.size(x)), (band_floor, d_hi),
                direction="sub", lam=0.0, n_points=n_points,
                lemma_bound={"c_beta": c_beta},
            )
            if not rep.satisfied:
                return False
        return True

    lo, hi = 0.0, 1.0
    if admissible(hi):
        return hi
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        if mid == 0.0:
            break
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise RuntimeError("no admissible mu found for the compact subsolution")
    return lo
