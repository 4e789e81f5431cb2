"""Monotone solver for the truncated Dirichlet problems and their R-limit.

The truncated problem at level R is

    lam u + (-Delta)^s_Omega u + |Du|^m = min{f, R}   in Omega,
    u = R                                              on the boundary,

discretized with the grid operator of ``fracop`` and a Godunov upwind
Hamiltonian (one-sided differences selected by sign), so the discrete
system is proper and monotone and inherits the comparison principle.  The
boundary value R is realized through a capped profile model on the two
boundary cells: u(z) = min(R, u_1 g_gamma(z)/g_gamma(x_1)), which equals R
at the boundary and follows the resolvable blow-up shape across the cell.
A piecewise-linear ramp from R to u_1 would instead deposit O(R h_1) of
spurious kernel mass into every interior equation and destroy the interior
limit along the R-schedule.

Solving the schedule R_1 < R_2 < ... with warm starts yields the monotone
approximation of the minimal large solution; interior convergence is
declared on the probe region d >= probe_floor.

The nonlinear iteration is a damped semismooth Newton with a chord-style
Jacobian (refactored every few steps) and a Levenberg fallback when the
line search stalls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .constants import ProblemParams
from .fracop import GridOperator, get_grid_operator
from .geometry import BlowupProfile, Dirichlet, GammaProfile, GradedGrid, GridFunction

DEFAULT_R_SCHEDULE = tuple(10.0**k for k in range(1, 8))  # 10 .. 1e7


# ---------------------------------------------------------------------------
# source terms
# ---------------------------------------------------------------------------

class SourceTerm:
    """Right-hand side f, bounded from below.

    ``profile`` kind: f(x) = C1 d(x)^{-(gamma+2s)} + smooth_part(x), which
    carries the boundary coefficient C1 by construction.  ``constant`` and
    ``tabulated`` kinds cover bounded data.
    """

    def __init__(self, kind, C1=0.0, power=0.0, smooth_part=None, const=0.0,
                 grid=None, values=None, tag=""):
        self.kind = kind
        self.C1 = float(C1)
        self.power = float(power)
        self.smooth_part = smooth_part
        self.const = float(const)
        self.grid = grid
        self.values = None if values is None else np.asarray(values, float)
        self.tag = tag

    @classmethod
    def profile(cls, params: ProblemParams, smooth_part=None, tag="") -> "SourceTerm":
        if params.C1 <= 0.0:
            raise ValueError("profile source requires C1 > 0")
        return cls("profile", C1=params.C1, power=params.gamma + 2.0 * params.s,
                   smooth_part=smooth_part, tag=tag)

    @classmethod
    def constant(cls, value: float) -> "SourceTerm":
        return cls("constant", const=value)

    @classmethod
    def tabulated(cls, grid: GradedGrid, values, C1: float = 0.0) -> "SourceTerm":
        return cls("tabulated", C1=C1, grid=grid, values=values)

    def __call__(self, x, domain=None):
        x = np.asarray(x, dtype=float)
        if self.kind == "profile":
            if domain is None:
                raise ValueError("profile source needs the domain for the distance")
            d = domain.distance(x)
            out = self.C1 * d ** (-self.power)
            if self.smooth_part is not None:
                out = out + self.smooth_part(x)
            return out
        if self.kind == "constant":
            return np.full_like(x, self.const, dtype=float)
        if self.kind == "tabulated":
            return np.interp(x, self.grid.nodes, self.values)
        raise ValueError(f"unknown source kind {self.kind!r}")

    def on_grid(self, grid: GradedGrid) -> np.ndarray:
        """Nodal values; endpoint entries of a profile source are +inf."""
        if self.kind == "profile":
            d = grid.distances
            with np.errstate(divide="ignore"):
                out = self.C1 * d ** (-self.power)
            if self.smooth_part is not None:
                out = out + self.smooth_part(grid.nodes)
            return out
        return self(grid.nodes, grid.domain)

    def signature(self) -> tuple:
        vkey = None if self.values is None else hash(self.values.tobytes())
        skey = id(self.smooth_part) if self.smooth_part is not None else 0
        return (self.kind, self.C1, self.power, self.const, skey, vkey, self.tag)


# ---------------------------------------------------------------------------
# options and reports
# ---------------------------------------------------------------------------

@dataclass
class SolverOptions:
    solver_tolerance: float = 1e-8
    interior_tolerance: float = 1e-6
    max_iterations: int = 200
    jacobian_refresh: int = 5
    max_damping_halvings: int = 20
    probe_floor_factor: float = 10.0
    polish_iterations: int = 3


@dataclass
class SolveReport:
    solution: GridFunction
    iterations: int
    final_residual_norm: float
    R_used: float
    monotone_violation: float = 0.0
    converged: bool = True
    interior_increments: list = field(default_factory=list)
    interior_converged: bool = True
    blowup_coefficient: float = float("nan")


# ---------------------------------------------------------------------------
# discrete Hamiltonian
# ---------------------------------------------------------------------------

class UpwindHamiltonian:
    """Godunov upwind |Du|^m with profile-fitted one-sided differences.

    Plain one-sided quotients carry an O(h/d) relative error on the d^{-gamma}
    boundary layer, which biases the computed blow-up coefficient at any
    practical resolution.  Each one-sided difference is therefore scaled by
    the positive factor that renders it exact on A g_gamma(d) + B; the factors
    depend on the grid alone, tend to 1 away from the boundary, and keep every
    off-diagonal coupling sign, so the scheme remains monotone.
    """

    def __init__(self, grid: GradedGrid, gamma: float, m: float):
        self.grid = grid
        self.m = float(m)
        self.h = grid.spacings
        prof = GammaProfile(gamma)
        d = grid.distances
        gvals = np.empty(d.size)
        gvals[1:-1] = prof.of_distance(d[1:-1])
        gvals[0] = np.inf
        gvals[-1] = np.inf
        gp = np.abs(prof.derivative_of_distance(d[1:-1]))
        dg_minus = np.abs(gvals[1:-1] - gvals[:-2])
        dg_plus = np.abs(gvals[2:] - gvals[1:-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            km = gp * self.h[:-1] / dg_minus
            kp = gp * self.h[1:] / dg_plus
        km = np.where(np.isfinite(km) & (dg_minus > 0), km, 1.0)
        kp = np.where(np.isfinite(kp) & (dg_plus > 0), kp, 1.0)
        # the fitting only matters inside the graded layer; clip for safety
        # near the midpoint where the distance direction flips
        self.km = np.clip(km, 0.2, 5.0)
        self.kp = np.clip(kp, 0.2, 5.0)

    def slopes(self, u_full: np.ndarray):
        dm = self.km * (u_full[1:-1] - u_full[:-2]) / self.h[:-1]
        dp = self.kp * (u_full[2:] - u_full[1:-1]) / self.h[1:]
        return dm, dp

    def gradient_magnitude(self, u_full: np.ndarray) -> np.ndarray:
        dm, dp = self.slopes(u_full)
        return np.maximum.reduce([dm, -dp, np.zeros_like(dm)])

    def value(self, u_full: np.ndarray) -> np.ndarray:
        return self.gradient_magnitude(u_full) ** self.m

    def value_and_jacobian(self, u_full: np.ndarray):
        dm, dp = self.slopes(u_full)
        g = np.maximum.reduce([dm, -dp, np.zeros_like(dm)])
        H = g**self.m
        use_minus = (dm >= -dp) & (g > 0)
        use_plus = (~use_minus) & (g > 0)
        dH = np.where(g > 0, self.m * g ** (self.m - 1.0), 0.0)
        return H, dH, use_minus, use_plus


def godunov_gradient(u_full: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Unfitted max(D^- u, -D^+ u, 0): the raw upwind slope magnitude."""
    dm = (u_full[1:-1] - u_full[:-2]) / h[:-1]
    dp = (u_full[2:] - u_full[1:-1]) / h[1:]
    return np.maximum.reduce([dm, -dp, np.zeros_like(dm)])


# ---------------------------------------------------------------------------
# the truncated discrete system
# ---------------------------------------------------------------------------

class TruncatedSystem:
    """Residual and Jacobian of the discrete truncated problem at level R."""

    def __init__(self, params: ProblemParams, f: SourceTerm, R: float,
                 grid: GradedGrid, op: GridOperator | None = None,
                 A_left: float = 0.0, A_right: float = 0.0,
                 bulk_shift: float = 0.0):
        if params.lam <= 0.0:
            raise ValueError("the truncated problem requires lambda > 0")
        if not (0.5 < params.s < 1.0):
            raise ValueError("the solver requires s in (1/2, 1)")
        self.params = params
        self.grid = grid
        self.R = float(R)
        # the system is solved for v = u - bulk_shift: at small discounts the
        # c/lambda bulk would otherwise dominate every dot product and push
        # the attainable residual floor above the interior tolerances
        self.shift = float(bulk_shift)
        self.cap = self.R - self.shift
        self.op = op if op is not None else get_grid_operator(grid, params.s, fit_gamma=params.gamma)
        self.h = self.op.spacings
        fvals = f.on_grid(grid)
        self.rhs = np.minimum(fvals[1:-1], self.R) - params.lam * self.shift
        self.ni = grid.n_nodes - 2
        self.ham = UpwindHamiltonian(grid, params.gamma, params.m)
        self._edge_l, self._edge_r = self.op.edge_window_data(params.gamma)
        self.A_left = float(A_left)
        self.A_right = float(A_right)
        prof = GammaProfile(params.gamma)
        dist = grid.distances
        self._g_near = (
            float(prof.of_distance(dist[1])), float(prof.of_distance(dist[2])),
            float(prof.of_distance(dist[-2])), float(prof.of_distance(dist[-3])),
        )
        # comparison with the constant subsolution min(0, inf f / lam) for u,
        # shifted to the v-variable: iterates may be projected onto this bound
        # without losing the solution
        fmin = float(np.minimum(fvals[1:-1], self.R).min())
        self.lower_bound = min(0.0, fmin / params.lam) - self.shift

    def profile_coefficients(self, ui: np.ndarray):
        """Boundary profile coefficients measured from the two innermost nodes."""
        g1l, g2l, g1r, g2r = self._g_near
        al = (ui[0] - ui[1]) / (g1l - g2l)
        ar = (ui[-1] - ui[-2]) / (g1r - g2r)
        return max(al, 0.0), max(ar, 0.0)

    def full_vector(self, ui: np.ndarray) -> np.ndarray:
        u = np.empty(self.ni + 2)
        u[0] = self.cap
        u[-1] = self.cap
        u[1:-1] = ui
        return u

    def _operator_raw(self, ui, want_jac=False):
        p = self.params
        op = self.op
        (vec_l, dvec_l, m0_l), (vec_r, dvec_r, m0_r), window = op.capped_boundary_terms(
            p.gamma, float(ui[0]), float(ui[-1]), self.cap, self.A_left, self.A_right
        )
        raw = op.core_weights @ ui
        raw += vec_l - ui * m0_l
        raw += vec_r - ui * m0_r
        # boundary-adjacent rows: profile-paired window + fitted sliver
        el, er = self._edge_l, self._edge_r
        cl = el["ghat"] / el["denom"]
        cr = er["ghat"] / er["denom"]
        raw[0] += cl * ((window["left_value"] - ui[0]) + el["phi_next"] * (ui[1] - ui[0]))
        raw[0] += el["sliver"] * (ui[1] - ui[0])
        raw[-1] += cr * ((window["right_value"] - ui[-1]) + er["phi_next"] * (ui[-2] - ui[-1]))
        raw[-1] += er["sliver"] * (ui[-2] - ui[-1])
        if not want_jac:
            return raw, None
        delta = {
            "col0": dvec_l, "colN": dvec_r, "diag": -(m0_l + m0_r),
            "row0": {
                "u1": cl * (window["left_slope"] - 1.0 - el["phi_next"]) - el["sliver"],
                "u2": cl * el["phi_next"] + el["sliver"],
            },
            "rowN": {
                "uN": cr * (window["right_slope"] - 1.0 - er["phi_next"]) - er["sliver"],
                "uNm1": cr * er["phi_next"] + er["sliver"],
            },
        }
        return raw, delta

    def residual(self, ui: np.ndarray) -> np.ndarray:
        p = self.params
        raw, _ = self._operator_raw(ui)
        L = -self.op.C * raw
        u = self.full_vector(ui)
        H = self.ham.value(u)
        return p.lam * ui + L + H - self.rhs

    def residual_floor(self, ui: np.ndarray) -> np.ndarray:
        """Roundoff floor of |F_i|: eps times the magnitude of the summands.

        Near the boundary the operator terms reach 1e8 and beyond, so the
        raw residual cannot be driven below ~1e-8 there in double precision;
        convergence is judged against this componentwise floor.
        """
        p = self.params
        u = self.full_vector(ui)
        H = self.ham.value(u)
        absw = np.abs(self.op.core_weights) @ np.abs(ui)
        (vl, _, m0l), (vr, _, m0r), _ = self.op.capped_boundary_terms(
            p.gamma, float(ui[0]), float(ui[-1]), self.cap, self.A_left, self.A_right
        )
        bdry = np.abs(vl) + m0l * np.abs(ui) + np.abs(vr) + m0r * np.abs(ui)
        mag = (p.lam * np.abs(ui) + self.op.C * (absw + bdry) + H + np.abs(self.rhs))
        return 32.0 * np.finfo(float).eps * mag

    def jacobian(self, ui: np.ndarray) -> np.ndarray:
        p = self.params
        raw, delta = self._operator_raw(ui, want_jac=True)
        J = -self.op.C * self.op.core_weights.copy()
        J[:, 0] += -self.op.C * delta["col0"]
        J[:, -1] += -self.op.C * delta["colN"]
        idx = np.arange(self.ni)
        J[idx, idx] += -self.op.C * delta["diag"]
        J[0, 0] += -self.op.C * delta["row0"]["u1"]
        J[0, 1] += -self.op.C * delta["row0"]["u2"]
        J[-1, -1] += -self.op.C * delta["rowN"]["uN"]
        J[-1, -2] += -self.op.C * delta["rowN"]["uNm1"]
        J[idx, idx] += p.lam

        u = self.full_vector(ui)
        _, dH, use_minus, use_plus = self.ham.value_and_jacobian(u)
        sm = self.ham.km / self.h[:-1]
        sp = self.ham.kp / self.h[1:]
        J[idx, idx] += np.where(use_minus, dH * sm, 0.0)
        J[idx, idx] += np.where(use_plus, dH * sp, 0.0)
        km = idx[1:][use_minus[1:]]  # D^- couples to the left neighbor
        J[km, km - 1] -= (dH * sm)[1:][use_minus[1:]]
        kp = idx[:-1][use_plus[:-1]]  # -D^+ couples to the right neighbor
        J[kp, kp + 1] -= (dH * sp)[:-1][use_plus[:-1]]
        return J

    def scaled_norm(self, F: np.ndarray, floor: np.ndarray | None = None) -> float:
        scale = 1.0 + np.abs(self.rhs)
        if floor is None:
            return float(np.abs(F / scale).max())
        return float((np.maximum(np.abs(F) - floor, 0.0) / scale).max())


def _newton(system: TruncatedSystem, u0: np.ndarray, opts: SolverOptions):
    """Damped chord Newton, nonmonotone watchdog, Levenberg fallback.

    The residual norm is genuinely nonmonotone along the path to the root
    (the capped boundary model switches branches), so a strictly monotone
    line search can stall; up to ``watchdog_budget`` full steps are accepted
    without decrease, with the best iterate retained as a safeguard.
    """
    ui = np.array(u0, dtype=float)
    F = system.residual(ui)
    norm = system.scaled_norm(F)
    hist = [norm]
    best_u, best_norm = ui.copy(), norm
    lu = piv = None
    stale = opts.jacobian_refresh
    mu = 0.0
    watchdogs = 0
    polish_left = opts.polish_iterations
    it = 0
    while it < opts.max_iterations:
        it += 1
        if lu is None or stale >= opts.jacobian_refresh:
            J = system.jacobian(ui)
            if mu > 0.0:
                J[np.arange(system.ni), np.arange(system.ni)] += mu
            lu, piv = lu_factor(J, overwrite_a=True, check_finite=False)
            stale = 0
        step = lu_solve((lu, piv), -F, check_finite=False)
        if not np.all(np.isfinite(step)):
            mu = max(4.0 * mu, 1.0)
            stale = opts.jacobian_refresh
            continue
        ref = max(hist[-4:])
        alpha = 1.0
        accepted = False
        for _ in range(opts.max_damping_halvings):
            trial = np.maximum(ui + alpha * step, system.lower_bound)
            Ft = system.residual(trial)
            nt = system.scaled_norm(Ft)
            if np.isfinite(nt) and (nt <= ref * (1.0 - 1e-4 * alpha) or nt < opts.solver_tolerance):
                ui, F, norm = trial, Ft, nt
                accepted = True
                break
            alpha *= 0.5
        stale += 1
        if not accepted:
            if watchdogs < 8:
                # cross the residual bump: take the full step regardless
                watchdogs += 1
                ui = np.maximum(ui + step, system.lower_bound)
                F = system.residual(ui)
                norm = system.scaled_norm(F)
                stale = opts.jacobian_refresh
            else:
                mu = max(4.0 * mu, 1.0 + float(np.abs(F).max()))
                stale = opts.jacobian_refresh
                ui, F = best_u.copy(), system.residual(best_u)
                norm = system.scaled_norm(F)
                if mu > 1e14:
                    break
                continue
        else:
            mu = 0.0
        hist.append(norm)
        if norm < best_norm:
            best_u, best_norm = ui.copy(), norm
        floored = system.scaled_norm(F, system.residual_floor(ui))
        if floored <= opts.solver_tolerance:
            if polish_left > 0 and floored > 1e-13:
                polish_left -= 1
                stale = opts.jacobian_refresh  # fresh Jacobian for the polish
                continue
            break
    if best_norm < norm:
        ui, norm = best_u, best_norm
        F = system.residual(ui)
    final = system.scaled_norm(F, system.residual_floor(ui))
    return ui, it, final, F


def solve_truncated(
    params: ProblemParams,
    f: SourceTerm,
    R: float,
    grid: GradedGrid,
    opts: SolverOptions | None = None,
    warm_start: np.ndarray | None = None,
    bulk_shift: float = 0.0,
) -> SolveReport:
    """Solve the discrete truncated problem at level R.

    The report carries the nodal solution with Dirichlet boundary value R;
    monotone_violation is filled by ``solve_large`` when iterating in R.
    With ``bulk_shift`` = beta the system is solved for v = u - beta and the
    report's solution is v (the caller accounts for the shift); use this for
    small discounts, where u carries a c/lambda bulk.
    """
    opts = opts or SolverOptions()
    if float(R) < 0.0:
        raise ValueError("R must be nonnegative")
    system = TruncatedSystem(params, f, float(R), grid, bulk_shift=bulk_shift)
    if warm_start is not None:
        u0 = np.asarray(warm_start, dtype=float).copy()
        system.A_left, system.A_right = system.profile_coefficients(u0)
    else:
        # structure-aware start: the zero-gradient balance lam u = min(f, R)
        u0 = system.rhs / max(params.lam, 1e-8)
        u0 = np.minimum(u0, max(float(R), 1.0) / max(params.lam, 1e-8))

    # outer iteration on the frozen boundary-profile coefficients: the model
    # is affine in g_gamma with A measured from the converged iterate; frozen
    # A keeps the scheme monotone, and the fixed point makes the model exact
    # on bulk + A g_gamma
    total_iters = 0
    ui = u0
    res = np.inf
    for sweep in range(12):
        ui, iters, res, F = _newton(system, ui, opts)
        total_iters += iters
        al, ar = system.profile_coefficients(ui)
        da = abs(al - system.A_left) + abs(ar - system.A_right)
        scale = 1.0 + abs(al) + abs(ar)
        system.A_left, system.A_right = al, ar
        if da <= 1e-9 * scale:
            break
    if not np.isfinite(res) or res > opts.solver_tolerance:
        raise RuntimeError(
            f"truncated solve did not converge at R={R}: scaled residual {res:.3e} "
            f"after {total_iters} iterations"
        )
    gf = GridFunction(grid, system.full_vector(ui), Dirichlet(float(system.cap)))
    return SolveReport(
        solution=gf,
        iterations=total_iters,
        final_residual_norm=res,
        R_used=float(R),
    )


# ---------------------------------------------------------------------------
# the monotone limit
# ---------------------------------------------------------------------------

def _solve_with_substeps(params, f, R_prev, R, grid, opts, warm, depth=0, bulk_shift=0.0):
    """Truncated solve with geometric continuation when a level is too stiff."""
    try:
        return solve_truncated(params, f, R, grid, opts, warm_start=warm,
                               bulk_shift=bulk_shift)
    except RuntimeError:
        if depth >= 6:
            raise
        R_mid = np.sqrt(max(R_prev, R / 100.0) * R)
        mid = _solve_with_substeps(params, f, R_prev, R_mid, grid, opts, warm, depth + 1,
                                   bulk_shift)
        return _solve_with_substeps(
            params, f, R_mid, R, grid, opts, mid.solution.interior_values, depth + 1,
            bulk_shift,
        )


_large_cache: dict[tuple, SolveReport] = {}


def _large_cache_key(params, f, grid, r_schedule, opts):
    return (
        id(grid), params.s, params.m, params.lam, params.C1,
        f.signature(), tuple(float(r) for r in r_schedule),
        opts.solver_tolerance, opts.interior_tolerance,
    )


def solve_large(
    params: ProblemParams,
    f: SourceTerm,
    grid: GradedGrid,
    r_schedule=DEFAULT_R_SCHEDULE,
    opts: SolverOptions | None = None,
    warm_start: np.ndarray | None = None,
    use_cache: bool = True,
    bulk_shift: float = 0.0,
) -> SolveReport:
    """Monotone limit of truncated solves along an increasing R-schedule.

    Warm-starts each level from the previous one, tracks the worst nodewise
    decrease (monotone_violation) and the interior increments on the probe
    region d >= probe_floor; the output grid function carries the measured
    blow-up coefficient as its boundary model.
    """
    opts = opts or SolverOptions()
    r_schedule = [float(r) for r in r_schedule]
    if any(b <= a for a, b in zip(r_schedule, r_schedule[1:])):
        raise ValueError("r_schedule must be strictly increasing")
    key = _large_cache_key(params, f, grid, r_schedule, opts)
    if use_cache and warm_start is None and key in _large_cache:
        return _large_cache[key]

    probe_floor = opts.probe_floor_factor * grid.grid_floor
    d = grid.distances[1:-1]
    probe = d >= probe_floor
    prev = warm_start
    prev_probe = None
    violation = 0.0
    increments = []
    report = None
    R_prev = 0.0
    for R in r_schedule:
        report = _solve_with_substeps(params, f, R_prev, R, grid, opts, prev,
                                      bulk_shift=bulk_shift)
        R_prev = R
        ui = report.solution.interior_values
        if prev is not None:
            violation = max(violation, float(np.max(prev - ui)))
        if prev_probe is not None:
            increments.append(float(np.abs(ui[probe] - prev_probe).max()))
        prev = ui
        prev_probe = ui[probe].copy()
    interior_converged = bool(increments and increments[-1] <= opts.interior_tolerance)

    ratio, A = blowup_ratio_values(prev, params, grid)
    # the extension coefficient of the output is the local two-node one: the
    # operator's boundary extension must match the discrete profile at the
    # first nodes, while the fitted C0 (reported separately) extrapolates the
    # band and generally differs at the grid-resolution level
    A_ext = local_profile_coefficient(prev, params, grid)
    final = GridFunction(
        grid,
        report.solution.values.copy(),
        BlowupProfile(A_ext, params.gamma),
    )
    out = SolveReport(
        solution=final,
        iterations=report.iterations,
        final_residual_norm=report.final_residual_norm,
        R_used=r_schedule[-1],
        monotone_violation=violation,
        converged=True,
        interior_increments=increments,
        interior_converged=interior_converged,
        blowup_coefficient=A,
    )
    if use_cache and warm_start is None:
        if len(_large_cache) > 32:
            _large_cache.clear()
        _large_cache[key] = out
    return out


# ---------------------------------------------------------------------------
# profile extraction
# ---------------------------------------------------------------------------

def local_profile_coefficient(ui: np.ndarray, params: ProblemParams,
                              grid: GradedGrid, side: str = "left") -> float:
    """Blow-up coefficient matched to the two innermost nodal values."""
    prof = GammaProfile(params.gamma)
    d = grid.distances
    if side == "left":
        g1, g2 = prof.of_distance(d[1]), prof.of_distance(d[2])
        return max(float((ui[0] - ui[1]) / (g1 - g2)), 0.0)
    g1, g2 = prof.of_distance(d[-2]), prof.of_distance(d[-3])
    return max(float((ui[-1] - ui[-2]) / (g1 - g2)), 0.0)


def _ratio_fit(dvals: np.ndarray, ratios: np.ndarray):
    """Fit r(d) = C + A d^p over a p-grid; returns (C, A, p, sse)."""
    best = None
    for p in np.linspace(0.15, 1.8, 67):
        X = np.column_stack([np.ones_like(dvals), dvals**p])
        coef, res, *_ = np.linalg.lstsq(X, ratios, rcond=None)
        sse = float(np.sum((X @ coef - ratios) ** 2))
        if best is None or sse < best[3]:
            best = (float(coef[0]), float(coef[1]), float(p), sse)
    return best


def _log_slope_fit(dv: np.ndarray, uv: np.ndarray):
    """Critical-case limit of u / (-log d) via local log-slopes.

    The ratio itself converges only like 1/|log d| because of the additive
    normalization of u; the slope du/d(-log d) kills the constant and
    approaches the coefficient at an algebraic rate, fitted here as
    slope(d) = C + a d^theta over pairs one octave apart.
    """
    slopes, dmid = [], []
    for k in range(dv.size):
        k2 = int(np.searchsorted(dv, 2.0 * dv[k]))
        if k2 >= dv.size:
            break
        slopes.append((uv[k] - uv[k2]) / (np.log(dv[k2]) - np.log(dv[k])))
        dmid.append(np.sqrt(dv[k] * dv[k2]))
    slopes = np.asarray(slopes)
    dmid = np.asarray(dmid)
    if slopes.size < 4:
        raise ValueError("fewer than 4 slope pairs in the blow-up measurement band")
    # linear-in-d intercept: small-exponent power models are collinear over a
    # one-decade band and extrapolate wildly; the linear trend removal is a
    # mild, stable correction (the slopes vary by well under a percent here)
    X = np.column_stack([np.ones_like(dmid), dmid])
    coef, *_ = np.linalg.lstsq(X, slopes, rcond=None)
    return float(coef[0])


def blowup_ratio_values(ui: np.ndarray, params: ProblemParams, grid: GradedGrid,
                        band: tuple[float, float] | None = None):
    """(last ratio, extrapolated limit) of u/g_gamma on the near-boundary band."""
    d = grid.distances[1:-1]
    L = grid.domain.length
    if band is None:
        band = (max(10.0 * grid.grid_floor, 1e-3 * L), 1e-2 * L)
    prof = GammaProfile(params.gamma)
    mask = (d >= band[0]) & (d <= band[1])
    if params.gamma == 0.0:
        mask &= d < 1.0  # the log profile must be positive on the band
    if mask.sum() < 4:
        raise ValueError("fewer than 4 nodes in the blow-up measurement band")
    dv = d[mask]
    vals = ui[mask]
    order = np.argsort(dv)
    dv, vals = dv[order], vals[order]
    ratios = vals / prof.of_distance(dv)
    if params.gamma == 0.0:
        C = _log_slope_fit(dv, vals)
    else:
        C, A, p, _ = _ratio_fit(dv, ratios)
    return float(ratios[0]), float(C)


def blowup_ratio(u: GridFunction, params: ProblemParams,
                 band: tuple[float, float] | None = None):
    """Spec surface over a solved grid function."""
    return blowup_ratio_values(u.interior_values, params, u.grid, band)


@dataclass
class GradientProfileReport:
    max_normalized: float
    band: tuple[float, float]
    distances: np.ndarray
    normalized: np.ndarray


def gradient_bound_check(u: GridFunction, params: ProblemParams,
                         band: tuple[float, float] | None = None) -> GradientProfileReport:
    """Centered difference quotients scaled by the predicted boundary rate.

    Subcritical: |Du| d^{gamma+1} stays bounded; critical: |Du| d.
    """
    grid = u.grid
    x = grid.nodes
    d = grid.distances[1:-1]
    L = grid.domain.length
    if band is None:
        band = (10.0 * grid.grid_floor, 0.1 * L)
    vals = u.values
    du = (vals[2:] - vals[:-2]) / (x[2:] - x[:-2])
    expo = 1.0 if params.critical else params.gamma + 1.0
    normalized = np.abs(du) * d**expo
    mask = (d >= band[0]) & (d <= band[1])
    return GradientProfileReport(
        max_normalized=float(normalized[mask].max()),
        band=band,
        distances=d[mask],
        normalized=normalized[mask],
    )


def gamma_class_uniqueness_probe(
    params: ProblemParams,
    f: SourceTerm,
    grid: GradedGrid,
    schedule_a=DEFAULT_R_SCHEDULE,
    schedule_b=tuple(3.0 * 10.0**k for k in range(1, 8)),
    opts: SolverOptions | None = None,
    perturb_seed: int | None = None,
) -> float:
    """Sup-norm gap on the probe region between two independent solve paths.

    Uniqueness in the gamma-class makes the limit path-independent; the
    discrete analogue is run-to-run agreement across R-schedules and
    initial iterates.
    """
    opts = opts or SolverOptions()
    ra = solve_large(params, f, grid, schedule_a, opts, use_cache=False)
    warm = None
    if perturb_seed is not None:
        rng = np.random.default_rng(perturb_seed)
        warm = ra.solution.interior_values + rng.uniform(-1.0, 1.0, grid.n_nodes - 2)
    rb = solve_large(params, f, grid, schedule_b, opts, warm_start=warm, use_cache=False)
    d = grid.distances[1:-1]
    probe = d >= opts.probe_floor_factor * grid.grid_floor
    gap = np.abs(ra.solution.interior_values - rb.solution.interior_values)[probe]
    return float(gap.max())
