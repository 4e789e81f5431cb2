"""Experiment orchestration: stages, artifact persistence, run manifest.

Stages operate on a validated RunConfig and write CSV/text artifacts into
the output directory; the manifest lists every emitted file with its SHA-256
hash, the stage wall times and the configuration echo.  Re-running the same
configuration and seed reproduces identical artifact hashes (all floats are
printed at 17 significant digits and nothing is timestamped inside the
artifacts themselves).
"""

from __future__ import annotations

import hashlib
import io
import os
import time

import numpy as np

from . import __version__
from .barriers import (
    CompactSubsolution,
    UpperBarrier,
    check_differential_inequality,
    halfline_power_constant,
)
from .config import RunConfig
from .constants import c0_root
from .ergodic import characterize_constant, ergodic_residual, vanishing_discount
from .fracop import halfline_log_constant
from .geometry import IntervalDomain, build_graded_grid, grid_function_to_csv
from .solver import SolverOptions, SourceTerm, blowup_ratio, solve_large

STAGES = ("constants", "solve", "ergodic", "verify", "characterize")


def _fmt(x) -> str:
    return format(float(x), ".17g")


class PipelineContext:
    """Lazily built shared objects (grid, source, solutions) across stages."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.params = config.problem_params()
        g = config.values["grid"]
        self.domain = IntervalDomain(g["left"], g["right"])
        self.grid = build_graded_grid(
            self.domain, g["interior_count"], g["grading_exponent"], g["grid_floor"]
        )
        src = config.values["source"]
        if src["kind"] == "profile":
            self.source = SourceTerm.profile(self.params)
        elif src["kind"] == "constant":
            self.source = SourceTerm.constant(src["constant"])
        else:
            raise ValueError(f"unknown source kind {src['kind']!r}")
        sv = config.values["solver"]
        self.opts = SolverOptions(
            solver_tolerance=sv["solver_tolerance"],
            interior_tolerance=sv["interior_tolerance"],
            max_iterations=sv["max_iterations"],
        )
        self._r_schedule = sv["r_schedule"]
        self._large = None
        self._pair = None

    @property
    def r_schedule(self):
        if self._r_schedule is None:
            from .ergodic import default_r_schedule

            self._r_schedule = default_r_schedule(self.params, self.source, self.grid)
        return self._r_schedule

    def large_solution(self):
        if self._large is None:
            self._large = solve_large(
                self.params, self.source, self.grid, self.r_schedule, self.opts
            )
        return self._large

    def ergodic_pair(self):
        if self._pair is None:
            er = self.config.values["ergodic"]
            self._pair = vanishing_discount(
                self.params, self.source, self.grid,
                lambda_seq=er["lambda_seq"], x0=er["x0"], opts=self.opts,
                r_schedule=self.r_schedule, ergodic_tolerance=er["ergodic_tolerance"],
            )
        return self._pair


def stage_constants(ctx: PipelineContext) -> dict:
    p = ctx.params
    c_power = halfline_power_constant(p.s, -p.gamma) if p.gamma > 0 else 0.0
    c_log = halfline_log_constant(p.s)
    bc = c0_root(p)
    csv = "gamma,c_power,c_log,C0\n" + ",".join(
        _fmt(v) for v in (p.gamma, c_power, c_log, bc.C0)
    ) + "\n"
    return {"constants.csv": csv}


def stage_solve(ctx: PipelineContext) -> dict:
    rep = ctx.large_solution()
    last_ratio, fitted = blowup_ratio(rep.solution, ctx.params)
    report = "\n".join([
        f"R_used = {_fmt(rep.R_used)}",
        f"iterations = {rep.iterations}",
        f"final_residual_norm = {_fmt(rep.final_residual_norm)}",
        f"monotone_violation = {_fmt(rep.monotone_violation)}",
        f"interior_converged = {rep.interior_converged}",
        f"interior_increments = {','.join(_fmt(v) for v in rep.interior_increments)}",
        f"blowup_ratio_last = {_fmt(last_ratio)}",
        f"blowup_coefficient_fit = {_fmt(fitted)}",
    ]) + "\n"
    return {
        "solution.csv": grid_function_to_csv(rep.solution),
        "solve_report.txt": report,
    }


def stage_ergodic(ctx: PipelineContext) -> dict:
    pair = ctx.ergodic_pair()
    rep = ergodic_residual(pair)
    trace_csv = "lambda,trace\n" + "".join(
        f"{_fmt(l)},{_fmt(t)}\n" for l, t in pair.lambda_trace
    )
    report = "\n".join([
        f"constant_c = {_fmt(pair.constant_c)}",
        f"richardson_estimate = {_fmt(pair.richardson_estimate)}",
        f"x0 = {_fmt(pair.x0)}",
        f"converged = {pair.converged}",
        f"ergodic_residual_sup = {_fmt(rep.sup_residual)}",
        f"trace_increments = {','.join(_fmt(v) for v in pair.trace_increments)}",
        f"profile_increments = {','.join(_fmt(v) for v in pair.profile_increments)}",
    ]) + "\n"
    return {
        "ergodic_profile.csv": grid_function_to_csv(pair.profile),
        "ergodic_report.txt": report,
        "lambda_trace.csv": trace_csv,
    }


def stage_verify(ctx: PipelineContext) -> dict:
    p = ctx.params
    cfgb = ctx.config.values["barriers"]
    bc = c0_root(p)
    out = {}
    L = ctx.domain.length
    band = (max(1e-3 * L, 10 * ctx.grid.grid_floor), 0.1 * L)
    W = UpperBarrier(p, ctx.domain, bc.C0, eps=cfgb["eps"], cstar=cfgb["cstar"])
    rep = check_differential_inequality(W, ctx.source, band)
    out["barrier_upper_residuals.csv"] = rep.to_csv()
    summary = [
        f"upper_W_min_residual = {_fmt(rep.min_residual)}",
        f"upper_W_tolerance = {_fmt(rep.check_tolerance)}",
        f"upper_W_satisfied = {rep.satisfied}",
    ]
    if p.gamma > 0:
        beta = cfgb["beta_fraction"] * (2 * p.s - 1)
        c_beta = halfline_power_constant(p.s, beta)
        wr = CompactSubsolution(p, ctx.domain, cfgb["mu"], 3.0, beta)
        d_hi = min(0.9 * wr.support_distance, 0.45 * L)
        if d_hi > band[0]:
            rep2 = check_differential_inequality(
                wr, lambda x, d: np.zeros(np.size(x)), (band[0], d_hi),
                direction="sub", lam=0.0, lemma_bound={"c_beta": c_beta},
            )
            out["barrier_wR_residuals.csv"] = rep2.to_csv()
            summary += [
                f"wR_max_margin_quarter = {_fmt(rep2.extra['margin_quarter'].max())}",
                f"wR_satisfied = {rep2.satisfied}",
            ]
    # sandwich against the computed solution
    rep_large = ctx.large_solution()
    ui = rep_large.solution.interior_values
    Wn = W(ctx.grid.interior_nodes)
    viol = float(np.max(ui - Wn))
    summary.append(f"sandwich_upper_violation = {_fmt(viol)}")
    out["verify_report.txt"] = "\n".join(summary) + "\n"
    return out


def stage_characterize(ctx: PipelineContext) -> dict:
    pair = ctx.ergodic_pair()
    c = pair.constant_c
    res = characterize_constant(
        ctx.params, ctx.source, ctx.grid, (c - 1.0, c + 1.0), pair=pair
    )
    log_csv = "rho,witness\n" + "".join(
        f"{_fmt(r)},{w or ''}\n" for r, w in res.witness_log
    )
    report = "\n".join([
        f"c_star_estimate = {_fmt(res.c_star_estimate)}",
        f"constant_c = {_fmt(c)}",
        f"difference = {_fmt(abs(res.c_star_estimate - c))}",
        f"tolerance = {_fmt(res.tolerance)}",
    ]) + "\n"
    return {"characterize_report.txt": report, "witness_log.csv": log_csv}


_STAGE_FUNCS = {
    "constants": stage_constants,
    "solve": stage_solve,
    "ergodic": stage_ergodic,
    "verify": stage_verify,
    "characterize": stage_characterize,
}

_STAGE_DEPS = {"ergodic": ("solve",), "characterize": ("ergodic",), "verify": ("solve",)}


def resolve_stages(stages) -> list[str]:
    want = []
    for st in stages:
        if st not in _STAGE_FUNCS:
            raise ValueError(f"unknown stage {st!r}; valid: {', '.join(STAGES)}")
        for dep in _STAGE_DEPS.get(st, ()):
            if dep not in want:
                want.append(dep)
        if st not in want:
            want.append(st)
    return [st for st in STAGES if st in want]


def run_pipeline(config: RunConfig, stages, out_dir: str | None = None) -> dict:
    """Execute the requested stages in order and persist artifacts + manifest.

    Returns the manifest as a dict; a stage failure still writes the manifest
    with the partial state recorded.
    """
    stages = resolve_stages(stages)
    out_dir = out_dir or config.values["output"]["directory"]
    os.makedirs(out_dir, exist_ok=True)
    ctx = PipelineContext(config)
    artifacts = {}
    timings = {}
    failure = None
    for st in stages:
        t0 = time.perf_counter()
        try:
            artifacts.update(_STAGE_FUNCS[st](ctx))
        except Exception as exc:  # manifest records the partial state
            failure = (st, f"{type(exc).__name__}: {exc}")
            timings[st] = time.perf_counter() - t0
            break
        timings[st] = time.perf_counter() - t0

    hashes = {}
    for name, payload in artifacts.items():
        path = os.path.join(out_dir, name)
        data = payload.encode() if isinstance(payload, str) else payload
        with open(path, "wb") as fh:
            fh.write(data)
        hashes[name] = hashlib.sha256(data).hexdigest()

    manifest = {
        "version": __version__,
        "stages": stages,
        "seed": config.values["run"]["seed"],
        "artifacts": hashes,
        "timings": {k: round(v, 3) for k, v in timings.items()},
        "failure": failure,
        "config": config.echo(),
    }
    buf = io.StringIO()
    buf.write(f"version = {manifest['version']}\n")
    buf.write(f"stages = {','.join(stages)}\n")
    buf.write(f"seed = {manifest['seed']}\n")
    for name in sorted(hashes):
        buf.write(f"artifact {name} sha256 {hashes[name]}\n")
    for st in stages:
        if st in timings:
            buf.write(f"timing {st} {timings[st]:.3f}s\n")
    if failure:
        buf.write(f"failure {failure[0]}: {failure[1]}\n")
    buf.write("\n# configuration echo\n")
    for line in manifest["config"].splitlines():
        buf.write(f"# {line}\n")
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write(buf.getvalue())
    return manifest
