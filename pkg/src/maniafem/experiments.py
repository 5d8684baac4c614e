"""Headline experiments: gap demonstration, convergence of minima, rate studies.

Every experiment is deterministic for a fixed configuration, reports are
written without timestamps, and floating-point accumulation order is fixed,
so repeated runs produce byte-identical files.

Default parameter point: (s, p, alpha) = (0.2, 1.1, 0.035).  This sits
comfortably inside every required regime -- (2/3+s)p = 0.9533 < 1,
sp = 0.22 < 1, alpha < min{(1+s)/6, s/5} = 0.04 -- with alpha near its
ceiling so the clamp is as active as the theory allows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConsistencyError
from .fractional import norm_wkp, seminorm_w1sp
from .functionals import AdmissibleParams, CutoffParams, energy_clamped
from .mesh import Mesh1D, interpolate
from .optimize import (
    SolveConfig,
    SolveResult,
    initial_values,
    minimize_clamped,
    minimize_from,
    prolongate,
)
from .quadrature import graded_grid
from .studies import (
    RateStudy,
    interp_error,
    make_rate_study,
    power_fn,
    recovery_gap,
    slope_mismatch_term,
    value_mismatch_term,
)

__all__ = [
    "ExperimentConfig",
    "GapReport",
    "default_params",
    "run_gap_demo",
    "run_min_convergence",
    "run_interp_rates",
    "run_inverse_study",
    "run_split_rates",
    "run_recovery",
    "run_all",
    "write_csv",
]

DEFAULT_MESH_SIZES = (8, 16, 32, 64, 128, 256, 512, 1024)

# Ladder solves report energies, and those plateau to ~6 digits within a few
# thousand steps even when the 1e-9 gradient tolerance is out of reach for a
# first-order method at N = 1024.  The experiment default caps the budget
# there; convergence flags stay part of the record.
LADDER_MAX_ITERS = 20_000

# pass thresholds used both by run_all and by the acceptance suite
RAW_FLOOR_MIN = 1e-3
MIN_CONV_FINAL_FACTOR = 0.1
INTERP_LP_MIN_ORDER = 1.15
INTERP_W1P_MIN_ORDER = 0.15
INTERP_MIN_R2 = 0.95
INVERSE_MAX_OVER_MEDIAN = 1.5
HILBERT_VARIANT_BETA = 0.4
SPLIT_ORDER_SLACK = 0.1
SPLIT_MIN_R2 = 0.9
RECOVERY_TOL = 1e-3
SLOPE_PROBE_EXPONENT = 0.45


def default_params() -> AdmissibleParams:
    return AdmissibleParams(s=0.2, p=1.1, alpha=0.035)


@dataclass(frozen=True)
class ExperimentConfig:
    params: AdmissibleParams = field(default_factory=default_params)
    mesh_sizes: tuple[int, ...] = DEFAULT_MESH_SIZES
    solver: SolveConfig = field(default_factory=lambda: SolveConfig(max_iters=LADDER_MAX_ITERS))
    seed: int = 0
    output_dir: str = "reports"
    repro: bool = False

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.mesh_sizes)
        if not sizes:
            raise ValueError("mesh_sizes must be nonempty")
        if any(n < 2 or n & (n - 1) for n in sizes):
            raise ValueError(f"mesh sizes must be powers of 2 >= 2 for nesting, got {sizes}")
        if list(sizes) != sorted(set(sizes)):
            raise ValueError(f"mesh sizes must be strictly increasing, got {sizes}")
        object.__setattr__(self, "mesh_sizes", sizes)


@dataclass(frozen=True)
class GapReport:
    mesh_sizes: tuple[int, ...]
    raw_min_energies: tuple[float, ...]
    clamped_min_energies: tuple[float, ...]
    raw_floor: float
    clamped_trend_order: float


def _ladder_clamped(config: ExperimentConfig) -> list[SolveResult]:
    """Clamped solves over the ladder: continuation seed plus the interpolant
    of x^(1/3) as a second seed per mesh, keeping the better result."""
    no_cont = replace(config.solver, continuation=False)
    results: list[SolveResult] = []
    prev: SolveResult | None = None
    for n in config.mesh_sizes:
        mesh = Mesh1D(n)
        params_h = CutoffParams(config.params.alpha, mesh.h)
        if prev is None:
            candidates = [minimize_clamped(mesh, params_h, config.solver)]
        else:
            start = prolongate(prev.minimizer, mesh).nodal_values
            candidates = [minimize_from(mesh, start, no_cont, params_h)]
        candidates.append(
            minimize_from(mesh, initial_values(mesh, "interp_root"), no_cont, params_h)
        )
        best = min(candidates, key=lambda r: r.energy)
        results.append(best)
        prev = best
    return results


def _ladder_raw(config: ExperimentConfig) -> list[SolveResult]:
    """Raw solves from both plain initializers, plus the prolongated previous
    best so the reported minima are non-increasing over nested meshes."""
    no_cont = replace(config.solver, continuation=False)
    results: list[SolveResult] = []
    prev: SolveResult | None = None
    for n in config.mesh_sizes:
        mesh = Mesh1D(n)
        candidates = [
            minimize_from(mesh, initial_values(mesh, kind), no_cont)
            for kind in ("linear_ramp", "interp_root")
        ]
        if prev is not None:
            candidates.append(
                minimize_from(mesh, prolongate(prev.minimizer, mesh).nodal_values, no_cont)
            )
        best = min(candidates, key=lambda r: r.energy)
        results.append(best)
        prev = best
    return results


def run_gap_demo(config: ExperimentConfig) -> GapReport:
    """Raw minima stay bounded away from zero while clamped minima decay."""
    raw = _ladder_raw(config)
    clamped = _ladder_clamped(config)
    raw_e = [r.energy for r in raw]
    clamped_e = [r.energy for r in clamped]
    for n, er, ee in zip(config.mesh_sizes, raw_e, clamped_e):
        if not (np.isfinite(er) and np.isfinite(ee) and er >= 0 and ee >= 0):
            raise ConsistencyError(f"non-finite or negative energy at N={n}")
        if ee > er:
            raise ConsistencyError(
                f"clamped minimum {ee} exceeds raw minimum {er} at N={n}"
            )
    if any(b > a for a, b in zip(raw_e, raw_e[1:])):
        raise ConsistencyError(f"raw minima increased along the ladder: {raw_e}")
    trend = make_rate_study(
        "gap_clamped_trend", config.params, config.mesh_sizes,
        ("h", "value"), [(1.0 / n, e) for n, e in zip(config.mesh_sizes, clamped_e)],
    )
    return GapReport(
        mesh_sizes=config.mesh_sizes,
        raw_min_energies=tuple(raw_e),
        clamped_min_energies=tuple(clamped_e),
        raw_floor=min(raw_e),
        clamped_trend_order=trend.fitted_order,
    )


def gap_passes(report: GapReport) -> bool:
    return (
        report.raw_floor >= RAW_FLOOR_MIN
        and report.clamped_min_energies[-1] < report.raw_floor
    )


def run_min_convergence(config: ExperimentConfig) -> RateStudy:
    """Clamped minimum values over the ladder, with the interpolant energy
    (the sandwich bound) and the W^{1,p} distance to x^(1/3) as diagnostics.

    The distance column is reported, never asserted: the theory guarantees
    convergence of the minimum values, not of the minimizers.
    """
    results = _ladder_clamped(config)
    fn, dfn = power_fn(1.0 / 3.0)
    p = config.params.p
    rows = []
    for n, res in zip(config.mesh_sizes, results):
        mesh = Mesh1D(n)
        params_h = CutoffParams(config.params.alpha, mesh.h)
        interp_energy = energy_clamped(interpolate(mesh, fn), params_h)
        grid = graded_grid(mesh)
        u_h = res.minimizer

        def err(x):
            return u_h.evaluate(x) - fn(x)

        def derr(x):
            return u_h.slope_at(x) - dfn(x)

        dist = norm_wkp(err, 1, p, grid=grid, derivative=derr)
        rows.append((mesh.h, res.energy, interp_energy, dist))
    return make_rate_study(
        "min_convergence", config.params, config.mesh_sizes,
        ("h", "value", "interp_energy", "w1p_distance"), rows,
    )


def min_convergence_passes(study: RateStudy) -> bool:
    values = [row[1] for row in study.rows]
    sandwich = all(0.0 <= v <= row[2] for v, row in zip(values, study.rows))
    nonincreasing = all(b <= a for a, b in zip(values, values[1:]))
    return sandwich and nonincreasing and values[-1] <= MIN_CONV_FINAL_FACTOR * values[0]


def run_interp_rates(config: ExperimentConfig) -> dict[str, RateStudy]:
    """Nodal-interpolation error rates for x^(1/3) in L^p and W^{1,p}."""
    fn, dfn = power_fn(1.0 / 3.0)
    p = config.params.p
    rows_lp, rows_w1p = [], []
    for n in config.mesh_sizes:
        mesh = Mesh1D(n)
        grid = graded_grid(mesh)
        rows_lp.append((mesh.h, interp_error(fn, mesh, p, 0, grid=grid)))
        rows_w1p.append((mesh.h, interp_error(fn, mesh, p, 1, dfn=dfn, grid=grid)))
    return {
        "interp_lp": make_rate_study(
            "interp_lp", config.params, config.mesh_sizes, ("h", "value"), rows_lp),
        "interp_w1p": make_rate_study(
            "interp_w1p", config.params, config.mesh_sizes, ("h", "value"), rows_w1p),
    }


def interp_passes(studies: dict[str, RateStudy]) -> bool:
    lp, w1p = studies["interp_lp"], studies["interp_w1p"]
    return (
        lp.fitted_order >= INTERP_LP_MIN_ORDER and lp.fit_r2 >= INTERP_MIN_R2
        and w1p.fitted_order >= INTERP_W1P_MIN_ORDER and w1p.fit_r2 >= INTERP_MIN_R2
    )


def _inverse_rows(mesh_sizes, s: float, p: float):
    fn, _ = power_fn(1.0 / 3.0)
    rows = []
    for n in mesh_sizes:
        mesh = Mesh1D(n)
        f_h = interpolate(mesh, fn)
        ratio = seminorm_w1sp(f_h, s, p).value / (mesh.h**-s * norm_wkp(f_h, 1, p))
        rows.append((mesh.h, ratio))
    return rows


def run_inverse_study(config: ExperimentConfig) -> dict[str, RateStudy]:
    """Boundedness of [v_h]_{W^{1+s,p}} / (h^-s ||v_h||_{W^{1,p}}) for the
    interpolant of x^(1/3), plus the p = 2, beta = 0.4 Hilbert-space variant."""
    s, p = config.params.s, config.params.p
    return {
        "inverse_ratio": make_rate_study(
            "inverse_ratio", config.params, config.mesh_sizes, ("h", "value"),
            _inverse_rows(config.mesh_sizes, s, p)),
        "inverse_ratio_h1": make_rate_study(
            "inverse_ratio_h1", None, config.mesh_sizes, ("h", "value"),
            _inverse_rows(config.mesh_sizes, HILBERT_VARIANT_BETA, 2.0)),
    }


def inverse_passes(studies: dict[str, RateStudy]) -> bool:
    for study in studies.values():
        values = [row[1] for row in study.rows]
        if max(values) > INVERSE_MAX_OVER_MEDIAN * float(np.median(values)):
            return False
    return True


def run_split_rates(config: ExperimentConfig) -> dict[str, RateStudy]:
    """Decay of the two recovery-split terms: the value term probed at
    x^(1/3) (where the density weight degenerates helpfully) and the slope
    term probed at x^0.45 (a non-degenerate profile in the same regime)."""
    alpha = config.params.alpha
    rows_value, rows_slope = [], []
    fn_root, _ = power_fn(1.0 / 3.0)
    fn_q, dfn_q = power_fn(SLOPE_PROBE_EXPONENT)
    for n in config.mesh_sizes:
        mesh = Mesh1D(n)
        params_h = CutoffParams(alpha, mesh.h)
        grid = graded_grid(mesh)
        rows_value.append((mesh.h, value_mismatch_term(fn_root, mesh, params_h, grid=grid)))
        rows_slope.append((mesh.h, slope_mismatch_term(fn_q, dfn_q, mesh, params_h, grid=grid)))
    return {
        "value_term": make_rate_study(
            "value_term", config.params, config.mesh_sizes, ("h", "value"), rows_value),
        "slope_term": make_rate_study(
            "slope_term", config.params, config.mesh_sizes, ("h", "value"), rows_slope),
    }


def split_rates_passes(studies: dict[str, RateStudy], params: AdmissibleParams) -> bool:
    value_bound = 1.0 + params.s - 6.0 * params.alpha - SPLIT_ORDER_SLACK
    slope_bound = params.s - 5.0 * params.alpha - SPLIT_ORDER_SLACK
    value_t, slope_t = studies["value_term"], studies["slope_term"]
    tail = [abs(r[1]) for r in slope_t.rows[2:]] if len(slope_t.rows) >= 5 else [
        abs(r[1]) for r in slope_t.rows]
    decreasing = all(b < a for a, b in zip(tail, tail[1:]))
    return (
        value_t.fitted_order >= value_bound and value_t.fit_r2 >= SPLIT_MIN_R2
        and slope_t.fitted_order >= slope_bound and slope_t.fit_r2 >= SPLIT_MIN_R2
        and decreasing
    )


def run_recovery(config: ExperimentConfig) -> RateStudy:
    """Clamped energy of the interpolated minimizer against its limit 0."""
    fn, _ = power_fn(1.0 / 3.0)
    rows = []
    for n in config.mesh_sizes:
        mesh = Mesh1D(n)
        params_h = CutoffParams(config.params.alpha, mesh.h)
        rows.append((mesh.h, recovery_gap(fn, mesh, params_h, reference=0.0)))
    return make_rate_study(
        "recovery_gap", config.params, config.mesh_sizes, ("h", "value"), rows)


def recovery_passes(study: RateStudy) -> bool:
    values = [row[1] for row in study.rows]
    return all(b < a for a, b in zip(values, values[1:])) and values[-1] <= RECOVERY_TOL


def _study_payload(study: RateStudy, passed: bool) -> dict:
    return {
        "fitted_order": study.fitted_order,
        "r2": study.fit_r2,
        "pass": passed,
        "columns": list(study.columns),
        "rows": [list(row) for row in study.rows],
    }


def write_csv(path: Path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format(x, ".17g") for x in row))
    path.write_text("\n".join(lines) + "\n")


def run_all(config: ExperimentConfig) -> dict:
    """Run every study, write one CSV per study plus a JSON summary, and
    return the bundle.  Individual study failures are recorded and mark the
    bundle partial instead of aborting the rest."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"partial": False, "studies": {}}
    csv_jobs: list[tuple[str, tuple, tuple]] = []

    def attempt(name, runner):
        try:
            return runner()
        except Exception as exc:  # noqa: BLE001 - studies are independent
            summary["partial"] = True
            summary["studies"][name] = {"error": f"{type(exc).__name__}: {exc}", "pass": False}
            return None

    gap = attempt("gap_demo", lambda: run_gap_demo(config))
    if gap is not None:
        rows = list(zip([1.0 / n for n in gap.mesh_sizes],
                        gap.raw_min_energies, gap.clamped_min_energies))
        summary["studies"]["gap_demo"] = {
            "raw_floor": gap.raw_floor,
            "clamped_trend_order": gap.clamped_trend_order,
            "pass": gap_passes(gap),
            "columns": ["h", "value", "clamped_value"],
            "rows": [list(r) for r in rows],
        }
        csv_jobs.append(("gap_demo", ("h", "value", "clamped_value"), rows))

    minconv = attempt("min_convergence", lambda: run_min_convergence(config))
    if minconv is not None:
        summary["studies"]["min_convergence"] = _study_payload(
            minconv, min_convergence_passes(minconv))
        csv_jobs.append(("min_convergence", minconv.columns, minconv.rows))

    interp = attempt("interp_rates", lambda: run_interp_rates(config))
    if interp is not None:
        ok = interp_passes(interp)
        for name, study in interp.items():
            summary["studies"][name] = _study_payload(study, ok)
            csv_jobs.append((name, study.columns, study.rows))

    inverse = attempt("inverse_study", lambda: run_inverse_study(config))
    if inverse is not None:
        ok = inverse_passes(inverse)
        for name, study in inverse.items():
            summary["studies"][name] = _study_payload(study, ok)
            csv_jobs.append((name, study.columns, study.rows))

    split = attempt("split_rates", lambda: run_split_rates(config))
    if split is not None:
        ok = split_rates_passes(split, config.params)
        for name, study in split.items():
            summary["studies"][name] = _study_payload(study, ok)
            csv_jobs.append((name, study.columns, study.rows))

    recovery = attempt("recovery_gap", lambda: run_recovery(config))
    if recovery is not None:
        summary["studies"]["recovery_gap"] = _study_payload(
            recovery, recovery_passes(recovery))
        csv_jobs.append(("recovery_gap", recovery.columns, recovery.rows))

    for name, columns, rows in csv_jobs:
        write_csv(out / f"{name}.csv", columns, rows)

    summary["config"] = {
        "s": config.params.s,
        "p": config.params.p,
        "alpha": config.params.alpha,
        "mesh_sizes": list(config.mesh_sizes),
        "seed": config.seed,
        "repro": config.repro,
        "grad_tol": config.solver.grad_tol,
        "max_iters": config.solver.max_iters,
    }
    summary["all_pass"] = all(
        entry.get("pass", False) for entry in summary["studies"].values()
    ) and not summary["partial"]
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
