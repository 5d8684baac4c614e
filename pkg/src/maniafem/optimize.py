"""Descent solvers for the clamped and raw energies over interior nodal values.

The energies are nonconvex with flat clamped regions, so the solver is kept
deliberately simple and robust: steepest descent with Armijo backtracking,
a Barzilai-Borwein initial trial step for the line search, and mesh
continuation (prolongating the converged coarse solution) as globalization.
Boundary values are pinned structurally: the iterate is the interior vector.

Non-convergence within the iteration budget is reported, not raised; the gap
demonstration needs the reached energy either way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functionals import CutoffParams, fe_objective
from .mesh import FeFunction, Mesh1D

__all__ = [
    "SolveConfig",
    "SolveResult",
    "minimize_clamped",
    "minimize_mania",
    "minimize_from",
    "minimize_multistart",
    "prolongate",
    "initial_values",
]

INITIALIZERS = ("linear_ramp", "interp_root", "coarse_continuation")
_MIN_STEP = 1e-20


@dataclass(frozen=True)
class SolveConfig:
    grad_tol: float = 1e-9
    max_iters: int = 100_000
    step_shrink: float = 0.5
    armijo_c: float = 1e-4
    continuation: bool = True
    initializer: str = "interp_root"

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if not self.max_iters > 0:
            raise ValueError("max_iters must be positive")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")
        if not 0.0 < self.armijo_c <= 0.5:
            raise ValueError("armijo_c must lie in (0, 1/2]")
        if self.initializer not in INITIALIZERS:
            raise ValueError(f"initializer must be one of {INITIALIZERS}")


@dataclass(frozen=True)
class SolveResult:
    minimizer: FeFunction
    energy: float
    grad_norm: float
    iters: int
    converged: bool
    history: list[tuple[int, float]] = field(repr=False, default_factory=list)


def initial_values(mesh: Mesh1D, kind: str) -> np.ndarray:
    """Full nodal vector for a named starting point.

    linear_ramp is the identity (the pseudo-minimizer basin of the raw
    energy); interp_root interpolates x^(1/3) (the favorable basin).
    """
    if kind in ("interp_root", "coarse_continuation"):
        return mesh.nodes ** (1.0 / 3.0)
    if kind == "linear_ramp":
        return mesh.nodes.copy()
    raise ValueError(f"unknown initializer {kind!r}")


def prolongate(coarse: FeFunction, fine_mesh: Mesh1D) -> FeFunction:
    """Nodal interpolant of a coarse function on a nested finer mesh."""
    ratio, rem = divmod(fine_mesh.n_elements, coarse.mesh.n_elements)
    if rem != 0 or ratio < 1:
        raise ValueError(
            f"meshes are not nested: {fine_mesh.n_elements} elements over "
            f"{coarse.mesh.n_elements}"
        )
    vals = np.asarray(coarse.evaluate(fine_mesh.nodes), dtype=float)
    vals[::ratio] = coarse.nodal_values  # shared nodes reproduce bitwise
    return FeFunction(fine_mesh, vals, bc_flag=coarse.bc_flag)


def _descend(energy, grad, v0: np.ndarray, config: SolveConfig):
    """Armijo-backtracked steepest descent with a BB trial step."""
    v = np.array(v0, dtype=float)
    e = energy(v)
    if not np.isfinite(e):
        raise FloatingPointError(f"starting energy is not finite: {e}")
    g = grad(v)
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0
    step = 1.0 / max(1.0, float(np.linalg.norm(g)))
    history = [(0, e)]
    iters = 0
    while iters < config.max_iters and gnorm > config.grad_tol:
        gg = float(g @ g)
        trial = step
        v_new = None
        e_new = e
        while trial > _MIN_STEP:
            cand = v - trial * g
            e_cand = energy(cand)
            if np.isfinite(e_cand) and e_cand <= e - config.armijo_c * trial * gg:
                v_new, e_new = cand, e_cand
                break
            trial *= config.step_shrink
        if v_new is None:
            break  # no admissible step: best explained as a kink or the floor
        g_new = grad(v_new)
        sv = v_new - v
        yv = g_new - g
        sy = float(sv @ yv)
        step = float(sv @ sv) / sy if sy > 0 else trial / config.step_shrink
        step = min(max(step, 1e-16), 1e16)
        v, e, g = v_new, e_new, g_new
        gnorm = float(np.max(np.abs(g)))
        iters += 1
        history.append((iters, e))
    return v, e, gnorm, iters, gnorm <= config.grad_tol, history


def minimize_from(mesh: Mesh1D, start_values, config: SolveConfig | None = None,
                  params: CutoffParams | None = None) -> SolveResult:
    """Single descent from given full nodal values; clamped if params given.

    The starting boundary values are replaced by the pinned 0 and 1.
    """
    config = config or SolveConfig()
    clamp = None
    if params is not None:
        if params.tied and params.h != mesh.h:
            raise ValueError(
                f"cutoff level is tied to the mesh: params.h = {params.h} "
                f"but mesh.h = {mesh.h}"
            )
        clamp = params.clamp
    energy, gradient = fe_objective(mesh, clamp)
    start = np.asarray(start_values, dtype=float)[1:-1]
    v, e, gnorm, iters, converged, history = _descend(energy, gradient, start, config)
    return SolveResult(
        minimizer=FeFunction.from_interior(mesh, v),
        energy=e,
        grad_norm=gnorm,
        iters=iters,
        converged=converged,
        history=history,
    )


def _minimize(mesh: Mesh1D, config: SolveConfig, params: CutoffParams | None) -> SolveResult:
    continuation = config.continuation or config.initializer == "coarse_continuation"
    if continuation and mesh.n_elements > 2 and mesh.n_elements % 2 == 0:
        coarse = Mesh1D(mesh.n_elements // 2)
        coarse_params = None
        if params is not None:
            coarse_params = CutoffParams(params.alpha, coarse.h)
        coarse_result = _minimize(coarse, config, coarse_params)
        start = prolongate(coarse_result.minimizer, mesh).nodal_values
    else:
        start = initial_values(mesh, config.initializer)
    return minimize_from(mesh, start, config, params)


def minimize_clamped(mesh: Mesh1D, params: CutoffParams,
                     config: SolveConfig | None = None) -> SolveResult:
    """Minimize the clamped energy over the interior nodal values.

    With continuation enabled the starting iterate on mesh N is the
    prolongated solution from mesh N/2 (base case N = 2 uses the configured
    initializer), with the cutoff level re-tied to each mesh.
    """
    config = config or SolveConfig()
    if params.tied and params.h != mesh.h:
        raise ValueError(
            f"cutoff level is tied to the mesh: params.h = {params.h} but mesh.h = {mesh.h}"
        )
    return _minimize(mesh, config, params)


def minimize_mania(mesh: Mesh1D, config: SolveConfig | None = None) -> SolveResult:
    """Minimize the raw energy; identical contract with no clamp anywhere."""
    config = config or SolveConfig()
    return _minimize(mesh, config, None)


def minimize_multistart(mesh: Mesh1D, params: CutoffParams | None = None,
                        config: SolveConfig | None = None, n_starts: int = 16,
                        amplitude: float = 0.2, seed: int = 0) -> SolveResult:
    """Seeded multi-start around the linear ramp; lowest energy wins, ties by
    start index.  Start 0 is the unperturbed ramp."""
    config = config or SolveConfig()
    rng = np.random.default_rng(seed)
    base = initial_values(mesh, "linear_ramp")
    best: SolveResult | None = None
    for i in range(n_starts):
        start = base.copy()
        if i > 0:
            start[1:-1] += rng.uniform(-amplitude, amplitude, mesh.n_elements - 1)
        result = minimize_from(mesh, start, config, params)
        if best is None or result.energy < best.energy:
            best = result
    return best
