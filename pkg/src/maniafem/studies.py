"""Rate studies: interpolation errors, recovery-sequence terms, order fits.

The recovery sequence for the clamped energy is the nodal interpolant, and
its energy error splits into three pieces:

  value term   int chi((I_h v)')^6 [ ((I_h v)^3 - x)^2 - (v^3 - x)^2 ] dx
  slope term   int | chi((I_h v)')^6 - chi(v')^6 | (v^3 - x)^2 dx
  remainder    int chi(v')^6 (v^3 - x)^2 dx  <=  J(v)

The first two decay like h^(1+s-6a) and h^(s-5a) for profiles v whose
derivative has fractional smoothness s in L^p; the studies here measure
those orders by log-log regression over a mesh ladder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StudyError
from .functionals import (
    AdmissibleParams,
    CutoffParams,
    cutoff,
    energy_clamped,
    energy_mania_general,
)
from .mesh import Mesh1D, interpolate
from .quadrature import gauss_rule, graded_grid, integrate_cells
from .fractional import norm_wkp

__all__ = [
    "RateStudy",
    "fit_order",
    "make_rate_study",
    "power_fn",
    "interp_error",
    "value_mismatch_term",
    "slope_mismatch_term",
    "recovery_gap",
    "reference_energy",
]

CONVERGED_FLOOR = 1e-14
TAIL_DROP = 2  # coarsest meshes excluded from asymptotic fits


@dataclass(frozen=True)
class RateStudy:
    """One measured quantity over a mesh ladder plus its fitted order.

    ``rows`` holds (h, value, *extras) per mesh; the fit uses the first two
    columns on the ladder tail (the two coarsest meshes are dropped whenever
    at least five meshes are present).
    """

    target: str
    params: AdmissibleParams | None
    mesh_sizes: tuple[int, ...]
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    fitted_order: float
    fit_r2: float

    def __post_init__(self):
        if list(self.mesh_sizes) != sorted(set(self.mesh_sizes)):
            raise ValueError(f"mesh sizes must be strictly increasing: {self.mesh_sizes}")
        if len(self.rows) != len(self.mesh_sizes):
            raise ValueError(
                f"{len(self.rows)} rows for {len(self.mesh_sizes)} mesh sizes")
        if not (np.isnan(self.fit_r2) or 0.0 <= self.fit_r2 <= 1.0):
            raise ValueError(f"fit_r2 must lie in [0, 1], got {self.fit_r2}")


def fit_order(rows) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(h), with its r^2.

    Rows with value below 1e-14 are treated as converged to zero and
    dropped; at least three usable rows are required.
    """
    usable = [(h, v) for h, v, *_ in rows if v >= CONVERGED_FLOOR]
    if len(usable) < 3:
        raise StudyError(
            f"order fit needs at least 3 rows with positive values, got {len(usable)}"
        )
    log_h = np.log([h for h, _ in usable])
    log_v = np.log([v for _, v in usable])
    coeffs, residuals, *_ = np.polyfit(log_h, log_v, 1, full=True)
    ss_res = float(residuals[0]) if residuals.size else 0.0
    ss_tot = float(np.sum((log_v - log_v.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-20 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(coeffs[0]), float(min(max(r2, 0.0), 1.0))


def _tail(rows):
    return rows[TAIL_DROP:] if len(rows) >= 5 else rows


def make_rate_study(target, params, mesh_sizes, columns, rows) -> RateStudy:
    """Assemble a RateStudy, fitting |value| on the ladder tail."""
    fit_rows = [(h, abs(v)) for h, v, *_ in _tail(rows)]
    try:
        order, r2 = fit_order(fit_rows)
    except StudyError:
        order, r2 = float("nan"), 0.0
    return RateStudy(
        target=target,
        params=params,
        mesh_sizes=tuple(int(n) for n in mesh_sizes),
        columns=tuple(columns),
        rows=tuple(tuple(row) for row in rows),
        fitted_order=order,
        fit_r2=r2,
    )


def power_fn(q: float):
    """(x^q, q x^(q-1)) as a vectorized profile/derivative pair."""

    def fn(x):
        return np.power(x, q)

    def dfn(x):
        return q * np.power(x, q - 1.0)

    return fn, dfn


def interp_error(fn, mesh: Mesh1D, p: float, order: int, dfn=None, grid=None) -> float:
    """||v - I_h v|| in L^p (order 0) or W^{1,p} (order 1, needs dfn)."""
    if order not in (0, 1):
        raise ValueError(f"order must be 0 or 1, got {order}")
    f_h = interpolate(mesh, fn)
    if grid is None:
        grid = graded_grid(mesh)

    def err(x):
        return fn(x) - f_h.evaluate(x)

    if order == 0:
        return norm_wkp(err, 0, p, grid=grid)
    if dfn is None:
        raise ValueError("order 1 requires the derivative of v")

    def derr(x):
        return dfn(x) - f_h.slope_at(x)

    return norm_wkp(err, 1, p, grid=grid, derivative=derr)


def value_mismatch_term(fn, mesh: Mesh1D, params: CutoffParams, grid=None) -> float:
    """Energy cost of swapping v for I_h v inside the density weight.

    Signed: the integrand is a difference of squares under the clamped
    slope factor of the interpolant.
    """
    f_h = interpolate(mesh, fn)
    if grid is None:
        grid = graded_grid(mesh)
    rule = gauss_rule(8)

    def integrand(x):
        c6 = cutoff(params, f_h.slope_at(x)) ** 6
        return c6 * ((f_h.evaluate(x) ** 3 - x) ** 2 - (fn(x) ** 3 - x) ** 2)

    return integrate_cells(rule, integrand, grid)


def slope_mismatch_term(fn, dfn, mesh: Mesh1D, params: CutoffParams, grid=None) -> float:
    """Energy cost of clamping the interpolant's slope instead of v'."""
    f_h = interpolate(mesh, fn)
    if grid is None:
        grid = graded_grid(mesh)
    rule = gauss_rule(8)

    def integrand(x):
        ci = cutoff(params, f_h.slope_at(x)) ** 6
        cv = cutoff(params, dfn(x)) ** 6
        return np.abs(ci - cv) * (fn(x) ** 3 - x) ** 2

    return integrate_cells(rule, integrand, grid)


def recovery_gap(fn, mesh: Mesh1D, params: CutoffParams, reference: float) -> float:
    """Clamped energy of the interpolant minus the limit value J(v)."""
    return energy_clamped(interpolate(mesh, fn), params) - reference


def reference_energy(fn, dfn, n_finest: int) -> float:
    """J(v) on a study grid 8x finer than the finest mesh, with a two-grid
    agreement check (1% relative, with an absolute floor near zero)."""
    fine = energy_mania_general(fn, dfn, graded_grid(Mesh1D(n_finest), refine=8))
    coarse = energy_mania_general(fn, dfn, graded_grid(Mesh1D(n_finest), refine=4))
    if abs(fine - coarse) > max(0.01 * abs(fine), 1e-12):
        raise StudyError(
            f"reference energy failed the two-grid check: {fine} vs {coarse}"
        )
    return fine
