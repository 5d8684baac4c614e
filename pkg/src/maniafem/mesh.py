"""Uniform 1-D meshes and conforming piecewise-linear finite element functions.

The finite element space used throughout is the set of continuous functions
on [0, 1] that are linear on every mesh interval and satisfy v(0) = 0,
v(1) = 1.  A function is represented by its nodal values, which for hat
basis functions coincide with the basis coefficients, so the optimizer's
variable vector is the function representation itself.

All types are immutable after construction and every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EvaluationError

__all__ = ["Mesh1D", "ElementRef", "FeFunction", "interpolate"]


@dataclass(frozen=True)
class ElementRef:
    """One mesh interval: index k and its bounds [x_k, x_{k+1}]."""

    index: int
    lower: float
    upper: float


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of [0, 1] into ``n_elements`` intervals of size h."""

    n_elements: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        n = self.n_elements
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"n_elements must be a positive integer, got {n!r}")
        nodes = np.linspace(0.0, 1.0, n + 1)
        nodes.setflags(write=False)
        object.__setattr__(self, "n_elements", int(n))
        object.__setattr__(self, "h", 1.0 / n)
        object.__setattr__(self, "nodes", nodes)

    def element_indices(self, y) -> np.ndarray:
        """Element index for each point of ``y`` (right-continuous at nodes).

        Interior node ties resolve to the element whose lower bound is the
        node; y = 1 maps to the last element.  A point that hits a stored
        node bitwise is snapped to it so nodal lookups are exact.
        """
        arr = np.asarray(y, dtype=float)
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("points must lie in [0, 1]")
        n = self.n_elements
        t = arr * n
        k = np.clip(np.floor(t).astype(np.int64), 0, n - 1)
        j = np.clip(np.rint(t).astype(np.int64), 0, n)
        exact = self.nodes[j] == arr
        return np.where(exact, np.minimum(j, n - 1), k)

    def locate(self, y: float) -> ElementRef:
        """Element containing y, with ties resolved right-continuously."""
        k = int(self.element_indices(float(y)))
        return ElementRef(k, float(self.nodes[k]), float(self.nodes[k + 1]))


@dataclass(frozen=True)
class FeFunction:
    """Continuous piecewise-linear function as a nodal-value vector.

    ``bc_flag`` marks membership in the admissible finite element space,
    i.e. nodal_values[0] == 0 and nodal_values[-1] == 1 exactly.
    """

    mesh: Mesh1D
    nodal_values: np.ndarray
    bc_flag: bool = False

    def __post_init__(self):
        vals = np.array(self.nodal_values, dtype=float)
        if vals.shape != (self.mesh.n_elements + 1,):
            raise ValueError(
                f"expected {self.mesh.n_elements + 1} nodal values, got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise EvaluationError("nodal values must be finite")
        if self.bc_flag and not (vals[0] == 0.0 and vals[-1] == 1.0):
            raise ValueError("bc_flag requires nodal values 0 and 1 at the endpoints")
        vals.setflags(write=False)
        object.__setattr__(self, "nodal_values", vals)

    @classmethod
    def from_interior(cls, mesh: Mesh1D, interior, bc_flag: bool = True) -> "FeFunction":
        """Build a boundary-pinned function from its interior nodal values."""
        interior = np.asarray(interior, dtype=float)
        vals = np.empty(mesh.n_elements + 1)
        vals[0], vals[-1] = 0.0, 1.0
        vals[1:-1] = interior
        return cls(mesh, vals, bc_flag=bc_flag)

    def evaluate(self, y):
        """Value at y (scalar or array), exact at mesh nodes."""
        arr = np.asarray(y, dtype=float)
        k = self.mesh.element_indices(arr)
        vals = self.nodal_values
        t = (arr - self.mesh.nodes[k]) / self.mesh.h
        out = vals[k] * (1.0 - t) + vals[k + 1] * t
        # exact node hits bypass the interpolation formula entirely
        j = np.clip(np.rint(arr * self.mesh.n_elements).astype(np.int64), 0, self.mesh.n_elements)
        out = np.where(self.mesh.nodes[j] == arr, vals[j], out)
        return float(out) if np.isscalar(y) or getattr(y, "ndim", 1) == 0 else out

    def slopes(self) -> np.ndarray:
        """Per-element derivative values (v' is piecewise constant)."""
        return np.diff(self.nodal_values) / self.mesh.h

    def slope(self, k: int) -> float:
        """Derivative on element k."""
        n = self.mesh.n_elements
        if not 0 <= k <= n - 1:
            raise IndexError(f"element index {k} out of range 0..{n - 1}")
        vals = self.nodal_values
        return (vals[k + 1] - vals[k]) / self.mesh.h

    def slope_at(self, y):
        """Derivative at y (scalar or array); right-continuous at nodes."""
        k = self.mesh.element_indices(np.asarray(y, dtype=float))
        out = self.slopes()[k]
        return float(out) if np.isscalar(y) or getattr(y, "ndim", 1) == 0 else out


def interpolate(mesh: Mesh1D, v: Callable) -> FeFunction:
    """Nodal interpolant of v: the piecewise-linear match at every node.

    The output carries bc_flag when v(0) = 0 and v(1) = 1 exactly.
    """
    try:
        vals = np.asarray(v(mesh.nodes), dtype=float)
        if vals.shape != mesh.nodes.shape:
            raise TypeError
    except (TypeError, ValueError):  # non-vectorized callables
        vals = np.array([float(v(x)) for x in mesh.nodes])
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("interpolated function returned a non-finite nodal value")
    bc = bool(vals[0] == 0.0 and vals[-1] == 1.0)
    return FeFunction(mesh, vals, bc_flag=bc)
