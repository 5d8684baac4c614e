"""Mesh and finite element function tests.

Derived expectations are computed by in-test oracles (a bisection root
finder for the cube root) rather than trusted from anywhere else.
"""

import numpy as np
import pytest

from maniafem.errors import EvaluationError
from maniafem.mesh import FeFunction, Mesh1D, interpolate


def bisect_root(target, lo=0.0, hi=1.0, iters=200):
    """Solve t^3 = target on [lo, hi] by bisection, to the last bit."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mid**3 < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


CUBE_HALF = bisect_root(0.5)


def test_mesh_invariants():
    for n in (1, 2, 7, 64, 1024):
        mesh = Mesh1D(n)
        assert mesh.nodes[0] == 0.0 and mesh.nodes[-1] == 1.0
        assert np.all(np.diff(mesh.nodes) > 0)
        assert abs(mesh.h * n - 1.0) <= 4 * np.finfo(float).eps
        assert mesh.nodes.shape == (n + 1,)


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_mesh_rejects_bad_sizes(bad):
    with pytest.raises(ValueError):
        Mesh1D(bad)


def test_locate_examples():
    mesh = Mesh1D(4)
    el = mesh.locate(0.3)
    assert (el.index, el.lower, el.upper) == (1, 0.25, 0.5)
    assert mesh.locate(0.25).index == 1  # right-continuous tie rule
    assert mesh.locate(1.0).index == 3
    assert mesh.locate(0.0).index == 0


@pytest.mark.parametrize("y", [-0.1, 1.1, 2.0])
def test_locate_rejects_outside_domain(y):
    with pytest.raises(ValueError):
        Mesh1D(4).locate(y)


def test_evaluate_linear_interpolation():
    f = FeFunction(Mesh1D(2), [0.0, 0.5, 1.0], bc_flag=True)
    assert f.evaluate(0.25) == pytest.approx(0.25, abs=1e-16)
    with pytest.raises(ValueError):
        f.evaluate(1.5)


def test_evaluate_exact_at_nodes():
    rng = np.random.default_rng(3)
    for n in (2, 7, 49, 128):
        mesh = Mesh1D(n)
        f = FeFunction(mesh, rng.uniform(-1, 1, n + 1))
        out = f.evaluate(mesh.nodes)
        assert np.array_equal(out, f.nodal_values)


def test_evaluate_midpoint_of_root_interpolant():
    f = interpolate(Mesh1D(2), lambda x: x ** (1 / 3))
    # the bisection oracle is correct to one ulp of the true cube root
    assert abs(f.nodal_values[1] - CUBE_HALF) <= 2e-16
    assert f.nodal_values[1] == 0.7937005259840998
    expected = (CUBE_HALF + 1.0) / 2.0
    assert abs(f.evaluate(0.75) - expected) <= 1e-15
    assert abs(f.evaluate(0.75) - 0.8968502629920499) <= 1e-15


def test_evaluate_is_continuous_at_nodes():
    rng = np.random.default_rng(11)
    mesh = Mesh1D(16)
    f = FeFunction(mesh, rng.uniform(0, 1, 17))
    eps = 1e-12
    for xj in mesh.nodes[1:-1]:
        assert abs(f.evaluate(xj - eps) - f.evaluate(xj + eps)) <= 1e-9


def test_slopes():
    f = FeFunction(Mesh1D(2), [0.0, 0.5, 1.0], bc_flag=True)
    assert f.slope(0) == 1.0
    assert f.slope(1) == 1.0
    const = FeFunction(Mesh1D(4), np.full(5, 0.3))
    assert all(const.slope(k) == 0.0 for k in range(4))
    root = interpolate(Mesh1D(2), lambda x: x ** (1 / 3))
    assert abs(root.slope(0) - 2.0 * CUBE_HALF) <= 4e-16
    assert root.slope(0) == 1.5874010519681996
    with pytest.raises(IndexError):
        f.slope(2)
    with pytest.raises(IndexError):
        f.slope(-1)


def test_slope_telescoping_sum():
    rng = np.random.default_rng(5)
    for n in (4, 32, 256):
        mesh = Mesh1D(n)
        f = FeFunction(mesh, rng.uniform(-2, 2, n + 1))
        total = float(np.sum(mesh.h * f.slopes()))
        jump = f.nodal_values[-1] - f.nodal_values[0]
        assert abs(total - jump) <= 10 * n * np.finfo(float).eps


def test_interpolate_examples():
    ramp = interpolate(Mesh1D(2), lambda x: x)
    assert ramp.nodal_values.tolist() == [0.0, 0.5, 1.0]
    assert ramp.bc_flag

    const = interpolate(Mesh1D(4), lambda x: np.ones_like(np.asarray(x, dtype=float)))
    assert const.nodal_values.tolist() == [1.0] * 5
    assert not const.bc_flag

    scalar_only = interpolate(Mesh1D(2), lambda x: float(x) ** 2)
    assert scalar_only.nodal_values.tolist() == [0.0, 0.25, 1.0]


def test_interpolate_rejects_non_finite():
    with pytest.raises(EvaluationError):
        interpolate(Mesh1D(2), lambda x: np.where(np.asarray(x) > 0.4, np.nan, 1.0))


def test_interpolation_reproduces_fe_space_exactly():
    rng = np.random.default_rng(7)
    for n in (2, 5, 33):
        mesh = Mesh1D(n)
        f = FeFunction(mesh, rng.uniform(-1, 1, n + 1))
        again = interpolate(mesh, f.evaluate)
        assert np.array_equal(again.nodal_values, f.nodal_values)


def test_fefunction_validation():
    mesh = Mesh1D(3)
    with pytest.raises(ValueError):
        FeFunction(mesh, [0.0, 1.0])  # wrong length
    with pytest.raises(ValueError):
        FeFunction(mesh, [0.1, 0.5, 0.7, 1.0], bc_flag=True)  # bad left bc
    with pytest.raises(EvaluationError):
        FeFunction(mesh, [0.0, np.inf, 0.5, 1.0])
    f = FeFunction.from_interior(mesh, [0.2, 0.9])
    assert f.bc_flag
    assert f.nodal_values.tolist() == [0.0, 0.2, 0.9, 1.0]


def test_nodal_values_are_immutable():
    f = FeFunction(Mesh1D(2), [0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        f.nodal_values[1] = 0.9


def test_slope_at_matches_elementwise_slopes():
    rng = np.random.default_rng(13)
    mesh = Mesh1D(8)
    f = FeFunction(mesh, rng.uniform(0, 1, 9))
    ys = np.array([0.01, 0.125, 0.3, 0.99, 1.0])
    expected = f.slopes()[mesh.element_indices(ys)]
    assert np.array_equal(f.slope_at(ys), expected)
    assert f.slope_at(0.3) == f.slope(2)
