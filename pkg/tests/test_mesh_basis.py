import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bo_galerkin.mesh_basis import (
    HermiteField,
    UniformPeriodicMesh,
    evaluate,
    interpolate,
    local_shapes,
    shape_value,
)


def test_shape_examples():
    assert shape_value("f", 0.0, 0) == 1.0
    assert shape_value("g", 0.0, 1) == 1.0
    assert shape_value("f", 0.5, 0) == pytest.approx(0.5)
    assert shape_value("f", -0.5, 0) == pytest.approx(0.5)
    assert shape_value("g", 1.0, 0) == 0.0
    # right-hand branch at the kink: f'' = 12|y| - 6 -> -6
    assert shape_value("f", 0.0, 2) == pytest.approx(-6.0)


def test_shapes_match_local_shapes():
    xi = np.linspace(0, 1, 11)
    n = local_shapes(xi)
    np.testing.assert_allclose(n[0], shape_value("f", xi))
    np.testing.assert_allclose(n[1], shape_value("g", xi))
    np.testing.assert_allclose(n[2], shape_value("f", xi - 1))
    np.testing.assert_allclose(n[3], shape_value("g", xi - 1))


@pytest.mark.parametrize("bad", [(0, 0, 8), (1, 0, 8), (0, 1, 3)])
def test_mesh_validation(bad):
    with pytest.raises(ValueError):
        UniformPeriodicMesh(*bad)


def test_mesh_geometry():
    m = UniformPeriodicMesh(-15, 15, 64)
    assert m.dx == 30 / 64 and m.ndofs == 128 and m.half_period == 15
    assert np.all(np.diff(m.nodes) > 0)
    np.testing.assert_allclose(np.diff(m.nodes), m.dx, rtol=1e-14)
    assert m.element_dofs()[-1].tolist() == [126, 127, 0, 1]


def test_field_validation():
    m = UniformPeriodicMesh(0, 1, 4)
    with pytest.raises(ValueError):
        HermiteField(m, np.zeros(7))
    with pytest.raises(ValueError):
        HermiteField(m, np.full(8, np.nan))


def test_zero_and_partition_of_unity():
    m = UniformPeriodicMesh(-3, 5, 9)
    x = np.linspace(-3, 5, 301)
    assert np.all(evaluate(HermiteField.zeros(m), x) == 0)
    c = np.zeros(m.ndofs)
    c[0::2] = 1.0
    np.testing.assert_allclose(evaluate(HermiteField(m, c), x), 1.0, atol=1e-15)
    np.testing.assert_allclose(evaluate(HermiteField(m, c), x, 1), 0.0, atol=1e-13)


def test_cardinality():
    m = UniformPeriodicMesh(0, 2, 8)
    for j in range(m.num_elements):
        for kind in (0, 1):
            c = np.zeros(m.ndofs)
            c[2 * j + kind] = 1.0
            f = HermiteField(m, c)
            delta = (np.arange(m.num_elements) == j).astype(float)
            val, der = f(m.nodes), f(m.nodes, 1)
            if kind == 0:
                np.testing.assert_allclose(val, delta, atol=1e-15)
                np.testing.assert_allclose(der, 0, atol=1e-13)
            else:
                np.testing.assert_allclose(val, 0, atol=1e-15)
                np.testing.assert_allclose(der, delta / m.dx, atol=1e-13)


def test_cubic_reproduction_example():
    m = UniformPeriodicMesh(0, 1, 4)
    f = interpolate(lambda x: x**3, lambda x: 3 * x**2, m)
    assert f(np.array([0.37]))[0] == pytest.approx(0.37**3, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(c=arrays(float, 4, elements=st.floats(-5, 5)), n=st.integers(4, 20))
def test_cubic_reproduction_property(c, n):
    m = UniformPeriodicMesh(-1, 2, n)
    p = np.polynomial.Polynomial(c)
    f = interpolate(p, p.deriv(), m)
    # interior of elements away from the periodic seam
    x = np.linspace(-1 + 1e-9, 2 - m.dx - 1e-9, 97)
    scale = max(1.0, np.max(np.abs(p(x))))
    assert np.max(np.abs(f(x) - p(x))) <= 1e-12 * scale * 10
    np.testing.assert_allclose(f(x, 2), p.deriv(2)(x), atol=1e-9 * scale * n**2)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(4, 30))
def test_c1_continuity(seed, n):
    m = UniformPeriodicMesh(0, 3, n)
    f = HermiteField(m, np.random.default_rng(seed).standard_normal(m.ndofs))
    eps = 1e-9
    for d in (0, 1):
        left = f(m.nodes[1:] - eps, d)
        right = f(m.nodes[1:] + eps, d)
        np.testing.assert_allclose(left, right, atol=1e-6 * (1 + np.abs(left).max()))
    np.testing.assert_allclose(f(m.nodes), f.values, atol=1e-14)
    np.testing.assert_allclose(f(m.nodes, 1), f.slopes, atol=1e-12)
    np.testing.assert_allclose(f.slopes * m.dx, f.coeffs[1::2], atol=1e-14)


def test_periodic_wrap():
    m = UniformPeriodicMesh(-15, 15, 16)
    f = interpolate(lambda x: np.sin(np.pi * x / 15), lambda x: np.pi / 15 * np.cos(np.pi * x / 15), m)
    x = np.array([-14.2, 3.3])
    np.testing.assert_allclose(f(x + 30), f(x), atol=1e-14)
    np.testing.assert_allclose(f(m.nodes), np.sin(np.pi * m.nodes / 15), atol=1e-15)


def test_interpolate_constant():
    m = UniformPeriodicMesh(0, 1, 5)
    f = interpolate(lambda x: 2.5 + 0 * x, lambda x: 0 * x, m)
    assert np.all(f.values == 2.5) and np.all(f.slopes == 0)


def test_coeffs_readonly():
    m = UniformPeriodicMesh(0, 1, 4)
    c = np.ones(8)
    f = HermiteField(m, c)
    c[0] = 5
    assert f.coeffs[0] == 1
    with pytest.raises(ValueError):
        f.coeffs[0] = 2
