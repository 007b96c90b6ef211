import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddcmimo.exceptions import InvalidArgumentError, ShapeMismatchError
from ddcmimo.quadrature import integrate_matrix_surface, legendre_rule, make_grid, surface_norm_sq


class _Field:
    def __init__(self, grid, samples):
        self.grid = grid
        self.samples = samples


def test_order_one_and_two():
    r1 = legendre_rule(1)
    assert r1.nodes.tolist() == [0.0] and r1.weights.tolist() == [2.0]
    r2 = legendre_rule(2)
    np.testing.assert_allclose(r2.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(r2.weights, [1.0, 1.0], atol=1e-15)


def test_order_five_x8():
    r = legendre_rule(5)
    assert abs(np.dot(r.weights, r.nodes**8) - 2 / 9) < 1e-12


@pytest.mark.parametrize("order", [1, 2, 3, 7, 10, 20, 40, 64])
def test_matches_numpy_leggauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    r = legendre_rule(order)
    np.testing.assert_allclose(r.nodes, x, atol=1e-14)
    np.testing.assert_allclose(r.weights, w, atol=1e-14)


@pytest.mark.parametrize("order", [1, 2, 5, 10, 33])
def test_rule_invariants(order):
    r = legendre_rule(order)
    assert np.all(np.diff(r.nodes) > 0)
    assert np.all(np.abs(r.nodes) < 1)
    np.testing.assert_array_equal(r.nodes, -r.nodes[::-1])
    assert np.all(r.weights > 0)
    assert abs(r.weights.sum() - 2.0) < 1e-12


@pytest.mark.parametrize("bad", [0, -3, 2.5, True])
def test_invalid_order(bad):
    with pytest.raises(InvalidArgumentError):
        legendre_rule(bad)


@settings(max_examples=60, deadline=None)
@given(order=st.integers(1, 16), data=st.data())
def test_polynomial_exactness(order, data):
    deg = data.draw(st.integers(0, 2 * order - 1))
    coeffs = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=deg + 1, max_size=deg + 1)))
    poly = np.polynomial.Polynomial(coeffs)
    exact = poly.integ()(1.0) - poly.integ()(-1.0)
    r = legendre_rule(order)
    assert abs(np.dot(r.weights, poly(r.nodes)) - exact) < 1e-12


def test_integrate_interval():
    r = legendre_rule(6)
    assert abs(r.integrate(np.exp, 0.0, 1.0) - (math.e - 1)) < 1e-12


def test_grid_layout_and_bounds():
    g = make_grid(0.4, 0.2, 3, 5)
    assert g.size == 15 and g.points.shape == (15, 2)
    assert np.all(np.abs(g.points[:, 0]) <= 0.2) and np.all(np.abs(g.points[:, 1]) <= 0.1)
    # x index outermost
    assert g.points[0, 0] == g.points[4, 0] and g.points[0, 1] != g.points[1, 1]
    assert abs(g.weights.sum() - 0.08) < 1e-15
    np.testing.assert_array_equal(g.points3d[:, 1], 0.0)


def test_surface_integral_examples():
    g = make_grid(2.0, 2.0, 4)
    np.testing.assert_allclose(integrate_matrix_surface(lambda x, z: np.eye(2), g), 4 * np.eye(2), atol=1e-14)
    odd = integrate_matrix_surface(lambda x, z: x * np.eye(1), g)
    assert abs(odd[0, 0]) < 1e-14
    g1 = make_grid(1.0, 1.0, 3)
    val = integrate_matrix_surface(lambda x, z: (x * x + z * z) * np.eye(1), g1)
    assert abs(val[0, 0] - 1 / 6) < 1e-12


def test_surface_integral_linearity(rng):
    g = make_grid(0.5, 0.3, 5)
    a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    f = lambda x, z: np.array([[np.cos(3 * x), z], [x * z, 1.0]])
    h = lambda x, z: np.array([[np.exp(z), x**2], [1j * x, z**3]])
    lhs = integrate_matrix_surface(lambda x, z: a * f(x, z) + b * h(x, z), g)
    rhs = a * integrate_matrix_surface(f, g) + b * integrate_matrix_surface(h, g)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-15)


def test_surface_integral_shape_mismatch():
    g = make_grid(1.0, 1.0, 2)
    with pytest.raises(ShapeMismatchError):
        integrate_matrix_surface(lambda x, z: np.eye(2) if x > 0 else np.eye(3), g)


def test_surface_norm_sq():
    g = make_grid(1.0, 1.0, 4)
    ones = _Field(g, np.ones((g.size, 3, 2)))
    assert abs(surface_norm_sq(ones) - 6.0) < 1e-12
    assert surface_norm_sq(_Field(g, np.zeros((g.size, 3, 2)))) == 0.0
    c = 0.3 - 2j
    assert abs(surface_norm_sq(_Field(g, c * np.ones((g.size, 3, 2)))) - abs(c) ** 2 * 6.0) < 1e-12
    with pytest.raises(ShapeMismatchError):
        surface_norm_sq(_Field(g, np.ones((g.size + 1, 3, 2))))


@settings(max_examples=30, deadline=None)
@given(sx=st.floats(0.01, 3.0), sz=st.floats(0.01, 3.0), order=st.integers(1, 12),
       value=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_constant_field_power_exact(sx, sz, order, value):
    g = make_grid(sx, sz, order)
    fld = _Field(g, np.full((g.size, 3, 2), value))
    expected = 6 * abs(value) ** 2 * sx * sz
    assert abs(surface_norm_sq(fld) - expected) <= 1e-12 * max(expected, 1e-300)
