"""Gauss-Legendre rules and tensor-product integration over rectangular apertures.

Apertures are rectangles centered at their local origin, spanning
``[-side_x/2, side_x/2] x [-side_z/2, side_z/2]``. Every surface integral in
the package goes through a :class:`QuadGrid2D`, whose ``weights`` already
carry the ``side_x * side_z / 4`` Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import InvalidArgumentError, ShapeMismatchError

__all__ = [
    "QuadRule1D",
    "QuadGrid2D",
    "legendre_rule",
    "make_grid",
    "integrate_matrix_surface",
    "surface_norm_sq",
    "DEFAULT_ORDER",
]

DEFAULT_ORDER = 10

_NEWTON_TOL = 1e-15
_NEWTON_MAXITER = 100


@dataclass(frozen=True)
class QuadRule1D:
    """Gauss-Legendre nodes and weights on [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f: Callable[[np.ndarray], np.ndarray], a: float = -1.0, b: float = 1.0):
        """Integrate a vectorized ``f`` over ``[a, b]``."""
        half = 0.5 * (b - a)
        x = half * self.nodes + 0.5 * (a + b)
        return half * np.sum(self.weights * f(x))


def _legendre_and_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Three-term recurrence: k P_k = (2k-1) x P_{k-1} - (k-1) P_{k-2}
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def legendre_rule(order: int) -> QuadRule1D:
    """Return the ``order``-point Gauss-Legendre rule.

    Nodes are the roots of the Legendre polynomial ``P_order``, found by
    Newton's method from Chebyshev-type initial guesses; weights are
    ``2 / ((1 - x^2) P'(x)^2)``. The rule is exact for polynomials of
    degree ``<= 2 * order - 1``.

    Parameters
    ----------
    order : int
        Number of nodes, at least 1.

    Returns
    -------
    QuadRule1D
        Nodes sorted increasingly and symmetrized about zero.
    """
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise InvalidArgumentError(f"quadrature order must be a positive integer, got {order!r}")
    n = int(order)
    if n == 1:
        return QuadRule1D(1, np.array([0.0]), np.array([2.0]))

    i = np.arange(1, n + 1)
    # Roots of P_n lie close to the Chebyshev-like points below (descending).
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAXITER):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    x = x[::-1]
    w = w[::-1]
    # Enforce exact symmetry; the Newton result is already symmetric to ~1 ulp.
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if n % 2 == 1:
        x[n // 2] = 0.0
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadRule1D(n, x, w)


@dataclass(frozen=True)
class QuadGrid2D:
    """Tensor-product Gauss-Legendre grid mapped onto a centered rectangle.

    Points are ordered with the x index outermost: point ``i * order_z + k``
    sits at ``(x_i, z_k)``.
    """

    rule_x: QuadRule1D
    rule_z: QuadRule1D
    side_x: float
    side_z: float
    points: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.side_x > 0 and self.side_z > 0):
            raise InvalidArgumentError("aperture side lengths must be positive")
        xs = 0.5 * self.side_x * self.rule_x.nodes
        zs = 0.5 * self.side_z * self.rule_z.nodes
        gx, gz = np.meshgrid(xs, zs, indexing="ij")
        pts = np.column_stack([gx.ravel(), gz.ravel()])
        wts = 0.25 * self.side_x * self.side_z * np.outer(self.rule_x.weights, self.rule_z.weights).ravel()
        pts.setflags(write=False)
        wts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @property
    def size(self) -> int:
        return self.rule_x.order * self.rule_z.order

    @property
    def area(self) -> float:
        return self.side_x * self.side_z

    @property
    def points3d(self) -> np.ndarray:
        """Grid points as local 3-vectors ``[x, 0, z]`` (aperture in the x-z plane)."""
        p = np.zeros((self.size, 3))
        p[:, 0] = self.points[:, 0]
        p[:, 2] = self.points[:, 1]
        return p


def make_grid(side_x: float, side_z: float, order_x: int = DEFAULT_ORDER, order_z: int | None = None) -> QuadGrid2D:
    """Build a :class:`QuadGrid2D` over a ``side_x`` by ``side_z`` aperture."""
    if order_z is None:
        order_z = order_x
    return QuadGrid2D(legendre_rule(order_x), legendre_rule(order_z), float(side_x), float(side_z))


def integrate_matrix_surface(f: Callable[[float, float], np.ndarray], grid: QuadGrid2D) -> np.ndarray:
    """Integrate a matrix-valued ``f(x, z)`` over the grid's aperture.

    Returns ``(side_x * side_z / 4) * sum_m sum_k w_m w_k f(x_m, z_k)``.
    """
    total = None
    shape = None
    for (x, z), w in zip(grid.points, grid.weights):
        val = np.asarray(f(float(x), float(z)))
        if shape is None:
            shape = val.shape
            total = np.zeros(shape, dtype=np.result_type(val.dtype, np.float64))
        elif val.shape != shape:
            raise ShapeMismatchError(f"integrand returned shape {val.shape} at ({x}, {z}), expected {shape}")
        total = total + w * val
    return total


def surface_norm_sq(field) -> float:
    """Quadrature value of ``int ||J(p)||_F^2 dp`` for a sampled beamformer field.

    ``field`` needs ``grid`` (a :class:`QuadGrid2D`) and ``samples`` of shape
    ``(grid.size, 3, M)``.
    """
    samples = np.asarray(field.samples)
    if samples.ndim != 3 or samples.shape[0] != field.grid.size:
        raise ShapeMismatchError(
            f"field samples of shape {samples.shape} do not match a grid of {field.grid.size} points"
        )
    per_point = np.sum(np.abs(samples) ** 2, axis=(1, 2))
    return float(np.dot(field.grid.weights, per_point))
