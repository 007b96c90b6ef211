"""Discrete-array comparators: UPA steering vectors, conventional arrays and SVD MIMO.

Discrete fields and channels use the lifted layout: element ``n`` and
polarization component ``p`` map to row/column ``3 n + p``. A discrete
beamformer is a ``(3 N, M)`` array and the element channel is a
``(3 N_R, 3 N_T)`` operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, svdvals
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from .beamforming import OptimizerConfig
from .channel import Scene, aperture_phases
from .exceptions import DegenerateObjectiveError, InvalidArgumentError

__all__ = [
    "UpaConfig",
    "DiscreteChannel",
    "DiscreteTrace",
    "ElementChannel",
    "steering_vector",
    "direction_angles",
    "discrete_upa_channel",
    "effective_aperture",
    "conventional_antenna_grid",
    "uniform_antenna_grid",
    "conventional_effective_channel",
    "discrete_optimize",
    "svd_baseline_power",
    "singular_values",
    "lifted_dense",
]


@dataclass(frozen=True)
class UpaConfig:
    n_x: int
    n_z: int
    d_x: float
    d_z: float

    def __post_init__(self):
        if self.n_x < 1 or self.n_z < 1:
            raise InvalidArgumentError("UPA needs at least one element per axis")
        if not (self.d_x > 0 and self.d_z > 0):
            raise InvalidArgumentError("element spacings must be positive")

    @property
    def size(self) -> int:
        return self.n_x * self.n_z


def steering_vector(n_x, n_z, d_x, d_z, theta, phi, wavelength_m) -> np.ndarray:
    """UPA response ``a_z(theta) kron a_x(theta, phi)`` (length ``n_x * n_z``)."""
    kappa = 2.0 * math.pi / wavelength_m
    a_x = np.exp(1j * kappa * d_x * math.sin(theta) * math.cos(phi) * np.arange(n_x))
    a_z = np.exp(1j * kappa * d_z * math.cos(theta) * np.arange(n_z))
    return np.kron(a_z, a_x)


def direction_angles(k) -> tuple[float, float]:
    """Elevation in ``[0, pi]`` and azimuth in ``[0, 2 pi)`` of a unit vector."""
    k = np.asarray(k, dtype=float)
    theta = math.acos(max(-1.0, min(1.0, k[2])))
    phi = math.atan2(k[1], k[0]) % (2.0 * math.pi)
    return theta, phi


@dataclass(frozen=True)
class DiscreteChannel:
    """Per-path UPA channel matrices with their delay/Doppler/gain tags."""

    matrices: np.ndarray
    array_responses: np.ndarray
    delays_s: np.ndarray
    dopplers_hz: np.ndarray
    gains: np.ndarray
    include_polarization: bool

    def total(self) -> np.ndarray:
        """Sum over paths, i.e. all delay bins collapsed."""
        return self.matrices.sum(axis=0)


def discrete_upa_channel(scene: Scene, tx: UpaConfig, rx: UpaConfig, t_s: float = 0.0,
                         include_polarization: bool = True) -> DiscreteChannel:
    """UPA delay-Doppler channel, one ``h e^{-j 2 pi nu t} (A kron Xi)`` matrix per path.

    ``A = a_R a_T^H`` is the rank-one array response; without polarization
    the per-path matrix is ``h e^{-j 2 pi nu t} A`` alone.
    """
    lam = scene.wavelength_m
    mats, resp = [], []
    for p in scene.paths:
        th_t, ph_t = direction_angles(p.k_tx)
        th_r, ph_r = direction_angles(p.k_rx)
        a_t = steering_vector(tx.n_x, tx.n_z, tx.d_x, tx.d_z, th_t, ph_t, lam)
        a_r = steering_vector(rx.n_x, rx.n_z, rx.d_x, rx.d_z, th_r, ph_r, lam)
        a_mat = np.outer(a_r, a_t.conj())
        coef = p.gain * np.exp(-2j * math.pi * p.doppler_hz * t_s)
        mats.append(coef * (np.kron(a_mat, p.xi) if include_polarization else a_mat))
        resp.append(a_mat)
    return DiscreteChannel(
        matrices=np.stack(mats),
        array_responses=np.stack(resp),
        delays_s=np.array([p.delay_s for p in scene.paths]),
        dopplers_hz=np.array([p.doppler_hz for p in scene.paths]),
        gains=scene.gains,
        include_polarization=include_polarization,
    )


def effective_aperture(wavelength_m: float) -> float:
    """Isotropic capture area ``lambda^2 / (4 pi)``."""
    return wavelength_m**2 / (4.0 * math.pi)


def _grid_positions(n_x, n_z, d_x, d_z, side_x, side_z) -> np.ndarray:
    xs = np.arange(n_x) * d_x - side_x / 2.0
    zs = np.arange(n_z) * d_z - side_z / 2.0
    gx, gz = np.meshgrid(xs, zs, indexing="ij")
    pos = np.zeros((n_x * n_z, 3))
    pos[:, 0] = gx.ravel()
    pos[:, 2] = gz.ravel()
    return pos


def conventional_antenna_grid(side_x: float, side_z: float, spacing: float) -> tuple[np.ndarray, tuple[int, int]]:
    """Elements at ``(n - 1) d - D / 2`` with ``ceil(D / d)`` elements per axis.

    Returns local positions ``(N, 3)`` and the per-axis counts.
    """
    if not spacing > 0:
        raise InvalidArgumentError("spacing must be positive")
    n_x = math.ceil(side_x / spacing)
    n_z = math.ceil(side_z / spacing)
    return _grid_positions(n_x, n_z, spacing, spacing, side_x, side_z), (n_x, n_z)


def uniform_antenna_grid(side_x: float, side_z: float, n_side: int) -> tuple[np.ndarray, float]:
    """``n_side x n_side`` endpoint-inclusive grid spanning the aperture.

    Returns positions and the spacing ``D / (n_side - 1)`` (along x).
    """
    if n_side < 2:
        raise InvalidArgumentError("n_side must be >= 2 for an endpoint-inclusive grid")
    d_x = side_x / (n_side - 1)
    d_z = side_z / (n_side - 1)
    return _grid_positions(n_side, n_side, d_x, d_z, side_x, side_z), d_x


def conventional_effective_channel(scene: Scene, tx_positions, rx_positions) -> np.ndarray:
    """Element-pair channels ``A_d^2 H(r_n, s_m)``, shape ``(N_R, N_T, 3, 3)``."""
    scale = effective_aperture(scene.wavelength_m) ** 2
    a = aperture_phases(scene, rx_positions, "rx")
    b = aperture_phases(scene, tx_positions, "tx")
    return scale * np.einsum("l,li,lj,lpq->ijpq", scene.gains, a, b, scene.xis)


def lifted_dense(pairs: np.ndarray) -> np.ndarray:
    """``(N_R, N_T, 3, 3)`` element-pair blocks to a ``(3 N_R, 3 N_T)`` matrix."""
    n_r, n_t = pairs.shape[:2]
    return pairs.transpose(0, 2, 1, 3).reshape(3 * n_r, 3 * n_t)


class ElementChannel:
    """Structured ``(3 N_R, 3 N_T)`` channel ``scale * sum_l h_l (a_l b_l^T) kron Xi_l``.

    Never forms the dense matrix unless asked; matrix products cost
    ``O(L (N_R + N_T) M)``.
    """

    def __init__(self, scene: Scene, tx_positions, rx_positions, scale: float | None = None):
        self.scene = scene
        self.tx_positions = np.asarray(tx_positions, dtype=float)
        self.rx_positions = np.asarray(rx_positions, dtype=float)
        self.scale = effective_aperture(scene.wavelength_m) ** 2 if scale is None else float(scale)
        self._a = aperture_phases(scene, self.rx_positions, "rx")  # (L, N_R)
        self._b = aperture_phases(scene, self.tx_positions, "tx")  # (L, N_T)
        self._coef = self.scale * scene.gains

    @property
    def shape(self) -> tuple[int, int]:
        return 3 * self._a.shape[1], 3 * self._b.shape[1]

    def matmat(self, x) -> np.ndarray:
        x = np.asarray(x).reshape(self._b.shape[1], 3, -1)
        t = np.einsum("lj,jqm->lqm", self._b, x)
        u = np.einsum("l,lpq,lqm->lpm", self._coef, self.scene.xis, t)
        return np.einsum("li,lpm->ipm", self._a, u).reshape(self.shape[0], -1)

    def rmatmat(self, y) -> np.ndarray:
        y = np.asarray(y).reshape(self._a.shape[1], 3, -1)
        r = np.einsum("li,ipm->lpm", self._a.conj(), y)
        u = np.einsum("l,lqp,lqm->lpm", self._coef, self.scene.xis.conj(), r)
        return np.einsum("lj,lpm->jpm", self._b.conj(), u).reshape(self.shape[1], -1)

    def as_operator(self) -> LinearOperator:
        return LinearOperator(
            self.shape,
            matvec=lambda v: self.matmat(v).ravel(),
            rmatvec=lambda v: self.rmatmat(v).ravel(),
            matmat=self.matmat,
            rmatmat=self.rmatmat,
            dtype=complex,
        )

    def dense(self) -> np.ndarray:
        return lifted_dense(
            np.einsum("l,li,lj,lpq->ijpq", self._coef, self._a, self._b, self.scene.xis)
        )

    def singular_values(self) -> np.ndarray:
        """Nonzero-part spectrum from the rank-``3L`` factorization (exact)."""
        n_paths = self._a.shape[0]
        eye = np.eye(3)
        # Columns (l, p): a_l kron e_p on the RX side, conj(b_l) kron e_p on the TX side.
        left = np.einsum("li,pq->iplq", self._a, eye).reshape(self.shape[0], 3 * n_paths)
        right = np.einsum("lj,pq->jplq", self._b.conj(), eye).reshape(self.shape[1], 3 * n_paths)
        core = np.zeros((3 * n_paths, 3 * n_paths), dtype=complex)
        for l in range(n_paths):
            core[3 * l:3 * l + 3, 3 * l:3 * l + 3] = self._coef[l] * self.scene.xis[l]
        _, r_left = qr(left, mode="economic")
        _, r_right = qr(right, mode="economic")
        return svdvals(r_left @ core @ r_right.conj().T)


def singular_values(channel) -> np.ndarray:
    """Singular values of a dense matrix or an :class:`ElementChannel`."""
    if isinstance(channel, ElementChannel):
        return channel.singular_values()
    return svdvals(np.asarray(channel))


def _as_operator(channel) -> LinearOperator:
    if isinstance(channel, ElementChannel):
        return channel.as_operator()
    return aslinearoperator(np.asarray(channel, dtype=complex))


@dataclass
class DiscreteTrace:
    objective_per_iter: list[float]
    x: np.ndarray
    y: np.ndarray
    iterations_used: int
    status: str
    tx_power_per_iter: list[float]
    rx_power_per_iter: list[float]

    @property
    def final_objective(self) -> float:
        return self.objective_per_iter[-1]

    @property
    def initial_objective(self) -> float:
        return self.objective_per_iter[0]


def discrete_optimize(channel, config: OptimizerConfig = OptimizerConfig(),
                      x0=None, y0=None) -> DiscreteTrace:
    """Alternating matched filter over discrete elements.

    Same loop as the continuous optimizer with every surface integral
    replaced by a plain sum over elements: ``sum ||x||^2 = P_T`` at the
    transmitter and ``sum ||y||^2 = 1`` at the receiver. Defaults to all-ones
    initial beamformers.
    """
    op = _as_operator(channel)
    n_rows, n_cols = op.shape
    m = config.n_streams
    p_tx = config.p_tx
    x = np.full((n_cols, m), math.sqrt(p_tx / (n_cols * m)), dtype=complex) if x0 is None else np.array(x0, dtype=complex)
    y = np.full((n_rows, m), math.sqrt(1.0 / (n_rows * m)), dtype=complex) if y0 is None else np.array(y0, dtype=complex)

    def objective(x, y):
        o = y.conj().T @ op.matmat(x)
        return o, float(np.sum(np.abs(o) ** 2))

    o, val = objective(x, y)
    trace = DiscreteTrace([val], x, y, 0, "max_iters", [], [])
    for it in range(1, config.max_iters + 1):
        if not np.any(o):
            trace.status = "degenerate"
            return trace
        lam = float(np.linalg.svd(o, compute_uv=False)[0])
        x_raw = op.rmatmat(y) @ (o / lam)
        nx = float(np.sum(np.abs(x_raw) ** 2))
        if not nx > 0:
            raise DegenerateObjectiveError("discrete TX matched filter vanished")
        x = x_raw * math.sqrt(p_tx / nx)
        y_raw = op.matmat(x) @ (o / lam)
        ny = float(np.sum(np.abs(y_raw) ** 2))
        if not ny > 0:
            raise DegenerateObjectiveError("discrete RX matched filter vanished")
        y = y_raw / math.sqrt(ny)
        o, val = objective(x, y)
        trace.objective_per_iter.append(val)
        trace.tx_power_per_iter.append(float(np.sum(np.abs(x) ** 2)))
        trace.rx_power_per_iter.append(float(np.sum(np.abs(y) ** 2)))
        trace.x, trace.y, trace.iterations_used = x, y, it
        prev = trace.objective_per_iter[-2]
        if abs(val - prev) <= config.rel_tol * abs(val):
            trace.status = "converged"
            break
    return trace


def svd_baseline_power(channel, p_tx: float, n_streams: int, calibration: float = 1.0) -> float:
    """Receive power of equal-power SVD beamforming on a discrete channel.

    Uses the top ``k = min(M, rank)`` singular pairs with ``P_T / k`` per
    stream and unit-norm combiners, i.e. ``(P_T / k) sum_{i<k} s_i^2``,
    times the caller's ``calibration`` factor.
    """
    s = singular_values(channel)
    if s.size == 0 or s[0] == 0:
        return 0.0
    rank = int(np.sum(s > 1e-10 * s[0]))
    k = min(n_streams, rank)
    return calibration * (p_tx / k) * float(np.sum(s[:k] ** 2))
