"""Matched-filter beamforming for continuous apertures.

A beamformer is a 3xM complex matrix field sampled at the Gauss-Legendre
points of its aperture. All aperture integrals use the grid weights, and the
kernel is never tabulated pairwise: because

    H(r, s) = sum_l h_l Xi_l a_l(r) b_l(s)

with scalar plane-wave phases ``a_l``, ``b_l``, every double integral splits
into per-path single integrals. One coupling evaluation or one update then
costs ``O(L (G_R + G_T) M)``.

The alternating loop (``optimize``) is, per iteration:

1. ``O = int int J_R^H H J_T``;
2. ``A_tilde = B_tilde = O``;
3. ``lambda = sigma_max(O)``;
4. TX matched filter, renormalized to ``P_T``;
5. RX matched filter from the fresh TX field, renormalized to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import Scene, aperture_phases
from .exceptions import DegenerateObjectiveError, InvalidArgumentError, ShapeMismatchError
from .quadrature import QuadGrid2D, make_grid, surface_norm_sq

__all__ = [
    "BeamformerField",
    "CouplingMatrix",
    "OptimizerConfig",
    "OptimizationTrace",
    "constant_field",
    "coupling_matrix",
    "path_couplings",
    "max_singular_value",
    "tx_update",
    "rx_update",
    "optimize",
    "receive_power_db",
    "grids_for_scene",
]


@dataclass(frozen=True)
class BeamformerField:
    """Samples ``J(p)`` of shape ``(grid.size, 3, M)`` plus the power budget."""

    grid: QuadGrid2D
    samples: np.ndarray
    power_budget: float = 1.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 3 or s.shape[0] != self.grid.size or s.shape[1] != 3:
            raise ShapeMismatchError(f"samples must be ({self.grid.size}, 3, M), got {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def m(self) -> int:
        return self.samples.shape[2]

    def norm_sq(self) -> float:
        return surface_norm_sq(self)

    def normalized(self) -> "BeamformerField":
        """Rescale so the quadrature power equals ``power_budget``."""
        p = self.norm_sq()
        if not p > 0:
            raise DegenerateObjectiveError("cannot normalize a zero beamformer field")
        return replace(self, samples=self.samples * math.sqrt(self.power_budget / p))

    def scaled(self, c) -> "BeamformerField":
        return replace(self, samples=self.samples * c)


def constant_field(grid: QuadGrid2D, m: int, power: float) -> BeamformerField:
    """All-ones 3xM field scaled so its integrated power is exactly ``power``."""
    value = math.sqrt(power / (3 * m * grid.area))
    return BeamformerField(grid, np.full((grid.size, 3, m), value, dtype=complex), power)


def grids_for_scene(scene: Scene, order: int) -> tuple[QuadGrid2D, QuadGrid2D]:
    """``(tx_grid, rx_grid)`` over the scene's apertures."""
    tx = make_grid(scene.tx_aperture.side_x, scene.tx_aperture.side_z, order)
    rx = make_grid(scene.rx_aperture.side_x, scene.rx_aperture.side_z, order)
    return tx, rx


@dataclass(frozen=True)
class CouplingMatrix:
    o: np.ndarray

    @property
    def rx_power(self) -> float:
        return float(np.sum(np.abs(self.o) ** 2))


def _check_grids(j_tx: BeamformerField, j_rx: BeamformerField, scene: Scene):
    for fld, ap, label in ((j_tx, scene.tx_aperture, "TX"), (j_rx, scene.rx_aperture, "RX")):
        g = fld.grid
        if not (math.isclose(g.side_x, ap.side_x) and math.isclose(g.side_z, ap.side_z)):
            raise ShapeMismatchError(f"{label} field grid does not cover the scene's {label} aperture")
    if j_tx.m != j_rx.m:
        raise ShapeMismatchError(f"stream counts differ: TX {j_tx.m}, RX {j_rx.m}")


def _tx_projections(j_tx: BeamformerField, scene: Scene) -> np.ndarray:
    # T_l = int b_l(s) J_T(s) ds, shape (L, 3, M)
    b = aperture_phases(scene, j_tx.grid.points3d, "tx")
    return np.einsum("lg,gpm->lpm", b * j_tx.grid.weights, j_tx.samples)


def _rx_projections(j_rx: BeamformerField, scene: Scene) -> np.ndarray:
    # R_l = int a_l(r) J_R(r)^H dr, shape (L, M, 3)
    a = aperture_phases(scene, j_rx.grid.points3d, "rx")
    return np.einsum("lg,gpm->lmp", a * j_rx.grid.weights, j_rx.samples.conj())


def path_couplings(j_tx: BeamformerField, j_rx: BeamformerField, scene: Scene) -> np.ndarray:
    """Per-path beamformed couplings ``H_check_l`` (shape ``(L, M, M)``); they sum to ``O``."""
    _check_grids(j_tx, j_rx, scene)
    t = _tx_projections(j_tx, scene)
    r = _rx_projections(j_rx, scene)
    return scene.gains[:, None, None] * np.einsum("lmp,lpq,lqn->lmn", r, scene.xis, t)


def coupling_matrix(j_tx: BeamformerField, j_rx: BeamformerField, scene: Scene) -> CouplingMatrix:
    """Quadrature value of ``int int J_R^H(r) H(r, s) J_T(s) ds dr``."""
    return CouplingMatrix(path_couplings(j_tx, j_rx, scene).sum(axis=0))


def max_singular_value(o) -> float:
    """Largest singular value of ``o``; zero matrices are rejected."""
    o = np.asarray(o)
    if not np.any(o):
        raise DegenerateObjectiveError("coupling matrix is zero; the initialization carries no power")
    return float(np.linalg.svd(o, compute_uv=False)[0])


def tx_update(j_rx: BeamformerField, scene: Scene, a_tilde, lambda_t: float, p_tx: float,
              tx_grid: QuadGrid2D) -> BeamformerField:
    """TX matched filter ``(int H^H(r, s) J_R(r) dr) A_tilde / lambda_t``, rescaled to ``p_tx``.

    The scalar rescaling plays the role of the normalizer that makes the
    power constraint hold with equality.
    """
    if not lambda_t > 0:
        raise InvalidArgumentError("lambda_t must be positive")
    r = _rx_projections(j_rx, scene)  # (L, M, 3)
    b = aperture_phases(scene, tx_grid.points3d, "tx")  # (L, G_T)
    # int H^H(r, s) J_R(r) dr = sum_l h_l conj(b_l(s)) Xi_l^H R_l^H
    inner = np.einsum("l,lqp,lmq->lpm", scene.gains, scene.xis.conj(), r.conj())
    raw = np.einsum("lg,lpm->gpm", b.conj(), inner) @ (np.asarray(a_tilde) / lambda_t)
    fld = BeamformerField(tx_grid, raw, p_tx)
    if not fld.norm_sq() > 0:
        raise DegenerateObjectiveError("TX matched filter vanished")
    return fld.normalized()


def rx_update(j_tx: BeamformerField, scene: Scene, b_tilde, lambda_r: float,
              rx_grid: QuadGrid2D) -> BeamformerField:
    """RX matched filter ``(int H(r, s) J_T(s) ds) B_tilde / lambda_r``, rescaled to unit power."""
    if not lambda_r > 0:
        raise InvalidArgumentError("lambda_r must be positive")
    t = _tx_projections(j_tx, scene)  # (L, 3, M)
    a = aperture_phases(scene, rx_grid.points3d, "rx")
    inner = np.einsum("l,lpq,lqm->lpm", scene.gains, scene.xis, t)
    raw = np.einsum("lg,lpm->gpm", a, inner) @ (np.asarray(b_tilde) / lambda_r)
    fld = BeamformerField(rx_grid, raw, 1.0)
    if not fld.norm_sq() > 0:
        raise DegenerateObjectiveError("RX matched filter vanished")
    return fld.normalized()


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 20
    rel_tol: float = 1e-8
    p_tx: float = 1.0
    n_streams: int = 10
    gl_order: int = 10

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be >= 1")
        if self.rel_tol < 0:
            raise InvalidArgumentError("rel_tol must be >= 0")
        if not self.p_tx > 0:
            raise InvalidArgumentError("p_tx must be positive")
        if self.n_streams < 1 or self.gl_order < 1:
            raise InvalidArgumentError("n_streams and gl_order must be >= 1")


@dataclass
class OptimizationTrace:
    """History of one optimizer run.

    ``objective_per_iter[0]`` is the objective of the initial fields and entry
    ``i`` the objective after ``i`` iterations. ``tx_power_per_iter`` and
    ``rx_power_per_iter`` hold the quadrature powers of the fields after each
    iteration. ``status`` is ``"converged"``, ``"max_iters"`` or
    ``"degenerate"``.
    """

    objective_per_iter: list[float]
    j_tx: BeamformerField
    j_rx: BeamformerField
    iterations_used: int
    status: str
    lambda_per_iter: list[float] = field(default_factory=list)
    tx_power_per_iter: list[float] = field(default_factory=list)
    rx_power_per_iter: list[float] = field(default_factory=list)
    diagnostic: str = ""

    @property
    def final_objective(self) -> float:
        return self.objective_per_iter[-1]

    @property
    def initial_objective(self) -> float:
        return self.objective_per_iter[0]

    @property
    def failed(self) -> bool:
        return self.status == "degenerate"

    def stream_correlation(self) -> np.ndarray:
        """``|<j_m, j_n>| / (||j_m|| ||j_n||)`` between TX stream fields (M x M)."""
        w = self.j_tx.grid.weights
        s = self.j_tx.samples
        gram = np.einsum("g,gpm,gpn->mn", w, s.conj(), s)
        d = np.sqrt(np.real(np.diag(gram)))
        return np.abs(gram) / np.outer(d, d)


def optimize(scene: Scene, config: OptimizerConfig = OptimizerConfig(),
             j_tx: BeamformerField | None = None, j_rx: BeamformerField | None = None) -> OptimizationTrace:
    """Alternating TX/RX matched-filter iteration from all-ones initial fields.

    Stops after ``config.max_iters`` iterations or once the relative objective
    change drops below ``config.rel_tol``. A zero initial objective is
    reported through ``status == "degenerate"`` rather than raised.
    """
    tx_grid, rx_grid = grids_for_scene(scene, config.gl_order)
    if j_tx is None:
        j_tx = constant_field(tx_grid, config.n_streams, config.p_tx)
    if j_rx is None:
        j_rx = constant_field(rx_grid, config.n_streams, 1.0)

    o = coupling_matrix(j_tx, j_rx, scene).o
    objectives = [float(np.sum(np.abs(o) ** 2))]
    trace = OptimizationTrace(objectives, j_tx, j_rx, 0, "max_iters")

    for it in range(1, config.max_iters + 1):
        try:
            lam = max_singular_value(o)
            j_tx = tx_update(j_rx, scene, o, lam, config.p_tx, tx_grid)
            j_rx = rx_update(j_tx, scene, o, lam, rx_grid)
        except DegenerateObjectiveError as exc:
            trace.status = "degenerate"
            trace.diagnostic = f"iteration {it}: {exc}"
            return trace
        o = coupling_matrix(j_tx, j_rx, scene).o
        objectives.append(float(np.sum(np.abs(o) ** 2)))
        trace.lambda_per_iter.append(lam)
        trace.tx_power_per_iter.append(j_tx.norm_sq())
        trace.rx_power_per_iter.append(j_rx.norm_sq())
        trace.j_tx, trace.j_rx, trace.iterations_used = j_tx, j_rx, it
        prev, cur = objectives[-2], objectives[-1]
        if abs(cur - prev) <= config.rel_tol * abs(cur):
            trace.status = "converged"
            break
    return trace


def receive_power_db(o) -> float:
    """``10 log10 ||O||_F^2`` (dB re unit power); ``-inf`` for zero power."""
    power = o.rx_power if isinstance(o, CouplingMatrix) else float(o)
    if power <= 0:
        return float("-inf")
    return 10.0 * math.log10(power)
