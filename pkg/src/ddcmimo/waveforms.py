"""Delay-Doppler time-domain operators and OFDM/OTFS/AFDM effective channels.

Frames are modeled after cyclic-prefix removal, so a path acts on a length-N
block as ``G = Phi @ Z**f @ Pi**zeta`` (prefix phase, Doppler, circular
delay). Each waveform is a unitary demodulation matrix ``D``; its effective
per-path operator is ``D @ G @ D^H`` and modulation is ``D^H``.

Stacked vectors follow the stream-major layout ``[c_1; ...; c_M]`` with each
block of length N, so ``(H_check kron G) c`` equals ``H_check @ C @ G.T`` on
the ``(M, N)`` reshaped array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import dft

from .exceptions import InvalidArgumentError, ShapeMismatchError

__all__ = [
    "WaveformKind",
    "ofdm",
    "otfs",
    "afdm",
    "afdm_default_c1",
    "DelayDopplerOp",
    "EffectiveChannel",
    "SymbolFrame",
    "NoiseModel",
    "shift_matrix_power",
    "doppler_matrix_power",
    "prefix_phase_matrix",
    "time_domain_op",
    "demodulation_matrix",
    "effective_op",
    "modulate",
    "demodulate",
    "assemble_effective_channel",
    "simulate_io",
    "DENSE_SIZE_CAP",
]

DENSE_SIZE_CAP = 512


@dataclass(frozen=True)
class WaveformKind:
    """Waveform selector. Use :func:`ofdm`, :func:`otfs` or :func:`afdm` to build one."""

    name: str
    n: int
    m_tilde: int = 0
    m_tilde_prime: int = 0
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if self.name not in ("ofdm", "otfs", "afdm"):
            raise InvalidArgumentError(f"unknown waveform {self.name!r}")
        if self.n < 1:
            raise InvalidArgumentError("frame length must be >= 1")
        if self.name == "otfs" and self.m_tilde * self.m_tilde_prime != self.n:
            raise InvalidArgumentError(
                f"OTFS grid {self.m_tilde}x{self.m_tilde_prime} does not factor N={self.n}"
            )


def ofdm(n: int) -> WaveformKind:
    return WaveformKind("ofdm", n)


def otfs(m_tilde: int, m_tilde_prime: int) -> WaveformKind:
    """OTFS on an ``m_tilde`` (delay) by ``m_tilde_prime`` (Doppler) grid."""
    return WaveformKind("otfs", m_tilde * m_tilde_prime, m_tilde=m_tilde, m_tilde_prime=m_tilde_prime)


def afdm(n: int, c1: float, c2: float = 0.0) -> WaveformKind:
    return WaveformKind("afdm", n, c1=c1, c2=c2)


def afdm_default_c1(max_norm_doppler: float, n: int) -> float:
    """Chirp rate ``(2 ceil(f_max) + 1) / (2N)`` covering the Doppler spread."""
    return (2 * math.ceil(abs(max_norm_doppler)) + 1) / (2 * n)


def shift_matrix_power(n: int, zeta: int) -> np.ndarray:
    """``Pi**zeta`` where ``Pi[i, j] = 1`` iff ``i == j + 1 (mod n)``."""
    if not 0 <= zeta <= n - 1:
        raise InvalidArgumentError(f"delay index {zeta} outside [0, {n - 1}]")
    return np.roll(np.eye(n, dtype=complex), zeta, axis=0)


def doppler_matrix_power(n: int, f: float) -> np.ndarray:
    """``Z**f = diag(exp(-j 2 pi f k / n))``, fractional ``f`` allowed."""
    k = np.arange(n)
    return np.diag(np.exp(-2j * np.pi * f * k / n))


def _prefix_phase_diag(n: int, zeta: int, kind: WaveformKind) -> np.ndarray:
    if not 0 <= zeta <= n - 1:
        raise InvalidArgumentError(f"delay index {zeta} outside [0, {n - 1}]")
    d = np.ones(n, dtype=complex)
    if kind.name == "afdm" and zeta > 0:
        # Slot k < zeta carries phi(zeta - k), phi(m) = c1 (N^2 - 2 N m).
        m = zeta - np.arange(zeta)
        d[:zeta] = np.exp(-2j * np.pi * kind.c1 * (n * n - 2 * n * m))
    return d


def prefix_phase_matrix(n: int, zeta: int, kind: WaveformKind) -> np.ndarray:
    """Diagonal prefix phase matrix; identity for OFDM/OTFS, chirp-periodic for AFDM."""
    return np.diag(_prefix_phase_diag(n, zeta, kind))


@dataclass(frozen=True)
class DelayDopplerOp:
    """Per-path time-domain operator ``Phi @ Z**f @ Pi**zeta``."""

    n: int
    zeta: int
    f: float
    kind: WaveformKind
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = (
            _prefix_phase_diag(self.n, self.zeta, self.kind)[:, None]
            * np.exp(-2j * np.pi * self.f * np.arange(self.n) / self.n)[:, None]
            * shift_matrix_power(self.n, self.zeta)
        )
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)


def time_domain_op(n: int, zeta: int, f: float, kind: WaveformKind) -> DelayDopplerOp:
    return DelayDopplerOp(n, zeta, f, kind)


def demodulation_matrix(kind: WaveformKind) -> np.ndarray:
    """Unitary ``D`` with demodulation ``y = D r`` and modulation ``c = D^H x``."""
    n = kind.n
    if kind.name == "ofdm":
        return dft(n, scale="sqrtn")
    if kind.name == "otfs":
        return np.kron(dft(kind.m_tilde_prime, scale="sqrtn"), np.eye(kind.m_tilde))
    k2 = np.arange(n) ** 2
    lam1 = np.exp(-2j * np.pi * kind.c1 * k2)
    lam2 = np.exp(-2j * np.pi * kind.c2 * k2)
    return lam2[:, None] * dft(n, scale="sqrtn") * lam1[None, :]


def effective_op(g, kind: WaveformKind) -> np.ndarray:
    """Waveform-domain operator ``D @ g @ D^H``."""
    g = np.asarray(g)
    if g.shape != (kind.n, kind.n):
        raise InvalidArgumentError(f"operator shape {g.shape} does not match N={kind.n}")
    d = demodulation_matrix(kind)
    return d @ g @ d.conj().T


@dataclass
class SymbolFrame:
    """``M`` symbol streams of length ``N`` stored as an ``(M, N)`` array.

    OTFS grids ``X_m`` (``m_tilde x m_tilde_prime``) are column-stacked into
    their stream.
    """

    streams: np.ndarray

    def __post_init__(self):
        self.streams = np.atleast_2d(np.asarray(self.streams, dtype=complex))
        if self.streams.ndim != 2 or self.streams.shape[0] < 1:
            raise ShapeMismatchError(f"streams must be (M, N), got {self.streams.shape}")

    @property
    def m(self) -> int:
        return self.streams.shape[0]

    @property
    def n(self) -> int:
        return self.streams.shape[1]

    @classmethod
    def from_grids(cls, grids) -> "SymbolFrame":
        grids = np.asarray(grids)
        return cls(np.stack([g.reshape(-1, order="F") for g in grids]))

    def grids(self, m_tilde: int) -> np.ndarray:
        return np.stack([s.reshape(m_tilde, -1, order="F") for s in self.streams])

    @classmethod
    def random_qam(cls, m: int, n: int, order: int = 4, energy: float = 1.0, seed=None) -> "SymbolFrame":
        """Square QAM symbols normalized to average energy ``energy``."""
        side = int(round(math.sqrt(order)))
        if side * side != order:
            raise InvalidArgumentError("QAM order must be a perfect square")
        rng = np.random.default_rng(seed)
        levels = 2 * np.arange(side) - (side - 1)
        pts = (levels[:, None] + 1j * levels[None, :]).ravel()
        pts = pts * math.sqrt(energy / np.mean(np.abs(pts) ** 2))
        return cls(rng.choice(pts, size=(m, n)))


@dataclass(frozen=True)
class NoiseModel:
    """Circularly-symmetric complex AWGN with per-sample variance ``variance``."""

    variance: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.variance < 0:
            raise InvalidArgumentError("noise variance must be nonnegative")

    def sample(self, shape) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        scale = math.sqrt(self.variance / 2.0)
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def modulate(frame: SymbolFrame, kind: WaveformKind) -> np.ndarray:
    """Time-domain streams ``D^H x_m`` as an ``(M, N)`` array."""
    if frame.n != kind.n:
        raise ShapeMismatchError(f"frame length {frame.n} does not match N={kind.n}")
    d = demodulation_matrix(kind)
    return frame.streams @ d.conj()


def demodulate(streams, kind: WaveformKind) -> SymbolFrame:
    """Inverse of :func:`modulate`."""
    streams = np.atleast_2d(np.asarray(streams, dtype=complex))
    if streams.shape[1] != kind.n:
        raise ShapeMismatchError(f"stream length {streams.shape[1]} does not match N={kind.n}")
    d = demodulation_matrix(kind)
    return SymbolFrame(streams @ d.T)


@dataclass(frozen=True)
class EffectiveChannel:
    """Lazy ``sum_l H_check_l kron G_l`` acting on stream-major ``NM`` vectors."""

    couplings: np.ndarray
    ops: np.ndarray
    kind: WaveformKind

    def __post_init__(self):
        h = np.asarray(self.couplings, dtype=complex)
        g = np.asarray(self.ops, dtype=complex)
        if h.ndim != 3 or g.ndim != 3 or h.shape[0] != g.shape[0]:
            raise ShapeMismatchError("couplings and ops must be equal-length stacks of matrices")
        if h.shape[1] != h.shape[2] or g.shape[1] != g.shape[2] or g.shape[1] != self.kind.n:
            raise ShapeMismatchError("couplings must be MxM and ops NxN")
        object.__setattr__(self, "couplings", h)
        object.__setattr__(self, "ops", g)

    @property
    def n(self) -> int:
        return self.ops.shape[1]

    @property
    def m(self) -> int:
        return self.couplings.shape[1]

    def apply(self, x) -> np.ndarray:
        """``sum_l (H_l kron G_l) x`` without forming the ``NM x NM`` matrix."""
        x = np.asarray(x)
        if x.shape != (self.m * self.n,):
            raise ShapeMismatchError(f"expected a vector of length {self.m * self.n}, got {x.shape}")
        xm = x.reshape(self.m, self.n)
        y = np.einsum("lab,bk,lnk->an", self.couplings, xm, self.ops)
        return y.reshape(-1)

    def dense(self) -> np.ndarray:
        size = self.m * self.n
        if size > DENSE_SIZE_CAP:
            raise InvalidArgumentError(f"refusing to materialize a {size}x{size} channel (cap {DENSE_SIZE_CAP})")
        return sum(np.kron(h, g) for h, g in zip(self.couplings, self.ops))

    def frobenius_sq(self) -> float:
        """``||sum_l H_l kron G_l||_F^2`` via the Gram identity, no materialization."""
        gram_h = np.einsum("lab,kab->lk", self.couplings.conj(), self.couplings)
        gram_g = np.einsum("lab,kab->lk", self.ops.conj(), self.ops)
        return float(np.real(np.sum(gram_h * gram_g)))


def assemble_effective_channel(couplings: Sequence, dd_params: Sequence, kind: WaveformKind) -> EffectiveChannel:
    """Effective channel from per-path couplings and ``(zeta, f)`` pairs."""
    if len(couplings) != len(dd_params):
        raise ShapeMismatchError("need one (zeta, f) pair per coupling matrix")
    ops = np.stack([effective_op(time_domain_op(kind.n, z, f, kind).matrix, kind) for z, f in dd_params])
    return EffectiveChannel(np.asarray(couplings, dtype=complex), ops, kind)


def simulate_io(channel: EffectiveChannel, frame: SymbolFrame, noise: NoiseModel) -> SymbolFrame:
    """Waveform-domain received frame ``y = H_eff x + w``."""
    if frame.streams.shape != (channel.m, channel.n):
        raise ShapeMismatchError(f"frame shape {frame.streams.shape} does not match ({channel.m}, {channel.n})")
    y = channel.apply(frame.streams.reshape(-1)).reshape(channel.m, channel.n)
    if noise.variance > 0:
        y = y + noise.sample(y.shape)
    return SymbolFrame(y)
