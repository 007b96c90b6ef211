"""Doubly-dispersive channel between two rectangular continuous apertures.

Geometry: the TX aperture lies in the x-z plane centered at the origin and
the RX aperture lies in the parallel plane ``y = separation_m``. Points on an
aperture are passed to the kernels as *local* 3-vectors ``[x, 0, z]``
relative to that aperture's center; the constant phase of the center
offset is absorbed into the path gain phase, which the power objective never
sees.

Each scattering path carries delay, Doppler, a real large-scale gain, unit
departure/arrival directions and a 3x3 polarization operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .exceptions import InvalidArgumentError, SingularityError

__all__ = [
    "SPEED_OF_LIGHT",
    "Aperture",
    "Path",
    "Scene",
    "SceneSamplingParams",
    "DelayDopplerIndex",
    "transverse_projector",
    "polarization_operator",
    "path_gain",
    "sample_scene",
    "spatial_kernel",
    "spacetime_kernel",
    "aperture_phases",
    "normalize_delay_doppler",
    "greens_dyadic_exact",
    "greens_dyadic_far_field",
    "scene_to_text",
    "scene_from_text",
]

_UNIT_TOL = 1e-9


def _check_unit(k, name="k") -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise InvalidArgumentError(f"{name} must be a 3-vector, got shape {k.shape}")
    if abs(np.linalg.norm(k) - 1.0) > _UNIT_TOL:
        raise InvalidArgumentError(f"{name} must have unit norm, got {np.linalg.norm(k)!r}")
    return k


def transverse_projector(k) -> np.ndarray:
    """``I - k k^T`` for a unit propagation direction ``k``."""
    k = _check_unit(k)
    return (np.eye(3) - np.outer(k, k)).astype(complex)


def polarization_operator(gamma, k_tx, k_rx) -> np.ndarray:
    """Compose the RX projector, the transfer matrix and the TX projector.

    ``Xi = (I - k_rx k_rx^T) @ gamma @ (I - k_tx k_tx^T)``
    """
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.shape != (3, 3):
        raise InvalidArgumentError(f"gamma must be 3x3, got {gamma.shape}")
    return transverse_projector(k_rx) @ gamma @ transverse_projector(k_tx)


def path_gain(d_tx_m: float, d_rx_m: float, n_paths: int) -> float:
    """Large-scale gain ``1 / (sqrt(L) (4 pi)^2 d_rx d_tx)``."""
    if not (d_tx_m > 0 and d_rx_m > 0):
        raise InvalidArgumentError("scatterer distances must be positive")
    if n_paths < 1:
        raise InvalidArgumentError("n_paths must be at least 1")
    return 1.0 / (math.sqrt(n_paths) * (4.0 * math.pi) ** 2 * d_rx_m * d_tx_m)


@dataclass(frozen=True)
class Aperture:
    """Rectangular aperture with sides along x and z (meters)."""

    side_x: float
    side_z: float

    def __post_init__(self):
        if not (self.side_x > 0 and self.side_z > 0):
            raise InvalidArgumentError("aperture sides must be positive")

    @property
    def area(self) -> float:
        return self.side_x * self.side_z

    @classmethod
    def square(cls, area_m2: float) -> "Aperture":
        side = math.sqrt(area_m2)
        return cls(side, side)


@dataclass(frozen=True)
class Path:
    """One scattering path."""

    delay_s: float
    doppler_hz: float
    gain: float
    k_tx: np.ndarray
    k_rx: np.ndarray
    gamma: np.ndarray
    xi: np.ndarray
    d_tx_m: float
    d_rx_m: float

    def __post_init__(self):
        k_tx = _check_unit(self.k_tx, "k_tx")
        k_rx = _check_unit(self.k_rx, "k_rx")
        if self.delay_s < 0:
            raise InvalidArgumentError("delay must be nonnegative")
        if not self.gain > 0:
            raise InvalidArgumentError("gain must be positive")
        gamma = np.array(self.gamma, dtype=complex)
        xi = np.array(self.xi, dtype=complex)
        if gamma.shape != (3, 3) or xi.shape != (3, 3):
            raise InvalidArgumentError("gamma and xi must be 3x3")
        tol = 1e-12 * max(1.0, float(np.linalg.norm(xi)))
        if np.linalg.norm(k_rx @ xi) > tol or np.linalg.norm(xi @ k_tx) > tol:
            raise InvalidArgumentError("xi is not transverse to the path directions")
        for name, arr in (("k_tx", k_tx), ("k_rx", k_rx), ("gamma", gamma), ("xi", xi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_geometry(cls, *, delay_s, doppler_hz, gain, k_tx, k_rx, gamma, d_tx_m, d_rx_m) -> "Path":
        """Build a path, deriving ``xi`` from ``gamma`` and the directions."""
        return cls(
            delay_s=delay_s,
            doppler_hz=doppler_hz,
            gain=gain,
            k_tx=k_tx,
            k_rx=k_rx,
            gamma=gamma,
            xi=polarization_operator(gamma, k_tx, k_rx),
            d_tx_m=d_tx_m,
            d_rx_m=d_rx_m,
        )


@dataclass(frozen=True)
class Scene:
    """Carrier/bandwidth parameters and the scattering paths between two apertures."""

    paths: tuple[Path, ...]
    carrier_hz: float = 2.4e9
    bandwidth_hz: float = 1e6
    sampling_hz: float = 1e6
    tx_aperture: Aperture = field(default_factory=lambda: Aperture(0.5, 0.5))
    rx_aperture: Aperture = field(default_factory=lambda: Aperture(0.5, 0.5))
    separation_m: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) < 1:
            raise InvalidArgumentError("a scene needs at least one path")
        if not (self.carrier_hz > 0 and self.sampling_hz > 0 and self.bandwidth_hz > 0):
            raise InvalidArgumentError("frequencies must be positive")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength_m

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def with_paths(self, paths: Sequence[Path]) -> "Scene":
        return replace(self, paths=tuple(paths))

    def scaled_gains(self, factor: float) -> "Scene":
        """Copy of the scene with every path gain multiplied by ``factor``."""
        return self.with_paths([replace(p, gain=p.gain * factor) for p in self.paths])

    # Stacked per-path arrays, handy for vectorized kernels.
    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths])

    @property
    def xis(self) -> np.ndarray:
        return np.stack([p.xi for p in self.paths])

    @property
    def k_txs(self) -> np.ndarray:
        return np.stack([p.k_tx for p in self.paths])

    @property
    def k_rxs(self) -> np.ndarray:
        return np.stack([p.k_rx for p in self.paths])


@dataclass(frozen=True)
class SceneSamplingParams:
    """Ranges for random scatterer placement (defaults from the system table)."""

    n_paths: int = 5
    r_max_m: float = 1500.0
    v_max_mps: float = 122.0
    seed: int = 0
    min_range_m: float = 10.0

    def __post_init__(self):
        if self.n_paths < 1:
            raise InvalidArgumentError("n_paths must be >= 1")
        if not self.r_max_m > 0:
            raise InvalidArgumentError("r_max_m must be positive")
        if self.v_max_mps < 0:
            raise InvalidArgumentError("v_max_mps must be nonnegative")
        if not 0 <= self.min_range_m < self.r_max_m:
            raise InvalidArgumentError("min_range_m must lie in [0, r_max_m)")


def sample_scene(
    params: SceneSamplingParams,
    *,
    carrier_hz: float = 2.4e9,
    bandwidth_hz: float = 1e6,
    sampling_hz: float = 1e6,
    tx_aperture: Aperture | None = None,
    rx_aperture: Aperture | None = None,
    separation_m: float = 100.0,
) -> Scene:
    """Draw a random scene; deterministic for a given ``params.seed``.

    Scatterers are uniform in the cube of half-width ``r_max / sqrt(3)``
    centered midway between the apertures (so each lies within ``r_max`` of
    that midpoint), rejecting positions closer than ``min_range_m`` to either
    aperture center. Velocities have a uniform direction on the sphere and a
    speed uniform on ``[0, v_max]``. Entries of the transfer matrix are
    i.i.d. CN(0, 1).
    """
    tx_aperture = tx_aperture or Aperture(0.5, 0.5)
    rx_aperture = rx_aperture or Aperture(0.5, 0.5)
    rng = np.random.default_rng(params.seed)
    wavelength = SPEED_OF_LIGHT / carrier_hz
    tx_center = np.zeros(3)
    rx_center = np.array([0.0, separation_m, 0.0])
    mid = 0.5 * (tx_center + rx_center)
    half = params.r_max_m / math.sqrt(3.0)

    paths = []
    while len(paths) < params.n_paths:
        u = mid + rng.uniform(-half, half, size=3)
        d_tx = float(np.linalg.norm(u - tx_center))
        d_rx = float(np.linalg.norm(u - rx_center))
        if min(d_tx, d_rx) < params.min_range_m:
            continue
        k_tx = (u - tx_center) / d_tx
        k_rx = (u - rx_center) / d_rx
        direction = rng.standard_normal(3)
        direction /= np.linalg.norm(direction)
        velocity = rng.uniform(0.0, params.v_max_mps) * direction
        gamma = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / math.sqrt(2.0)
        # Radial speeds on both legs add up to the bistatic Doppler.
        doppler = float((k_tx + k_rx) @ velocity) / wavelength
        paths.append(
            Path.from_geometry(
                delay_s=(d_tx + d_rx) / SPEED_OF_LIGHT,
                doppler_hz=doppler,
                gain=path_gain(d_tx, d_rx, params.n_paths),
                k_tx=k_tx,
                k_rx=k_rx,
                gamma=gamma,
                d_tx_m=d_tx,
                d_rx_m=d_rx,
            )
        )
    return Scene(
        paths=tuple(paths),
        carrier_hz=carrier_hz,
        bandwidth_hz=bandwidth_hz,
        sampling_hz=sampling_hz,
        tx_aperture=tx_aperture,
        rx_aperture=rx_aperture,
        separation_m=separation_m,
    )


def aperture_phases(scene: Scene, points, side: str) -> np.ndarray:
    """Per-path plane-wave phases ``exp(j kappa k^T p)`` at local aperture points.

    Returns an array of shape ``(L, n_points)``. ``side`` is ``"tx"`` or ``"rx"``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ks = scene.k_txs if side == "tx" else scene.k_rxs
    return np.exp(1j * scene.wavenumber * (ks @ pts.T))


def spatial_kernel(scene: Scene, r, s) -> np.ndarray:
    """Delay/time independent kernel ``H(r, s)`` (3x3) between local points."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    a = aperture_phases(scene, r, "rx")[:, 0]
    b = aperture_phases(scene, s, "tx")[:, 0]
    coef = scene.gains * a * b
    return np.einsum("l,lij->ij", coef, scene.xis)


def spacetime_kernel(scene: Scene, r, s, tau_s: float, t_s: float) -> np.ndarray:
    """Kernel at delay ``tau_s`` and time ``t_s``.

    The delay impulse is realized as a bin match: only paths with
    ``|tau_s - delay| < 1 / (2 F_S)`` contribute.
    """
    half_bin = 0.5 / scene.sampling_hz
    out = np.zeros((3, 3), dtype=complex)
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    kappa = scene.wavenumber
    for p in scene.paths:
        if abs(tau_s - p.delay_s) < half_bin:
            phase = np.exp(-2j * math.pi * p.doppler_hz * t_s) * np.exp(1j * kappa * (p.k_rx @ r + p.k_tx @ s))
            out += p.gain * phase * p.xi
    return out


class DelayDopplerIndex(NamedTuple):
    zeta: int
    f: float
    out_of_band: bool


def normalize_delay_doppler(tau_s: float, nu_hz: float, sampling_hz: float, n: int) -> DelayDopplerIndex:
    """Map a physical delay/Doppler pair onto the sampled frame.

    The delay index is rounded and clamped to ``[0, n-1]`` (``out_of_band``
    flags clamping); the normalized Doppler ``n * nu / F_S`` stays fractional.
    """
    if not sampling_hz > 0:
        raise InvalidArgumentError("sampling_hz must be positive")
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    raw = tau_s * sampling_hz
    zeta = int(round(raw))
    out_of_band = raw > n - 1
    zeta = min(max(zeta, 0), n - 1)
    return DelayDopplerIndex(zeta, n * nu_hz / sampling_hz, out_of_band)


def greens_dyadic_exact(a, b, wavenumber: float) -> np.ndarray:
    """Closed-form dyadic Green's function ``(I + grad grad / kappa^2) g(a, b)``."""
    if not wavenumber > 0:
        raise InvalidArgumentError("wavenumber must be positive")
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise SingularityError("dyadic Green's function is singular at coincident points")
    rhat = d / dist
    kr = wavenumber * dist
    g = np.exp(-1j * kr) / (4.0 * math.pi * dist)
    c_iso = 1.0 - 1j / kr - 1.0 / kr**2
    c_rad = 1.0 - 3j / kr - 3.0 / kr**2
    return g * (c_iso * np.eye(3) - c_rad * np.outer(rhat, rhat))


def greens_dyadic_far_field(a, b, wavenumber: float) -> np.ndarray:
    """Far-field form ``g(a, b) (I - R R^T)`` of the dyadic Green's function."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise SingularityError("dyadic Green's function is singular at coincident points")
    rhat = d / dist
    g = np.exp(-1j * wavenumber * dist) / (4.0 * math.pi * dist)
    return g * (np.eye(3) - np.outer(rhat, rhat))


# -- plain-text serialization -------------------------------------------------

_SCENE_KEYS = ("carrier_hz", "bandwidth_hz", "sampling_hz", "separation_m")
_PATH_REAL = ("delay_s", "doppler_hz", "gain", "d_tx_m", "d_rx_m")


def _fmt_real(x: float) -> str:
    return repr(float(x))


def _fmt_array(arr: np.ndarray) -> str:
    flat = np.asarray(arr).ravel()
    if np.iscomplexobj(flat):
        return ",".join(f"{_fmt_real(v.real)}{'+' if math.copysign(1, v.imag) > 0 else '-'}{_fmt_real(abs(v.imag))}j" for v in flat)
    return ",".join(_fmt_real(v) for v in flat)


def scene_to_text(scene: Scene) -> str:
    """Serialize a scene as ``key=value`` lines (``path.<i>.<field>=...`` per path field)."""
    lines = [f"{k}={_fmt_real(getattr(scene, k))}" for k in _SCENE_KEYS]
    lines.append(f"tx_aperture={_fmt_real(scene.tx_aperture.side_x)},{_fmt_real(scene.tx_aperture.side_z)}")
    lines.append(f"rx_aperture={_fmt_real(scene.rx_aperture.side_x)},{_fmt_real(scene.rx_aperture.side_z)}")
    lines.append(f"n_paths={scene.n_paths}")
    for i, p in enumerate(scene.paths):
        for name in _PATH_REAL:
            lines.append(f"path.{i}.{name}={_fmt_real(getattr(p, name))}")
        for name in ("k_tx", "k_rx", "gamma", "xi"):
            lines.append(f"path.{i}.{name}={_fmt_array(getattr(p, name))}")
    return "\n".join(lines) + "\n"


def scene_from_text(text: str) -> Scene:
    """Inverse of :func:`scene_to_text`; reproduces every float bit-for-bit."""
    kv = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        kv[key.strip()] = value.strip()

    n_paths = int(kv["n_paths"])
    paths = []
    for i in range(n_paths):
        pre = f"path.{i}."
        reals = {name: float(kv[pre + name]) for name in _PATH_REAL}
        vecs = {name: np.array([float(v) for v in kv[pre + name].split(",")]) for name in ("k_tx", "k_rx")}
        mats = {
            name: np.array([complex(v) for v in kv[pre + name].split(",")]).reshape(3, 3)
            for name in ("gamma", "xi")
        }
        paths.append(Path(**reals, **vecs, **mats))
    tx = [float(v) for v in kv["tx_aperture"].split(",")]
    rx = [float(v) for v in kv["rx_aperture"].split(",")]
    return Scene(
        paths=tuple(paths),
        carrier_hz=float(kv["carrier_hz"]),
        bandwidth_hz=float(kv["bandwidth_hz"]),
        sampling_hz=float(kv["sampling_hz"]),
        tx_aperture=Aperture(*tx),
        rx_aperture=Aperture(*rx),
        separation_m=float(kv["separation_m"]),
    )
