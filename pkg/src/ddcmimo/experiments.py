"""Experiment configuration, sweeps, CSV/SVG output and the validation report.

Config files are flat ``key=value`` lines; ``#`` starts a comment. Resolution
order is defaults, then preset, then file, then explicit overrides.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .baselines import (
    ElementChannel,
    conventional_antenna_grid,
    discrete_optimize,
    svd_baseline_power,
    uniform_antenna_grid,
)
from .beamforming import OptimizerConfig, optimize, path_couplings
from .channel import (
    Aperture,
    Scene,
    SceneSamplingParams,
    greens_dyadic_exact,
    greens_dyadic_far_field,
    normalize_delay_doppler,
    sample_scene,
    transverse_projector,
)
from .exceptions import ConfigError
from .quadrature import legendre_rule
from .waveforms import (
    EffectiveChannel,
    WaveformKind,
    afdm,
    afdm_default_c1,
    assemble_effective_channel,
    effective_op,
    ofdm,
    otfs,
    time_domain_op,
)

__all__ = [
    "ExperimentConfig",
    "PRESETS",
    "FIGURES",
    "SWEEP_GRIDS",
    "CSV_HEADER",
    "SweepRow",
    "SweepResult",
    "SeedRecord",
    "CheckResult",
    "load_config",
    "parse_config_text",
    "waveform_for",
    "scene_for_seed",
    "run_single",
    "run_sweep",
    "write_csv",
    "read_csv",
    "write_metadata",
    "emit_plot",
    "validate",
    "format_report",
]


@dataclass(frozen=True)
class ExperimentConfig:
    carrier_hz: float = 2.4e9
    bandwidth_hz: float = 1e6
    sampling_hz: float = 1e6
    n_subcarriers: int = 64
    n_streams: int = 10
    n_paths: int = 5
    r_max_m: float = 1500.0
    v_max_mps: float = 122.0
    aperture_m2: float = 0.25
    tx_rx_separation_m: float = 100.0
    p_tx: float = 1.0
    gl_order: int = 10
    iterations: int = 20
    rel_tol: float = 1e-8
    waveform: str = "ofdm"
    otfs_m_tilde: int | None = None
    afdm_c1: float | None = None
    afdm_c2: float = 0.0
    seed: int = 0
    n_seeds: int = 20

    def __post_init__(self):
        positive = (
            "carrier_hz", "bandwidth_hz", "sampling_hz", "n_subcarriers", "n_streams", "n_paths",
            "r_max_m", "aperture_m2", "tx_rx_separation_m", "p_tx", "gl_order", "iterations", "n_seeds",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.v_max_mps < 0 or self.rel_tol < 0 or self.seed < 0:
            raise ConfigError("v_max_mps, rel_tol and seed must be nonnegative")
        if self.waveform not in ("ofdm", "otfs", "afdm"):
            raise ConfigError(f"waveform must be ofdm, otfs or afdm, got {self.waveform!r}")
        if self.otfs_m_tilde is not None:
            if self.otfs_m_tilde < 1 or self.n_subcarriers % self.otfs_m_tilde:
                raise ConfigError(f"otfs_m_tilde={self.otfs_m_tilde} must divide n_subcarriers={self.n_subcarriers}")

    @property
    def seeds(self) -> list[int]:
        return list(range(self.seed, self.seed + self.n_seeds))

    def optimizer(self, **changes) -> OptimizerConfig:
        base = dict(max_iters=self.iterations, rel_tol=self.rel_tol, p_tx=self.p_tx,
                    n_streams=self.n_streams, gl_order=self.gl_order)
        base.update(changes)
        return OptimizerConfig(**base)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


PRESETS = {
    "desk": dict(n_subcarriers=16, n_streams=4, n_paths=3, gl_order=6, n_seeds=5),
}

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INT_KEYS = {"n_subcarriers", "n_streams", "n_paths", "gl_order", "iterations", "seed", "n_seeds", "otfs_m_tilde"}
_OPTIONAL_KEYS = {"otfs_m_tilde", "afdm_c1"}


def _coerce(key: str, raw, where: str):
    if key not in _FIELDS:
        raise ConfigError(f"{where}unknown key {key!r}; valid keys: {', '.join(sorted(_FIELDS))}")
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if key in _OPTIONAL_KEYS and text.lower() in ("", "none", "auto"):
        return None
    if key == "waveform":
        return text.lower()
    try:
        if key in _INT_KEYS:
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}cannot parse {key}={text!r} as a number") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key=value`` lines into a dict of typed values."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}: "
        if "=" not in line:
            raise ConfigError(f"{where}expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = _coerce(key, raw, where)
    return values


def load_config(path=None, overrides: dict | None = None, preset: str | None = None) -> ExperimentConfig:
    """Resolve a config from defaults, an optional preset, a file and overrides."""
    values = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}")
        values.update(PRESETS[preset])
    if path is not None:
        try:
            text = FsPath(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_config_text(text, str(path)))
    for key, raw in (overrides or {}).items():
        values[key] = _coerce(key, raw, "override: ")
    return ExperimentConfig(**values)


# --- scenes and waveforms ---------------------------------------------------


def scene_for_seed(config: ExperimentConfig, seed: int, aperture_m2: float | None = None,
                   n_paths: int | None = None) -> Scene:
    ap = Aperture.square(config.aperture_m2 if aperture_m2 is None else aperture_m2)
    params = SceneSamplingParams(
        n_paths=config.n_paths if n_paths is None else n_paths,
        r_max_m=config.r_max_m,
        v_max_mps=config.v_max_mps,
        seed=seed,
    )
    return sample_scene(
        params,
        carrier_hz=config.carrier_hz,
        bandwidth_hz=config.bandwidth_hz,
        sampling_hz=config.sampling_hz,
        tx_aperture=ap,
        rx_aperture=ap,
        separation_m=config.tx_rx_separation_m,
    )


def _default_m_tilde(n: int) -> int:
    best = 1
    for d in range(1, int(math.isqrt(n)) + 1):
        if n % d == 0:
            best = d
    return n // best


def dd_indices(scene: Scene, n: int) -> list[tuple[int, float]]:
    """Per-path ``(zeta, f)`` on an ``n``-sample frame."""
    out = []
    for p in scene.paths:
        idx = normalize_delay_doppler(p.delay_s, p.doppler_hz, scene.sampling_hz, n)
        out.append((idx.zeta, idx.f))
    return out


def waveform_for(config: ExperimentConfig, name: str | None = None, scene: Scene | None = None) -> WaveformKind:
    """Waveform selected by ``name`` (default ``config.waveform``)."""
    name = name or config.waveform
    n = config.n_subcarriers
    if name == "ofdm":
        return ofdm(n)
    if name == "otfs":
        m_tilde = config.otfs_m_tilde or _default_m_tilde(n)
        return otfs(m_tilde, n // m_tilde)
    c1 = config.afdm_c1
    if c1 is None:
        f_max = max((abs(f) for _, f in dd_indices(scene, n)), default=0.0) if scene is not None else 0.0
        c1 = afdm_default_c1(f_max, n)
    return afdm(n, c1, config.afdm_c2)


def effective_channel(scene: Scene, trace, kind: WaveformKind) -> EffectiveChannel:
    couplings = path_couplings(trace.j_tx, trace.j_rx, scene)
    return assemble_effective_channel(couplings, dd_indices(scene, kind.n), kind)


# --- single runs --------------------------------------------------------------


@dataclass
class SeedRecord:
    """Linear receive powers and traces for one scene and one sweep point."""

    sweep_name: str
    sweep_value: float
    seed: int
    capa: float
    conventional: float
    classical_svd: float
    equal_alloc: float
    iterations_used: int
    capa_trace: list[float] = field(default_factory=list)
    conventional_trace: list[float] = field(default_factory=list)
    tx_power_per_iter: list[float] = field(default_factory=list)
    rx_power_per_iter: list[float] = field(default_factory=list)
    effective_power: dict = field(default_factory=dict)
    calibration: float = 1.0
    status: str = ""


def run_single(config: ExperimentConfig, seed: int, *, p_tx: float | None = None,
               n_streams: int | None = None, aperture_m2: float | None = None,
               n_side: int | None = None, waveforms: Sequence[str] = (),
               sweep_name: str = "run", sweep_value: float = 0.0) -> SeedRecord:
    """Optimize one scene and evaluate every comparator on it.

    ``n_side`` switches the discrete comparators from the half-wavelength
    grid to an ``n_side x n_side`` endpoint-inclusive grid.
    """
    scene = scene_for_seed(config, seed, aperture_m2)
    opt = config.optimizer(**{k: v for k, v in (("p_tx", p_tx), ("n_streams", n_streams)) if v is not None})
    trace = optimize(scene, opt)

    ap = scene.tx_aperture
    if n_side is None:
        pos, _ = conventional_antenna_grid(ap.side_x, ap.side_z, scene.wavelength_m / 2.0)
    else:
        pos, _ = uniform_antenna_grid(ap.side_x, ap.side_z, n_side)
    chan = ElementChannel(scene, pos, pos)
    dtrace = discrete_optimize(chan, opt)
    calib = trace.initial_objective / dtrace.initial_objective if dtrace.initial_objective > 0 else 1.0
    svd_power = svd_baseline_power(chan, opt.p_tx, opt.n_streams, calib)

    eff = {}
    for name in waveforms:
        kind = waveform_for(config, name, scene)
        eff[name] = effective_channel(scene, trace, kind).frobenius_sq() / kind.n

    return SeedRecord(
        sweep_name=sweep_name,
        sweep_value=float(sweep_value),
        seed=seed,
        capa=trace.final_objective,
        conventional=dtrace.final_objective,
        classical_svd=svd_power,
        equal_alloc=trace.initial_objective,
        iterations_used=trace.iterations_used,
        capa_trace=list(trace.objective_per_iter),
        conventional_trace=list(dtrace.objective_per_iter),
        tx_power_per_iter=list(trace.tx_power_per_iter),
        rx_power_per_iter=list(trace.rx_power_per_iter),
        effective_power=eff,
        calibration=calib,
        status=trace.status,
    )


# --- sweeps -------------------------------------------------------------------

FIGURES = ("tx-power", "antennas", "aperture", "streams", "convergence")

SWEEP_GRIDS = {
    "tx-power": [0.1, 1.0, 10.0, 100.0, 1000.0],
    "antennas": [9, 17, 33],
    "aperture": [0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
    "streams": [2, 4, 6, 8, 10],
}

CSV_HEADER = (
    "sweep_name",
    "sweep_value",
    "rx_power_db_capa",
    "rx_power_db_conventional",
    "rx_power_db_classical_svd",
    "rx_power_db_equal_alloc",
    "iterations_used",
    "seed",
)
SERIES = CSV_HEADER[2:6]
AGGREGATE_SEED = -1


def _db(power: float) -> float:
    return 10.0 * math.log10(power) if power > 0 else float("-inf")


def _round9(x: float) -> float:
    return float(f"{x:.9g}")


class SweepRow(NamedTuple):
    sweep_name: str
    sweep_value: float
    rx_power_db_capa: float
    rx_power_db_conventional: float
    rx_power_db_classical_svd: float
    rx_power_db_equal_alloc: float
    iterations_used: int
    seed: int

    @classmethod
    def make(cls, name, value, powers: Sequence[float], iterations: int, seed: int) -> "SweepRow":
        dbs = [_round9(_db(p)) for p in powers]
        return cls(name, _round9(float(value)), *dbs, int(iterations), int(seed))


@dataclass
class SweepResult:
    """Rows in CSV order plus run metadata (resolved config, raw records)."""

    rows: list[SweepRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def sorted(self) -> "SweepResult":
        return SweepResult(sorted(self.rows, key=lambda r: (r.sweep_value, r.seed)), self.metadata)

    def per_seed(self) -> list[SweepRow]:
        return [r for r in self.rows if r.seed != AGGREGATE_SEED]

    def aggregate(self) -> list[SweepRow]:
        return [r for r in self.rows if r.seed == AGGREGATE_SEED]

    def __eq__(self, other):
        return isinstance(other, SweepResult) and self.rows == other.rows


def _records_for(figure: str, config: ExperimentConfig, seeds: Sequence[int]) -> list[SeedRecord]:
    records = []
    if figure == "convergence":
        for seed in seeds:
            rec = run_single(config, seed, sweep_name=figure)
            records.append(rec)
        return records
    for value in SWEEP_GRIDS[figure]:
        for seed in seeds:
            kwargs = {
                "tx-power": {"p_tx": value},
                "antennas": {"n_side": value},
                "aperture": {"aperture_m2": value},
                "streams": {"n_streams": value},
            }[figure]
            sweep_value = value * value if figure == "antennas" else value
            records.append(run_single(config, seed, sweep_name=figure, sweep_value=sweep_value, **kwargs))
    return records


def _convergence_rows(records: Sequence[SeedRecord], n_iters: int) -> list[tuple]:
    out = []
    for rec in records:
        for i in range(n_iters + 1):
            capa = rec.capa_trace[min(i, len(rec.capa_trace) - 1)]
            conv = rec.conventional_trace[min(i, len(rec.conventional_trace) - 1)]
            out.append((i, rec.seed, (capa, conv, rec.classical_svd, rec.equal_alloc), rec.iterations_used))
    return out


def run_sweep(figure: str, config: ExperimentConfig, seeds: Sequence[int] | None = None) -> SweepResult:
    """Run one figure's sweep and return per-seed rows plus aggregate rows.

    Aggregate rows carry ``seed = -1``; their dB values come from the linear
    mean over seeds. For ``convergence`` the sweep value is the iteration
    index (0 is the all-ones initialization).
    """
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    seeds = list(config.seeds if seeds is None else seeds)
    records = _records_for(figure, config, seeds)

    if figure == "convergence":
        points = _convergence_rows(records, config.iterations)
    else:
        points = [(r.sweep_value, r.seed, (r.capa, r.conventional, r.classical_svd, r.equal_alloc), r.iterations_used)
                  for r in records]

    rows = [SweepRow.make(figure, v, p, it, s) for v, s, p, it in points]
    by_value: dict[float, list] = {}
    for v, _, p, it in points:
        by_value.setdefault(v, []).append((p, it))
    for v, group in by_value.items():
        means = np.mean([p for p, _ in group], axis=0)
        rows.append(SweepRow.make(figure, v, means, max(it for _, it in group), AGGREGATE_SEED))

    meta = {
        "figure": figure,
        "config": config.to_dict(),
        "seeds": seeds,
        "grid": list(range(config.iterations + 1)) if figure == "convergence" else SWEEP_GRIDS[figure],
        "svd_comparator": "equal power over top min(M, rank) singular pairs, scalar-calibrated "
                          "to the continuous all-ones initial receive power",
        "records": [dataclasses.asdict(r) for r in records],
    }
    return SweepResult(rows, meta).sorted()


# --- output -------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.9g}"


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.sorted().rows:
        writer.writerow([row.sweep_name, *(_fmt(v) for v in row[1:])])
    return buf.getvalue()


def write_csv(result: SweepResult, path) -> None:
    try:
        FsPath(path).write_text(csv_text(result), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path) -> SweepResult:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ConfigError(f"{path}: unexpected header {header}")
        rows = [
            SweepRow(r[0], float(r[1]), *(float(x) for x in r[2:6]), int(r[6]), int(r[7]))
            for r in reader
        ]
    return SweepResult(rows)


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_metadata(result: SweepResult, path) -> None:
    FsPath(path).write_text(json.dumps(_json_safe(result.metadata), indent=1, sort_keys=True), encoding="utf-8")


_AXIS_LABELS = {
    "tx-power": "Transmit power P_T (dBW)",
    "antennas": "Antennas per array",
    "aperture": "Aperture area (m^2)",
    "streams": "Data streams M",
    "convergence": "Iteration",
}
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#000000")


def _plot_points(result: SweepResult) -> tuple[list[float], dict[str, list]]:
    rows = result.aggregate() or result.rows
    by_value: dict[float, list[SweepRow]] = {}
    for r in rows:
        by_value.setdefault(r.sweep_value, []).append(r)
    xs = sorted(by_value)
    series = {}
    for i, name in enumerate(SERIES):
        pts = []
        for x in xs:
            vals = [r[2 + i] for r in by_value[x] if math.isfinite(r[2 + i])]
            if vals:
                pts.append((x, _db(float(np.mean([10.0 ** (v / 10.0) for v in vals])))))
        if pts:
            series[name] = pts
    return xs, series


def emit_plot(result: SweepResult, path) -> None:
    """Write a standalone SVG line plot: one polyline per comparator with data."""
    if not result.rows:
        raise ConfigError("no data to plot")
    name = result.rows[0].sweep_name
    _, series = _plot_points(result)
    if not series:
        raise ConfigError("no finite data to plot")
    log_x = name == "tx-power"
    tx = (lambda v: 10.0 * math.log10(v)) if log_x else (lambda v: v)
    all_x = [tx(x) for pts in series.values() for x, _ in pts]
    all_y = [y for pts in series.values() for _, y in pts]
    x0, x1 = min(all_x), max(all_x)
    y0, y1 = min(all_y), max(all_y)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    w, h, left, top, pw, ph = 640, 420, 70, 20, 540, 340

    def px(x):
        return left + (tx(x) - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
        f'<text x="{left + pw / 2:.1f}" y="{h - 10}" text-anchor="middle" font-size="13">{_AXIS_LABELS[name]}</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">Receive power (dB)</text>',
        f'<text x="{left - 4}" y="{top + ph:.1f}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{left - 4}" y="{top + 10:.1f}" text-anchor="end" font-size="10">{y1:.4g}</text>',
        f'<text x="{left}" y="{top + ph + 14:.1f}" text-anchor="middle" font-size="10">{x0:.4g}</text>',
        f'<text x="{left + pw}" y="{top + ph + 14:.1f}" text-anchor="middle" font-size="10">{x1:.4g}</text>',
    ]
    for i, col in enumerate(SERIES):
        if col not in series:
            continue
        verts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in series[col])
        label = col.replace("rx_power_db_", "")
        out.append(f'<polyline fill="none" stroke="{_COLORS[i]}" stroke-width="1.5" points="{verts}"><title>{label}</title></polyline>')
        out.append(f'<text x="{left + pw - 4}" y="{top + 14 + 14 * i}" text-anchor="end" font-size="11" fill="{_COLORS[i]}">{label}</text>')
    out.append("</svg>")
    FsPath(path).write_text("\n".join(out) + "\n", encoding="utf-8")


# --- validation ---------------------------------------------------------------


class CheckResult(NamedTuple):
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _check_quadrature(config) -> CheckResult:
    n = config.gl_order
    rule = legendre_rule(n)
    err = 0.0
    for deg in range(2 * n):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        err = max(err, abs(float(np.dot(rule.weights, rule.nodes**deg)) - exact))
    return CheckResult("quadrature exactness", err <= 1e-12, err, 1e-12, f"order {n}, degrees 0..{2 * n - 1}")


def _check_projectors(scene: Scene) -> CheckResult:
    err = 0.0
    for p in scene.paths:
        scale = max(1.0, float(np.linalg.norm(p.xi)))
        err = max(
            err,
            float(np.linalg.norm(transverse_projector(p.k_tx) @ p.k_tx)),
            float(np.linalg.norm(p.xi @ p.k_tx)) / scale,
            float(np.linalg.norm(p.k_rx @ p.xi)) / scale,
        )
    return CheckResult("projector annihilation", err <= 1e-12, err, 1e-12)


def _check_waveforms(config, scene: Scene) -> CheckResult:
    n = config.n_subcarriers
    err = 0.0
    for name in ("ofdm", "otfs", "afdm"):
        kind = waveform_for(config, name, scene)
        for zeta, f in dd_indices(scene, n):
            g = time_domain_op(n, zeta, f, kind).matrix
            s0 = np.linalg.svd(g, compute_uv=False)
            s1 = np.linalg.svd(effective_op(g, kind), compute_uv=False)
            err = max(err, float(np.max(np.abs(s0 - s1))))
    return CheckResult("unitary waveform equivalence", err <= 1e-10, err, 1e-10, f"N={n}, three waveforms")


def _check_kronecker(config, scene: Scene) -> CheckResult:
    n, m = min(config.n_subcarriers, 8), min(config.n_streams, 3)
    rng = np.random.default_rng(config.seed)
    couplings = rng.standard_normal((scene.n_paths, m, m)) + 1j * rng.standard_normal((scene.n_paths, m, m))
    err = 0.0
    for name in ("ofdm", "afdm"):
        kind = waveform_for(config.replace(n_subcarriers=n, otfs_m_tilde=None), name, scene)
        chan = assemble_effective_channel(couplings, dd_indices(scene, n), kind)
        dense = chan.dense()
        for _ in range(10):
            x = rng.standard_normal(n * m) + 1j * rng.standard_normal(n * m)
            y = dense @ x
            err = max(err, float(np.max(np.abs(chan.apply(x) - y)) / max(1.0, np.max(np.abs(y)))))
    return CheckResult("Kronecker apply oracle", err <= 1e-11, err, 1e-11, f"N={n}, M={m}")


def single_path_oracle(scene: Scene, p_tx: float, n_fine: int = 32) -> float:
    """``P_T sigma_max^2`` of the lifted operator on uniform ``n_fine^2`` midpoint grids."""
    def midpoints(side_x, side_z):
        cx = (np.arange(n_fine) + 0.5) / n_fine * side_x - side_x / 2.0
        cz = (np.arange(n_fine) + 0.5) / n_fine * side_z - side_z / 2.0
        gx, gz = np.meshgrid(cx, cz, indexing="ij")
        pts = np.zeros((n_fine * n_fine, 3))
        pts[:, 0], pts[:, 2] = gx.ravel(), gz.ravel()
        return pts, side_x * side_z / n_fine**2

    rx_pts, w_r = midpoints(scene.rx_aperture.side_x, scene.rx_aperture.side_z)
    tx_pts, w_t = midpoints(scene.tx_aperture.side_x, scene.tx_aperture.side_z)
    chan = ElementChannel(scene, tx_pts, rx_pts, scale=math.sqrt(w_r * w_t))
    s = chan.singular_values()
    # Rank-one truncation: all streams share the dominant singular pair.
    return p_tx * float(s[0]) ** 2


def _check_single_path(config) -> CheckResult:
    scene = scene_for_seed(config, config.seed, n_paths=1)
    trace = optimize(scene, config.optimizer())
    oracle = single_path_oracle(scene, config.p_tx)
    gap = abs(trace.final_objective - oracle) / oracle
    return CheckResult("single-path SVD oracle", gap <= 1e-2, gap, 1e-2, f"gl_order={config.gl_order}")


def _check_monotone(config, trace) -> CheckResult:
    obj = np.array(trace.objective_per_iter)
    worst = float(np.max(np.maximum(0.0, -(np.diff(obj)) / obj[1:]))) if obj.size > 1 else 0.0
    return CheckResult("monotone convergence", worst <= 1e-9, worst, 1e-9, f"{trace.iterations_used} iterations, {trace.status}")


def _check_power(config, trace) -> CheckResult:
    tx = np.abs(np.array(trace.tx_power_per_iter) / config.p_tx - 1.0)
    rx = np.abs(np.array(trace.rx_power_per_iter) - 1.0)
    err = float(max(tx.max(initial=0.0), rx.max(initial=0.0)))
    return CheckResult("power conservation", err <= 1e-9, err, 1e-9)


def _check_far_field(config) -> CheckResult:
    kappa = 2.0 * math.pi * config.carrier_hz / 299792458.0
    direction = np.array([0.36, 0.48, 0.8])
    dists = []
    for kr in (1e1, 1e2, 1e3, 1e4):
        b = np.zeros(3)
        a = direction * kr / kappa
        exact = greens_dyadic_exact(a, b, kappa)
        far = greens_dyadic_far_field(a, b, kappa)
        dists.append(float(np.linalg.norm(exact - far) / np.linalg.norm(exact)))
    ok = all(x > y for x, y in zip(dists, dists[1:])) and dists[2] < 1e-2
    return CheckResult("far-field dyadic limit", ok, dists[2], 1e-2, "kappa R = 1e3, monotone over 1e1..1e4")


def validate(config: ExperimentConfig | None = None) -> list[CheckResult]:
    """Run the invariant/oracle suite on ``config`` (defaults if ``None``)."""
    config = config or ExperimentConfig()
    scene = scene_for_seed(config, config.seed)
    trace = optimize(scene, config.optimizer())
    return [
        _check_quadrature(config),
        _check_projectors(scene),
        _check_waveforms(config, scene),
        _check_kronecker(config, scene),
        _check_single_path(config),
        _check_monotone(config, trace),
        _check_power(config, trace),
        _check_far_field(config),
    ]


def format_report(results: Iterable[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        extra = f" ({r.detail})" if r.detail else ""
        lines.append(f"{status} {r.name}: measured {r.measured:.3e}, tolerance {r.tolerance:.1e}{extra}")
    return "\n".join(lines)
