"""Command-line entry point: ``run``, ``sweep`` and ``validate``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .exceptions import ConfigError
from .experiments import (
    FIGURES,
    PRESETS,
    emit_plot,
    format_report,
    load_config,
    run_single,
    run_sweep,
    validate,
    write_csv,
    write_metadata,
)


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value
    return out


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="key=value config file")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter preset")
    p.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE",
                   help="override one config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddcmimo", description="Continuous-aperture DD-MIMO experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="optimize one scene and print its metrics")
    _common(run)
    run.add_argument("--seed", type=int, help="scene seed (default: config seed)")

    sweep = sub.add_parser("sweep", help="run one figure's sweep to CSV")
    _common(sweep)
    sweep.add_argument("--figure", required=True, choices=FIGURES)
    sweep.add_argument("--out", required=True, type=Path, help="CSV output path")
    sweep.add_argument("--plot", type=Path, help="optional SVG plot path")
    sweep.add_argument("--seeds", type=int, help="number of seeds (overrides n_seeds)")

    val = sub.add_parser("validate", help="run the invariant and oracle checks")
    _common(val)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = _overrides(args.overrides)
        if getattr(args, "seeds", None) is not None:
            overrides["n_seeds"] = args.seeds
        config = load_config(args.config, overrides, preset=args.preset)

        if args.command == "run":
            seed = config.seed if args.seed is None else args.seed
            rec = run_single(config, seed, waveforms=("ofdm", "otfs", "afdm"))
            from .experiments import _db
            print(f"seed: {seed}")
            print(f"status: {rec.status}")
            print(f"iterations_used: {rec.iterations_used}")
            for label, value in (("capa", rec.capa), ("conventional", rec.conventional),
                                 ("classical_svd", rec.classical_svd), ("equal_alloc", rec.equal_alloc)):
                print(f"rx_power_db_{label}: {_db(value):.9g}")
            for name, value in rec.effective_power.items():
                print(f"effective_power_db_{name}: {_db(value):.9g}")
            return 0

        if args.command == "sweep":
            result = run_sweep(args.figure, config)
            write_csv(result, args.out)
            write_metadata(result, args.out.with_suffix(args.out.suffix + ".meta.json"))
            if args.plot is not None:
                emit_plot(result, args.plot)
            print(f"wrote {len(result.rows)} rows to {args.out}")
            return 0

        results = validate(config)
        print(format_report(results))
        return 0 if all(r.passed for r in results) else 1
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
