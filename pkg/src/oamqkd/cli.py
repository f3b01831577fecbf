"""Command-line front end.

    oamqkd simulate --config run.ini [--sweep r0=0.01,0.02] [--full] [--seed S]
                    [--out DIR] [--workers W]
    oamqkd summarize --in DIR
    oamqkd screens --dump [--config run.ini] [--out DIR] [--frames N]

Configs are INI files; every section and option is optional and falls back to
the dataclass defaults (see README for the schema).
"""

from __future__ import annotations

import argparse
import configparser
import json
import typing
from dataclasses import fields as dc_fields
from pathlib import Path

from . import __version__
from .ao import AOConfig
from .qkd import ProtocolConfig
from .runner import (
    SWEEP_AXES,
    ExperimentConfig,
    OpticsConfig,
    OutputConfig,
    RunConfig,
    derived_params,
    dump_screens,
    read_records,
    run_experiment,
    run_sweep,
    summarize,
)
from .turbulence import TurbulenceParams

_SECTIONS = {
    "turbulence": TurbulenceParams,
    "protocol": ProtocolConfig,
    "ao": AOConfig,
    "optics": OpticsConfig,
    "run": RunConfig,
    "output": OutputConfig,
}


def _convert(text: str, hint):
    if typing.get_origin(hint) is typing.Union:
        inner = [a for a in typing.get_args(hint) if a is not type(None)]
        if text.strip().lower() in ("", "none", "auto"):
            return None
        return _convert(text, inner[0])
    if hint is bool:
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if hint is int:
        return int(text)
    if hint is float:
        return float(text)
    if hint is tuple:
        return tuple(s.strip() for s in text.split(",") if s.strip())
    return text


def load_config(path) -> ExperimentConfig:
    """Build an ExperimentConfig from an INI file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # field names are case-sensitive (R vs r0)
    if not parser.read(path):
        raise FileNotFoundError(path)
    unknown = set(parser.sections()) - set(_SECTIONS)
    if unknown:
        raise KeyError(f"unknown config sections: {sorted(unknown)}")
    parts = {}
    for section, cls in _SECTIONS.items():
        kwargs = {}
        if parser.has_section(section):
            hints = typing.get_type_hints(cls)
            known = {f.name for f in dc_fields(cls)}
            for key, raw in parser.items(section):
                if key not in known:
                    raise KeyError(f"[{section}] has no option {key!r}")
                kwargs[key] = _convert(raw, hints[key])
        # giving r0 alone replaces the default cn2 rather than conflicting
        if section == "turbulence" and "r0" in kwargs and "cn2" not in kwargs:
            kwargs["cn2"] = None
        parts[section] = cls(**kwargs)
    return ExperimentConfig(**parts)


def _parse_sweep(text: str) -> tuple[str, list]:
    axis, sep, tail = text.partition("=")
    values = [float(v) for v in tail.split(",") if v.strip()] if sep else []
    if axis not in SWEEP_AXES or not values:
        raise SystemExit(f"--sweep wants <axis>=v1,v2,... with axis in {SWEEP_AXES}")
    return axis, values


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.full:
        cfg.optics.grid_n = max(cfg.optics.grid_n, 512)
        cfg.run.n_realizations = max(cfg.run.n_realizations, 300)
    if args.seed is not None:
        cfg.run.master_seed = args.seed
    if args.workers is not None:
        cfg.run.workers = args.workers
    out = Path(args.out) if args.out else Path(cfg.output.directory)

    der = derived_params(cfg)
    print(
        f"r0={der['r0']:.4g} m  Cn2={der['cn2']:.4g}  sigma_R^2={der['sigma_R2']:.4g}  "
        f"f_G={der['f_G']:.4g} Hz  grid {cfg.optics.grid_n}^2 @ {der['grid_pitch']:.4g} m"
    )
    if args.sweep:
        axis, values = _parse_sweep(args.sweep)
        for v, stats in run_sweep(cfg, axis, values, out):
            print(
                f"{axis}={v:g}: n={stats['n']}  Q = {stats['mean_Q']:.4f} "
                f"+/- {stats['se_Q']:.4f}  r_min = {stats['mean_r']:.4f} +/- {stats['se_r']:.4f}"
            )
    else:
        stats = run_experiment(cfg, out)
        print(
            f"n={stats['n']}  Q = {stats['mean_Q']:.4f} +/- {stats['se_Q']:.4f}  "
            f"r_min = {stats['mean_r']:.4f} +/- {stats['se_r']:.4f}"
        )
    print(f"outputs in {out}")
    return 0


def _cmd_summarize(args) -> int:
    run_dir = Path(args.run_dir)
    records_path = run_dir / "records.csv"
    sweep_path = run_dir / "sweep.csv"
    if records_path.exists():
        print(json.dumps(summarize(list(read_records(records_path))), indent=2))
    elif sweep_path.exists():
        print(sweep_path.read_text(), end="")
    else:
        raise SystemExit(f"no records.csv or sweep.csv in {run_dir}")
    return 0


def _cmd_screens(args) -> int:
    if not args.dump:
        raise SystemExit("nothing to do: pass --dump")
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    out = Path(args.out) if args.out else Path(cfg.output.directory) / "screens"
    for p in dump_screens(cfg, out, frames=args.frames):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oamqkd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo experiment or sweep")
    sim.add_argument("--config", required=True, help="INI config file")
    sim.add_argument("--sweep", help="axis=v1,v2,... one sub-run per value")
    sim.add_argument("--full", action="store_true", help="production-scale grid and realization count")
    sim.add_argument("--seed", type=int, help="override master seed")
    sim.add_argument("--out", help="output directory (default from config)")
    sim.add_argument("--workers", type=int, help="worker threads (records stay bit-identical)")
    sim.set_defaults(func=_cmd_simulate)

    summ = sub.add_parser("summarize", help="mean/SE summary of an existing run directory")
    summ.add_argument("--in", dest="run_dir", required=True, help="run directory")
    summ.set_defaults(func=_cmd_summarize)

    scr = sub.add_parser("screens", help="debug: write evolving phase screens to disk")
    scr.add_argument("--dump", action="store_true", help="write binary screen dumps")
    scr.add_argument("--config", help="INI config file (optional)")
    scr.add_argument("--out", help="output directory")
    scr.add_argument("--frames", type=int, default=0, help="advance steps after the initial dump")
    scr.set_defaults(func=_cmd_screens)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
