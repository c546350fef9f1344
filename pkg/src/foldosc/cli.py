"""Command-line entry point: ``foldosc {simulate,calibrate,sweep,presets,validate}``.

Exit codes: 0 success, 1 invalid input, 2 simulation failure, 3 I/O failure,
4 calibration found no oscillating candidate.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import InsufficientCycles, SimSummary, phase_shift, summarize
from .calibration import CalibrationFailed, OptimizerSettings, calibrate
from .config import (
    PARAMETER_NAMES,
    ConfigError,
    SimConfig,
    config_hash,
    load_config,
    set_param,
    validate,
)
from .integrator import ChatteringError, SimulationError, simulate
from .io import (
    fit_report,
    history_csv,
    load_bounds,
    load_targets,
    summary_text,
    write_best_params,
    write_events_csv,
    write_summary,
    write_trace_csv,
    _write,
    fmt,
    _csv_text,
)
from .plotting import plot_history, plot_sweep, plot_trace
from .scenarios import UnknownPreset, preset, preset_names, PRESETS


EXIT_OK, EXIT_INVALID, EXIT_SIMULATION, EXIT_IO, EXIT_NO_OSCILLATION = 0, 1, 2, 3, 4
DEFAULT_PRESET = "oscillator_forced_air"


class _InputError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _data_file(name: str) -> Path:
    return Path(str(resources.files("foldosc") / "data" / name))


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("FOLDOSC_OUT") or "out")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _InputError(f"cannot create output directory {out}: {exc}", EXIT_IO) from None
    return out


def _resolve_config(args, default_preset: str | None = DEFAULT_PRESET) -> tuple[SimConfig, str]:
    """Preset, config file, or a config file layered over a preset."""
    base = None
    source = []
    name = args.preset or (None if args.config else default_preset)
    if name:
        try:
            base = preset(name).config
        except UnknownPreset as exc:
            raise _InputError(str(exc), EXIT_INVALID) from None
        source.append(f"preset:{name}")
    if args.config:
        path = Path(args.config)
        try:
            config = load_config(path, base)
        except OSError as exc:
            raise _InputError(f"cannot read config {path}: {exc.strerror or exc}", EXIT_IO) from None
        except ConfigError as exc:
            raise _InputError(f"invalid config {path}: {exc}", EXIT_INVALID) from None
        source.append(str(path))
    else:
        config = base
    if getattr(args, "horizon", None) is not None:
        config = replace(config, horizon_s=args.horizon)
    if getattr(args, "step", None) is not None:
        config = replace(config, step_s=args.step)
    violations = validate(config)
    if violations:
        msg = "invalid configuration:\n" + "\n".join(f"  {v}" for v in violations)
        raise _InputError(msg, EXIT_INVALID)
    return config, "+".join(source)


def _summarize(config: SimConfig, trace) -> SimSummary:
    return summarize(trace, config.beam.beam_tg_c,
                     max(config.actuator_a.actuator_tg_c, config.actuator_b.actuator_tg_c))


def _phase(trace):
    try:
        return phase_shift(trace)
    except InsufficientCycles:
        return None


def _manifest(out: Path, source: str, files: list[str], config: SimConfig, started: float,
              command: str) -> None:
    manifest = {
        "command": command,
        "source": source,
        "output_dir": str(out),
        "files": files,
        "tool_version": __version__,
        "config_hash": config_hash(config),
        "wall_clock_s": round(time.perf_counter() - started, 6),
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    config, source = _resolve_config(args)
    out = _out_dir(args)
    try:
        trace = simulate(config)
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    summary = _summarize(config, trace)
    files = ["trace.csv", "events.csv", "summary.txt", "plot.svg", "manifest.json"]
    try:
        write_trace_csv(trace, out / "trace.csv")
        write_events_csv(trace.events, out / "events.csv")
        write_summary(summary, out / "summary.txt", {"phase_shift": _phase(trace)})
        plot_trace(trace, out / "plot.svg", title=source)
        _manifest(out, source, files, config, started, "simulate")
    except OSError as exc:
        print(f"cannot write outputs to {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary_text(summary), end="")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    started = time.perf_counter()
    config, source = _resolve_config(args)
    targets_path = Path(args.targets) if args.targets else _data_file("targets.toml")
    bounds_path = Path(args.bounds) if args.bounds else _data_file("bounds.toml")
    try:
        targets = load_targets(targets_path)
        bounds = load_bounds(bounds_path)
    except OSError as exc:
        raise _InputError(f"cannot read {exc.filename}: {exc.strerror}", EXIT_IO) from None
    except ConfigError as exc:
        raise _InputError(str(exc), EXIT_INVALID) from None
    settings = OptimizerSettings(max_evaluations=args.max_evals, restarts=args.restarts,
                                 seed=args.seed)
    out = _out_dir(args)
    code = EXIT_OK
    try:
        result = calibrate(targets, bounds, config, settings)
    except CalibrationFailed as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        result, code = exc.result, EXIT_NO_OSCILLATION
    files = ["best_params.toml", "fit_report.txt", "history.csv", "fit_history.svg",
             "manifest.json"]
    try:
        write_best_params(result.best_params, out / "best_params.toml")
        _write(out / "fit_report.txt", fit_report(result, targets))
        _write(out / "history.csv", history_csv(result))
        plot_history([e.loss for e in result.history], [e.best_loss for e in result.history],
                     out / "fit_history.svg")
        _manifest(out, source, files, result.config, started, "calibrate")
    except OSError as exc:
        print(f"cannot write outputs to {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(fit_report(result, targets), end="")
    return code


def _sweep_point(config: SimConfig, param: str, value: float) -> list[str]:
    cfg = set_param(config, param, value)
    violations = validate(cfg)
    if violations:
        return [fmt(value), "", "0", "0", "", "", "invalid"]
    try:
        trace = simulate(cfg)
    except SimulationError as exc:
        status = "chattering" if isinstance(exc, ChatteringError) else "diverged"
        return [fmt(value), "", "", "", "", "", status]
    s = _summarize(cfg, trace)
    period = "" if s.mean_period_s is None or s.n_snap_events < 2 else fmt(s.mean_period_s)
    return [fmt(value), period, str(s.n_full_cycles), str(s.n_snap_events),
            fmt(s.max_temp_a_c), fmt(s.max_temp_b_c), "ok"]


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    if args.param not in PARAMETER_NAMES:
        raise _InputError(f"unknown parameter {args.param!r}; known: "
                          f"{', '.join(PARAMETER_NAMES)}", EXIT_INVALID)
    if args.count < 1 or args.min is None or args.max is None:
        raise _InputError("sweep needs --min, --max and --count >= 1", EXIT_INVALID)
    config, source = _resolve_config(args)
    out = _out_dir(args)
    values = [float(v) for v in np.linspace(args.min, args.max, args.count)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_point, [config] * len(values),
                                 [args.param] * len(values), values))
    else:
        rows = [_sweep_point(config, args.param, v) for v in values]
    header = [args.param, "mean_period_s", "n_full_cycles", "n_snap_events",
              "max_temp_a_c", "max_temp_b_c", "status"]
    try:
        _write(out / "sweep.csv", _csv_text(header, rows))
        periods = [float(r[1]) if r[1] else None for r in rows]
        plot_sweep(values, periods, args.param, out / "sweep.svg")
        _manifest(out, source, ["sweep.csv", "sweep.svg", "manifest.json"], config, started,
                  "sweep")
    except OSError as exc:
        print(f"cannot write outputs to {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(_csv_text(header, rows), end="")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in preset_names():
        p = PRESETS[name]
        print(f"{name}\t{p.expected.value}\t{p.description}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config, source = _resolve_config(args)
    print(f"{source}: ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foldosc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"foldosc {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p, out=True):
        p.add_argument("--preset", help=f"preset name ({', '.join(preset_names())})")
        p.add_argument("--config", metavar="PATH",
                       help="TOML scenario file; layered over --preset when both are given")
        p.add_argument("--horizon", type=float, metavar="S")
        p.add_argument("--step", type=float, metavar="S")
        if out:
            p.add_argument("--out", metavar="DIR",
                           help="output directory (default: $FOLDOSC_OUT or ./out)")

    p = sub.add_parser("simulate", help="run one scenario and write trace, summary and plot")
    scenario_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit parameters to timeline targets")
    scenario_args(p)
    p.add_argument("--targets", metavar="PATH", help="targets TOML (default: measured timeline)")
    p.add_argument("--bounds", metavar="PATH", help="bounds TOML (default: shipped bounds)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-evals", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=8)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("sweep", help="vary one parameter and tabulate the oscillation")
    scenario_args(p)
    p.add_argument("--param", required=True, metavar="NAME")
    p.add_argument("--min", type=float)
    p.add_argument("--max", type=float)
    p.add_argument("--count", type=int, default=11)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("presets", help="list presets")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("validate", help="check a scenario for invariant violations")
    scenario_args(p, out=False)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _InputError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
