"""Delimited output files: trace.csv, events.csv, summary.txt and the calibration files.

Numbers are written in fixed decimal notation with 9 significant digits,
independent of locale, with ``\\n`` line endings.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import fields
from pathlib import Path
from typing import Any, Iterable

import numpy as np
import tomli
import tomli_w

from .analysis import SimSummary
from .calibration import CalibrationResult, CalibrationTargets, ParameterBounds, TARGET_NAMES
from .config import ConfigError
from .integrator import SnapEvent, Trace
from .model import BeamSide

TRACE_HEADER = ("time_s", "temp_a_c", "temp_b_c", "current_a_a", "current_b_a",
                "beam_side", "stroke_a_m", "stroke_b_m")
EVENTS_HEADER = ("index", "time_s", "puller", "to_side", "drift_a_m", "drift_b_m")


def fmt(x: float) -> str:
    """Fixed-notation, 9 significant digits; non-finite values as nan/inf."""
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if x == 0.0:
        return "0.00000000"
    # exponent after rounding to 9 significant digits (e.g. 9.999999999 -> 1.00000000e+01)
    exponent = int(f"{x:.8e}".split("e")[1])
    return f"{x:.{max(0, 8 - exponent)}f}"


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv_text(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def trace_csv(trace: Trace) -> str:
    cols = [trace.time_s, trace.temp_a_c, trace.temp_b_c, trace.current_a_a,
            trace.current_b_a, None, trace.stroke_a_m, trace.stroke_b_m]
    rows = []
    for i in range(len(trace)):
        rows.append([str(trace.beam_side[i]) if c is None else fmt(c[i]) for c in cols])
    return _csv_text(TRACE_HEADER, rows)


def write_trace_csv(trace: Trace, path: str | Path) -> None:
    _write(Path(path), trace_csv(trace))


def events_csv(events: list[SnapEvent]) -> str:
    rows = [[i, fmt(e.time_s), e.puller.value, e.to_side.value, fmt(e.drift_a_m),
             fmt(e.drift_b_m)] for i, e in enumerate(events)]
    return _csv_text(EVENTS_HEADER, rows)


def write_events_csv(events: list[SnapEvent], path: str | Path) -> None:
    _write(Path(path), events_csv(events))


def read_trace_csv(path: str | Path, events_path: str | Path | None = None) -> Trace:
    """Load a trace written by :func:`write_trace_csv` (events optional)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = list(reader)
    num = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(TRACE_HEADER)
           if name != "beam_side"}
    side = np.array([r[5] for r in rows], dtype="<U1")
    events: list[SnapEvent] = []
    if events_path is not None:
        with open(events_path, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                events.append(SnapEvent(float(rec["time_s"]), BeamSide(rec["puller"]),
                                        float(rec["drift_a_m"]), float(rec["drift_b_m"])))
    return Trace(beam_side=side, events=events, **num)


def _value(v: Any) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_value(x) for x in v)
    return str(v)


def summary_text(summary: SimSummary, extra: dict[str, Any] | None = None) -> str:
    lines = [f"{f.name}={_value(getattr(summary, f.name))}" for f in fields(summary)]
    for key, value in (extra or {}).items():
        lines.append(f"{key}={_value(value)}")
    return "\n".join(lines) + "\n"


def write_summary(summary: SimSummary, path: str | Path, extra: dict[str, Any] | None = None) -> None:
    _write(Path(path), summary_text(summary, extra))


def parse_summary(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key] = value
    return out


# --- calibration files -----------------------------------------------------

def _load_toml(path: str | Path) -> dict:
    try:
        return tomli.loads(Path(path).read_text(encoding="utf-8"))
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_targets(path: str | Path) -> CalibrationTargets:
    """``[targets]`` holds target values, ``[weights]`` optional per-target weights."""
    data = _load_toml(path)
    targets = dict(data.get("targets", {}))
    weights = dict(data.get("weights", {}))
    unknown = sorted((set(targets) | set(weights)) - set(TARGET_NAMES))
    if unknown:
        raise ConfigError(f"{path}: unknown target(s): {', '.join(unknown)}")
    try:
        return CalibrationTargets(**{k: float(v) for k, v in targets.items()},
                                  weights={**dict.fromkeys(TARGET_NAMES, 1.0),
                                           **{k: float(v) for k, v in weights.items()}})
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_bounds(path: str | Path) -> ParameterBounds:
    """``[bounds]`` maps parameter names to ``[lower, upper]``."""
    from .config import PARAMETER_NAMES

    data = _load_toml(path)
    raw = data.get("bounds", {})
    if not raw:
        raise ConfigError(f"{path}: no [bounds] entries")
    bounds = {}
    for name, pair in raw.items():
        if name not in PARAMETER_NAMES:
            raise ConfigError(f"{path}: unknown parameter {name!r}")
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(f"{path}: bounds for {name} must be [lower, upper]")
        bounds[name] = (float(pair[0]), float(pair[1]))
    try:
        return ParameterBounds(bounds)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# where each fittable parameter lives in a scenario file
_SECTION = {
    "crit_stroke_a_m": "beam", "crit_stroke_b_m": "beam", "beam_tg_c": "beam",
    "source_current_a": "circuit", "contact_resistance_a_ohm": "circuit",
    "contact_resistance_b_ohm": "circuit", "contact_heat_fraction": "circuit",
    "cooling_multiplier": ("environment", "multiplier"), "ambient_c": "environment",
}


def params_fragment(params: dict[str, float]) -> dict[str, dict[str, float]]:
    """Scenario-file fragment that sets ``params`` when layered over a config."""
    out: dict[str, dict[str, float]] = {}
    for name, value in params.items():
        where = _SECTION.get(name, "actuator")
        section, key = where if isinstance(where, tuple) else (where, name)
        out.setdefault(section, {})[key] = float(value)
    return out


def write_best_params(params: dict[str, float], path: str | Path) -> None:
    _write(Path(path), tomli_w.dumps(params_fragment(params)))


def fit_report(result: CalibrationResult, targets: CalibrationTargets) -> str:
    from .calibration import relative_errors, observed_stall

    s = result.summary
    lines = [f"loss={fmt(result.best_loss)}", f"evaluations={result.n_evaluations}"]
    if s is not None:
        errors = relative_errors(s, targets)
        observed = {"first_snap_s": s.first_snap_s, "first_snapback_s": s.first_snapback_s,
                    "mean_period_s": s.mean_period_s, "total_cycles": s.total_cycles,
                    "stall_time_s": observed_stall(s)}
        for name in TARGET_NAMES:
            lines.append(f"{name}: target={fmt(getattr(targets, name))} "
                         f"observed={_value(observed[name])} "
                         f"relative_error={fmt(errors[name])}")
    for name, value in result.best_params.items():
        lines.append(f"param {name}={fmt(value)}")
    return "\n".join(lines) + "\n"


def history_csv(result: CalibrationResult) -> str:
    names = list(result.best_params)
    rows = [[ev.index, ev.restart, *(fmt(ev.params[n]) for n in names), fmt(ev.loss),
             fmt(ev.best_loss)] for ev in result.history]
    return _csv_text(["index", "restart", *names, "loss", "best_loss"], rows)
