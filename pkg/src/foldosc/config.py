"""Simulation configuration, validation and the on-disk scenario format.

Scenario files are TOML with one section per model part::

    [simulation]
    step_s = 0.001
    horizon_s = 30.0

    [actuator]            # shared by both actuators
    resistance_ohm = 10.0
    ...
    [actuator.b]          # optional per-side overrides
    activation_temp_c = 40.0

    [beam]
    [circuit]
    [environment]         # ambient_c, cooling_mode, multiplier
    [initial]             # temp_a_c, temp_b_c, side ("A" | "B")

Missing sections or keys fall back to the dataclass defaults where one exists.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from .model import (
    ActuatorParams,
    BeamModel,
    BeamSide,
    CircuitModel,
    CoolingMode,
    Environment,
    FORCED_AIR_DEFAULT_MULTIPLIER,
    time_constant,
)


class ConfigError(ValueError):
    """Raised when a scenario file or config cannot be used."""

    def __init__(self, message: str, violations: list["Violation"] | None = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str
    value: Any

    def __str__(self) -> str:
        return f"{self.field}: {self.rule} (got {self.value!r})"


@dataclass(frozen=True)
class SimConfig:
    actuator_a: ActuatorParams
    actuator_b: ActuatorParams
    beam: BeamModel
    circuit: CircuitModel
    environment: Environment = field(default_factory=Environment)
    step_s: float = 1e-3
    horizon_s: float = 30.0
    event_tolerance_s: float = 1e-6
    record_stride: int = 10
    initial_temp_a_c: float | None = None
    initial_temp_b_c: float | None = None
    initial_side: BeamSide = BeamSide.A

    @property
    def actuators(self) -> tuple[ActuatorParams, ActuatorParams]:
        return self.actuator_a, self.actuator_b

    def initial_temperatures(self) -> tuple[float, float]:
        amb = self.environment.ambient_c
        ta = amb if self.initial_temp_a_c is None else self.initial_temp_a_c
        tb = amb if self.initial_temp_b_c is None else self.initial_temp_b_c
        return ta, tb

    def with_both_actuators(self, **changes: Any) -> "SimConfig":
        return replace(self, actuator_a=replace(self.actuator_a, **changes),
                       actuator_b=replace(self.actuator_b, **changes))


def _positive(out, name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        out.append(Violation(name, "must be finite and > 0", value))


def _non_negative(out, name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
        out.append(Violation(name, "must be finite and >= 0", value))


def validate(config: SimConfig) -> list[Violation]:
    """Check every invariant; never raises, returns the list of violations."""
    out: list[Violation] = []
    try:
        _validate_into(config, out)
    except Exception as exc:  # malformed objects still produce a report
        out.append(Violation("config", "could not be inspected", repr(exc)))
    return out


def _validate_into(config: SimConfig, out: list[Violation]) -> None:
    _positive(out, "simulation.step_s", config.step_s)
    _positive(out, "simulation.horizon_s", config.horizon_s)
    _positive(out, "simulation.event_tolerance_s", config.event_tolerance_s)
    if not (isinstance(config.record_stride, int) and config.record_stride >= 1):
        out.append(Violation("simulation.record_stride", "must be an integer >= 1",
                             config.record_stride))
    if (config.step_s > 0 and config.event_tolerance_s > 0
            and not config.event_tolerance_s < config.step_s):
        out.append(Violation("simulation.event_tolerance_s", "must be < step_s",
                             config.event_tolerance_s))

    env = config.environment
    if not isinstance(env.ambient_c, (int, float)) or not math.isfinite(env.ambient_c):
        out.append(Violation("environment.ambient_c", "must be finite", env.ambient_c))
    if env.cooling_mode is not CoolingMode.STANDING_AIR and not env.multiplier >= 1:
        out.append(Violation("environment.multiplier", "must be >= 1", env.multiplier))
    if (env.cooling_mode is CoolingMode.WATER
            and env.multiplier < 10 * FORCED_AIR_DEFAULT_MULTIPLIER):
        out.append(Violation("environment.multiplier",
                             f"water must be >= {10 * FORCED_AIR_DEFAULT_MULTIPLIER:g} "
                             "(10x the forced-air default)", env.multiplier))

    for tag, act in (("a", config.actuator_a), ("b", config.actuator_b)):
        prefix = f"actuator.{tag}."
        for name in ("resistance_ohm", "thermal_capacitance_j_per_k",
                     "conv_conductance_w_per_k", "contraction_coeff_m_per_k",
                     "max_stroke_m", "actuator_tg_c"):
            _positive(out, prefix + name, getattr(act, name))
        _non_negative(out, prefix + "drift_per_cycle_m", act.drift_per_cycle_m)
        if not act.activation_temp_c >= env.ambient_c:
            out.append(Violation(prefix + "activation_temp_c",
                                 f"must be >= ambient ({env.ambient_c:g} C)",
                                 act.activation_temp_c))
        well_formed = (act.thermal_capacitance_j_per_k > 0 and act.conv_conductance_w_per_k > 0
                       and env.cooling_multiplier > 0 and config.step_s > 0)
        if well_formed and config.step_s >= time_constant(act, env):
            out.append(Violation("simulation.step_s",
                                 f"must be below the thermal time constant of actuator {tag}",
                                 config.step_s))

    beam = config.beam
    _positive(out, "beam.crit_stroke_a_m", beam.crit_stroke_a_m)
    _positive(out, "beam.crit_stroke_b_m", beam.crit_stroke_b_m)
    _positive(out, "beam.beam_tg_c", beam.beam_tg_c)

    c = config.circuit
    _non_negative(out, "circuit.source_current_a", c.source_current_a)
    _non_negative(out, "circuit.contact_resistance_a_ohm", c.contact_resistance_a_ohm)
    _non_negative(out, "circuit.contact_resistance_b_ohm", c.contact_resistance_b_ohm)
    if not (0.0 <= c.contact_heat_fraction <= 1.0):
        out.append(Violation("circuit.contact_heat_fraction", "must lie in [0, 1]",
                             c.contact_heat_fraction))

    for name, value in (("initial.temp_a_c", config.initial_temp_a_c),
                        ("initial.temp_b_c", config.initial_temp_b_c)):
        if value is not None and not math.isfinite(value):
            out.append(Violation(name, "must be finite", value))
    if not isinstance(config.initial_side, BeamSide):
        out.append(Violation("initial.side", "must be A or B", config.initial_side))


# --- serialization ---------------------------------------------------------

_ACTUATOR_KEYS = [f.name for f in fields(ActuatorParams)]


def config_to_dict(config: SimConfig) -> dict[str, Any]:
    """Nested plain-data form; per-side actuator values that differ go in subtables."""
    a, b = asdict(config.actuator_a), asdict(config.actuator_b)
    actuator: dict[str, Any] = dict(a)
    diff = {k: b[k] for k in _ACTUATOR_KEYS if b[k] != a[k]}
    if diff:
        actuator = {k: v for k, v in a.items() if k not in diff}
        actuator["a"] = {k: a[k] for k in diff}
        actuator["b"] = diff
    env = config.environment
    data: dict[str, Any] = {
        "simulation": {
            "step_s": config.step_s,
            "horizon_s": config.horizon_s,
            "event_tolerance_s": config.event_tolerance_s,
            "record_stride": config.record_stride,
        },
        "actuator": actuator,
        "beam": asdict(config.beam),
        "circuit": asdict(config.circuit),
        "environment": {
            "ambient_c": env.ambient_c,
            "cooling_mode": env.cooling_mode.value,
            "multiplier": env.multiplier,
        },
        "initial": {"side": config.initial_side.value},
    }
    if config.initial_temp_a_c is not None:
        data["initial"]["temp_a_c"] = config.initial_temp_a_c
    if config.initial_temp_b_c is not None:
        data["initial"]["temp_b_c"] = config.initial_temp_b_c
    return data


def _take(section: dict, cls, where: str) -> dict[str, Any]:
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    return dict(section)


def config_from_dict(data: dict[str, Any], base: SimConfig | None = None) -> SimConfig:
    """Build a config from nested data, layering it over ``base`` if given."""
    known = {"simulation", "actuator", "beam", "circuit", "environment", "initial"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    try:
        return _config_from_dict(data, base)
    except TypeError as exc:
        raise ConfigError(f"incomplete configuration: {exc}") from None


def _config_from_dict(data: dict[str, Any], base: SimConfig | None) -> SimConfig:
    act_section = dict(data.get("actuator", {}))
    side_a = act_section.pop("a", {})
    side_b = act_section.pop("b", {})
    shared = _take(act_section, ActuatorParams, "actuator")
    over_a = _take(side_a, ActuatorParams, "actuator.a")
    over_b = _take(side_b, ActuatorParams, "actuator.b")
    if base is not None:
        act_a = replace(base.actuator_a, **shared, **over_a)
        act_b = replace(base.actuator_b, **shared, **over_b)
    else:
        act_a = ActuatorParams(**{**shared, **over_a})
        act_b = ActuatorParams(**{**shared, **over_b})

    beam_kw = _take(data.get("beam", {}), BeamModel, "beam")
    beam = replace(base.beam, **beam_kw) if base else BeamModel(**beam_kw)
    circ_kw = _take(data.get("circuit", {}), CircuitModel, "circuit")
    circuit = replace(base.circuit, **circ_kw) if base else CircuitModel(**circ_kw)

    env_section = dict(data.get("environment", {}))
    env = base.environment if base else Environment()
    unknown = sorted(set(env_section) - {"ambient_c", "cooling_mode", "multiplier"})
    if unknown:
        raise ConfigError(f"unknown key(s) in [environment]: {', '.join(unknown)}")
    if "cooling_mode" in env_section:
        try:
            mode = CoolingMode(env_section["cooling_mode"])
        except ValueError:
            choices = ", ".join(m.value for m in CoolingMode)
            raise ConfigError(f"cooling_mode must be one of: {choices}") from None
        env = replace(env, cooling_mode=mode)
    if "ambient_c" in env_section:
        env = replace(env, ambient_c=float(env_section["ambient_c"]))
    if "multiplier" in env_section:
        env = replace(env, multiplier=float(env_section["multiplier"]))

    sim = dict(data.get("simulation", {}))
    unknown = sorted(set(sim) - {"step_s", "horizon_s", "event_tolerance_s", "record_stride"})
    if unknown:
        raise ConfigError(f"unknown key(s) in [simulation]: {', '.join(unknown)}")
    init = dict(data.get("initial", {}))
    unknown = sorted(set(init) - {"temp_a_c", "temp_b_c", "side"})
    if unknown:
        raise ConfigError(f"unknown key(s) in [initial]: {', '.join(unknown)}")

    kwargs: dict[str, Any] = dict(actuator_a=act_a, actuator_b=act_b, beam=beam,
                                  circuit=circuit, environment=env)
    kwargs.update(sim)
    if "temp_a_c" in init:
        kwargs["initial_temp_a_c"] = float(init["temp_a_c"])
    if "temp_b_c" in init:
        kwargs["initial_temp_b_c"] = float(init["temp_b_c"])
    if "side" in init:
        try:
            kwargs["initial_side"] = BeamSide(init["side"])
        except ValueError:
            raise ConfigError("initial.side must be 'A' or 'B'") from None
    if base is not None:
        return replace(base, **kwargs)
    return SimConfig(**kwargs)


def load_config(path: str | Path, base: SimConfig | None = None) -> SimConfig:
    """Read a TOML scenario file. Raises OSError if unreadable, ConfigError if malformed."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data, base)


def dumps_config(config: SimConfig) -> str:
    return tomli_w.dumps(config_to_dict(config))


def config_hash(config: SimConfig) -> str:
    """sha256 over canonical JSON; floats are emitted via repr, so the hash is platform-stable."""
    blob = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# --- named scalar parameters (calibration and sweeps) ----------------------

_BOTH_ACTUATORS = ("resistance_ohm", "thermal_capacitance_j_per_k", "conv_conductance_w_per_k",
                   "activation_temp_c", "contraction_coeff_m_per_k", "max_stroke_m",
                   "drift_per_cycle_m", "actuator_tg_c")
_BEAM = ("crit_stroke_a_m", "crit_stroke_b_m", "beam_tg_c")
_CIRCUIT = ("source_current_a", "contact_resistance_a_ohm", "contact_resistance_b_ohm",
            "contact_heat_fraction")
PARAMETER_NAMES = _BOTH_ACTUATORS + _BEAM + _CIRCUIT + ("cooling_multiplier", "ambient_c")


def get_param(config: SimConfig, name: str) -> float:
    if name in _BOTH_ACTUATORS:
        return getattr(config.actuator_a, name)
    if name in _BEAM:
        return getattr(config.beam, name)
    if name in _CIRCUIT:
        return getattr(config.circuit, name)
    if name == "cooling_multiplier":
        return config.environment.multiplier
    if name == "ambient_c":
        return config.environment.ambient_c
    raise KeyError(f"unknown parameter {name!r}; known: {', '.join(PARAMETER_NAMES)}")


def set_param(config: SimConfig, name: str, value: float) -> SimConfig:
    """Return a copy of ``config`` with ``name`` set (both actuators for actuator fields)."""
    value = float(value)
    if name in _BOTH_ACTUATORS:
        return config.with_both_actuators(**{name: value})
    if name in _BEAM:
        return replace(config, beam=replace(config.beam, **{name: value}))
    if name in _CIRCUIT:
        return replace(config, circuit=replace(config.circuit, **{name: value}))
    if name == "cooling_multiplier":
        return replace(config, environment=replace(config.environment, multiplier=value))
    if name == "ambient_c":
        return replace(config, environment=replace(config.environment, ambient_c=value))
    raise KeyError(f"unknown parameter {name!r}; known: {', '.join(PARAMETER_NAMES)}")
