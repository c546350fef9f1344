"""Named scenario presets for the experimental conditions, plus config validation.

Values not measured in the experiments (resistances, heat capacity,
conductance, contraction law, critical strokes, drift) are calibrated or
assumed; they live here and nowhere else.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .analysis import SimSummary
from .config import SimConfig, validate, Violation  # noqa: F401  (re-exported)
from .model import ActuatorParams, BeamModel, CircuitModel, Environment

PRESET_VERSION = "1"


class Outcome(enum.Enum):
    OSCILLATES = "Oscillates"
    NO_SNAP = "NoSnap"
    OVERHEAT_FLAG = "OverheatFlag"


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    description: str
    config: SimConfig
    expected: Outcome
    version: str = PRESET_VERSION

    def outcome_met(self, summary: SimSummary) -> bool:
        if self.expected is Outcome.OSCILLATES:
            return summary.n_snap_events >= 2
        if self.expected is Outcome.NO_SNAP:
            return summary.n_snap_events == 0
        return summary.beam_overheat_flag


# Fitted to the 0.55 A forced-air timeline with the shipped bounds
# (resistance, max stroke and contact heat fraction held at their defaults).
CALIBRATED_ACTUATOR = ActuatorParams(
    resistance_ohm=10.0,                  # assumed
    thermal_capacitance_j_per_k=0.3991,
    conv_conductance_w_per_k=0.03902,
    activation_temp_c=33.99,
    contraction_coeff_m_per_k=3.018e-4,
    max_stroke_m=5.0e-3,                  # assumed
    drift_per_cycle_m=2.120e-4,
    actuator_tg_c=60.0,
)
CALIBRATED_BEAM = BeamModel(crit_stroke_a_m=3.601e-3, crit_stroke_b_m=4.204e-3, beam_tg_c=60.0)
CALIBRATED_CIRCUIT = CircuitModel(
    source_current_a=0.55,
    contact_resistance_a_ohm=5.174,
    contact_resistance_b_ohm=20.55,
    contact_heat_fraction=0.5,            # assumed
)
FORCED_AIR = Environment.forced_air(3.0)  # flow rate unreported; multiplier is assumed


def _oscillator() -> SimConfig:
    return SimConfig(
        actuator_a=CALIBRATED_ACTUATOR,
        actuator_b=CALIBRATED_ACTUATOR,
        beam=CALIBRATED_BEAM,
        circuit=CALIBRATED_CIRCUIT,
        environment=FORCED_AIR,
        step_s=1e-3,
        horizon_s=30.0,
        event_tolerance_s=1e-6,
        record_stride=10,
    )


def _contact_standing_air() -> SimConfig:
    base = _oscillator()
    return replace(
        base,
        # single-contact bench test: the beam is held, so no stroke can release it
        beam=replace(CALIBRATED_BEAM, crit_stroke_a_m=6e-3, crit_stroke_b_m=6e-3),
        circuit=replace(CALIBRATED_CIRCUIT, source_current_a=0.45,
                        contact_resistance_a_ohm=20.0),   # assumed poor pad contact
        environment=Environment.standing_air(),
        horizon_s=4.0,
    )


def _water_immersion() -> SimConfig:
    return replace(_oscillator(), circuit=replace(CALIBRATED_CIRCUIT, source_current_a=4.0),
                   environment=Environment.water(1000.0), horizon_s=60.0)


def _zero_drift() -> SimConfig:
    return replace(_oscillator().with_both_actuators(drift_per_cycle_m=0.0), horizon_s=400.0)


PRESETS: dict[str, ScenarioPreset] = {
    p.name: p for p in (
        ScenarioPreset(
            "oscillator_forced_air",
            "Oscillator at 0.55 A constant current with forced-air cooling; "
            "thermal, contraction, beam and contact values calibrated to the measured "
            "timeline, actuator resistance and stroke limit assumed.",
            _oscillator(), Outcome.OSCILLATES),
        ScenarioPreset(
            "contact_standing_air",
            "Single actuator contact test at 0.45 A in standing air, powered for 4 s; "
            "pad contact resistance assumed. The contact region exceeds the polyester "
            "glass transition while the actuator itself stays below it.",
            _contact_standing_air(), Outcome.OVERHEAT_FLAG),
        ScenarioPreset(
            "water_immersion",
            "Oscillator immersed in water at 4.0 A; water modeled as a 1000x "
            "convective multiplier (assumed). The actuators never reach snap stroke.",
            _water_immersion(), Outcome.NO_SNAP),
        ScenarioPreset(
            "zero_drift",
            "Calibrated oscillator with the per-snap length loss removed; "
            "a sustained-oscillation control over 400 s.",
            _zero_drift(), Outcome.OSCILLATES),
    )
}


class UnknownPreset(KeyError):
    def __str__(self) -> str:
        return self.args[0]


def preset_names() -> list[str]:
    return list(PRESETS)


def preset(name: str) -> ScenarioPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
