"""Lumped physics of the foldable relaxation oscillator.

Two Joule-heated SCP actuators are wired into two loops. A bistable beam
acts as a double-pole switch: on side A only loop A carries the source
current, on side B only loop B does. The powered actuator heats, contracts
and eventually pulls the beam over, which hands the current to the other
loop. Every pull costs the puller a fixed amount of free length.

All parameter types are frozen dataclasses; the few mutable quantities
(temperatures, drift) live in :class:`ActuatorState`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace


class BeamSide(enum.Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> "BeamSide":
        return BeamSide.B if self is BeamSide.A else BeamSide.A


class SnapError(RuntimeError):
    """apply_snap was called while the active actuator cannot pull the beam."""


@dataclass(frozen=True)
class ActuatorParams:
    resistance_ohm: float
    thermal_capacitance_j_per_k: float
    conv_conductance_w_per_k: float
    activation_temp_c: float
    contraction_coeff_m_per_k: float
    max_stroke_m: float
    drift_per_cycle_m: float = 0.0
    actuator_tg_c: float = 60.0


@dataclass(frozen=True)
class ActuatorState:
    temperature_c: float
    accumulated_drift_m: float = 0.0


@dataclass(frozen=True)
class BeamModel:
    crit_stroke_a_m: float
    crit_stroke_b_m: float
    beam_tg_c: float = 60.0

    def crit_stroke(self, side: BeamSide) -> float:
        return self.crit_stroke_a_m if side is BeamSide.A else self.crit_stroke_b_m


@dataclass(frozen=True)
class CircuitModel:
    source_current_a: float
    contact_resistance_a_ohm: float = 0.0
    contact_resistance_b_ohm: float = 0.0
    contact_heat_fraction: float = 0.5

    def contact_resistance(self, side: BeamSide) -> float:
        if side is BeamSide.A:
            return self.contact_resistance_a_ohm
        return self.contact_resistance_b_ohm

    def loop_currents(self, side: BeamSide) -> tuple[float, float]:
        """(loop A, loop B) currents; exactly one loop is closed."""
        if side is BeamSide.A:
            return self.source_current_a, 0.0
        return 0.0, self.source_current_a


class CoolingMode(enum.Enum):
    STANDING_AIR = "standing_air"
    FORCED_AIR = "forced_air"
    WATER = "water"


# Water must be at least this many times stronger than the forced-air default.
FORCED_AIR_DEFAULT_MULTIPLIER = 3.0
WATER_DEFAULT_MULTIPLIER = 1000.0


@dataclass(frozen=True)
class Environment:
    ambient_c: float = 24.0
    cooling_mode: CoolingMode = CoolingMode.STANDING_AIR
    multiplier: float = 1.0

    @classmethod
    def standing_air(cls, ambient_c: float = 24.0) -> "Environment":
        return cls(ambient_c, CoolingMode.STANDING_AIR, 1.0)

    @classmethod
    def forced_air(cls, multiplier: float = FORCED_AIR_DEFAULT_MULTIPLIER,
                   ambient_c: float = 24.0) -> "Environment":
        return cls(ambient_c, CoolingMode.FORCED_AIR, multiplier)

    @classmethod
    def water(cls, multiplier: float = WATER_DEFAULT_MULTIPLIER,
              ambient_c: float = 24.0) -> "Environment":
        return cls(ambient_c, CoolingMode.WATER, multiplier)

    @property
    def cooling_multiplier(self) -> float:
        if self.cooling_mode is CoolingMode.STANDING_AIR:
            return 1.0
        return self.multiplier


def effective_conductance(act: ActuatorParams, env: Environment) -> float:
    return act.conv_conductance_w_per_k * env.cooling_multiplier


def time_constant(act: ActuatorParams, env: Environment) -> float:
    return act.thermal_capacitance_j_per_k / effective_conductance(act, env)


def loop_power(circuit: CircuitModel, active_side: BeamSide, act: ActuatorParams,
               side: BeamSide | None = None) -> float:
    """Joule power deposited in the actuator of ``side`` (default: the closed loop).

    The actuator in the closed loop gets ``I^2 R_act`` plus its share of the
    contact heat; the actuator in the open loop gets nothing.
    """
    side = active_side if side is None else side
    if side is not active_side:
        return 0.0
    i2 = circuit.source_current_a ** 2
    contact = circuit.contact_heat_fraction * i2 * circuit.contact_resistance(active_side)
    return i2 * act.resistance_ohm + contact


def steady_state_temperature(power_w: float, act: ActuatorParams, env: Environment) -> float:
    return env.ambient_c + power_w / effective_conductance(act, env)


def thermal_derivative(state: ActuatorState | float, power_w: float,
                       act: ActuatorParams, env: Environment) -> float:
    """Newton-cooling heat balance, K/s."""
    temp = state.temperature_c if isinstance(state, ActuatorState) else state
    loss = effective_conductance(act, env) * (temp - env.ambient_c)
    return (power_w - loss) / act.thermal_capacitance_j_per_k


def free_stroke(temperature_c: float, act: ActuatorParams) -> float:
    """Thermal contraction before drift is subtracted (saturating ramp)."""
    raw = act.contraction_coeff_m_per_k * max(0.0, temperature_c - act.activation_temp_c)
    return min(max(raw, 0.0), act.max_stroke_m)


def available_stroke(state: ActuatorState, act: ActuatorParams) -> float:
    return max(0.0, free_stroke(state.temperature_c, act) - state.accumulated_drift_m)


def snap_condition(stroke_m: float, beam: BeamModel, side: BeamSide) -> bool:
    """True when the actuator pulling away from ``side`` has reached its critical stroke.

    Equality counts as a snap.
    """
    return stroke_m >= beam.crit_stroke(side)


def apply_snap(states: tuple[ActuatorState, ActuatorState], side: BeamSide,
               params: tuple[ActuatorParams, ActuatorParams],
               beam: BeamModel) -> tuple[BeamSide, tuple[ActuatorState, ActuatorState]]:
    """Toggle the beam and charge the pulling actuator one drift increment.

    ``states`` and ``params`` are ordered (A, B). The snap is instantaneous,
    so temperatures carry over untouched.
    """
    idx = 0 if side is BeamSide.A else 1
    puller, puller_params = states[idx], params[idx]
    stroke = available_stroke(puller, puller_params)
    if not snap_condition(stroke, beam, side):
        raise SnapError(
            f"actuator {side.value} stroke {stroke:.6g} m is below the critical "
            f"stroke {beam.crit_stroke(side):.6g} m")
    pulled = replace(puller, accumulated_drift_m=puller.accumulated_drift_m
                     + puller_params.drift_per_cycle_m)
    new_states = (pulled, states[1]) if idx == 0 else (states[0], pulled)
    return side.other, new_states
