"""Fixed-step RK4 integration of the two thermal nodes with bisection on snap events.

The discrete mode (which loop is closed, accumulated drift) is frozen between
events, so each actuator obeys ``dT/dt = -(T - T_ss) / tau``. For that linear
right-hand side one classical RK4 step of size ``dt`` is the affine map
``T - T_ss -> g(dt) * (T - T_ss)``, where the gain ``g`` is obtained by running
:func:`rk4_step` once on the unit excess. Stepping a whole mode segment is then
a cumulative product, which keeps long horizons and calibration loops cheap
while producing the same numbers as stepping one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import ConfigError, SimConfig, validate
from .model import (
    ActuatorState,
    BeamSide,
    apply_snap,
    available_stroke,
    loop_power,
    snap_condition,
    steady_state_temperature,
    time_constant,
)

_CHUNK = 8192


class SimulationError(RuntimeError):
    """The integration could not continue; ``time_s`` locates the failure."""

    def __init__(self, message: str, time_s: float, events: list | None = None):
        super().__init__(f"{message} at t = {time_s:.9g} s")
        self.time_s = time_s
        self.events = events or []


class SimulationDiverged(SimulationError):
    def __init__(self, time_s: float, events: list | None = None):
        super().__init__("non-finite state", time_s, events)


class ChatteringError(SimulationError):
    """Two snaps fell inside one integration step (half-periods collapsing)."""

    def __init__(self, time_s: float, events: list | None = None):
        super().__init__("second snap event within one step", time_s, events)


@dataclass(frozen=True)
class SnapEvent:
    time_s: float
    puller: BeamSide          # side the beam left; its actuator did the pulling
    drift_a_m: float          # accumulated drift after the snap
    drift_b_m: float

    @property
    def to_side(self) -> BeamSide:
        return self.puller.other


@dataclass
class Trace:
    """Uniformly sampled channels plus the exact snap-event list."""

    time_s: np.ndarray
    temp_a_c: np.ndarray
    temp_b_c: np.ndarray
    current_a_a: np.ndarray
    current_b_a: np.ndarray
    beam_side: np.ndarray       # dtype '<U1', values 'A' / 'B'
    stroke_a_m: np.ndarray
    stroke_b_m: np.ndarray
    events: list[SnapEvent] = field(default_factory=list)
    # hottest structural point (contact region of the powered loop); not in the CSV
    struct_temp_c: np.ndarray | None = None
    horizon_s: float | None = None

    CHANNELS = ("time_s", "temp_a_c", "temp_b_c", "current_a_a", "current_b_a",
                "beam_side", "stroke_a_m", "stroke_b_m")

    def __len__(self) -> int:
        return len(self.time_s)

    @property
    def event_times(self) -> np.ndarray:
        return np.array([e.time_s for e in self.events], dtype=float)

    @property
    def end_time(self) -> float:
        if self.horizon_s is not None:
            return self.horizon_s
        return float(self.time_s[-1]) if len(self.time_s) else 0.0


def rk4_step(f: Callable[[float], float], y: float, dt: float) -> float:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def rk4_gain(tau_s: float, dt: float) -> float:
    """Amplification of the excess over steady state for one RK4 step."""
    return rk4_step(lambda e: -e / tau_s, 1.0, dt)


class _Mode:
    """Frozen-mode coefficients for both actuators."""

    def __init__(self, config: SimConfig, side: BeamSide):
        env = config.environment
        self.t_ss = np.empty(2)
        self.tau = np.empty(2)
        for j, (s, act) in enumerate(zip((BeamSide.A, BeamSide.B), config.actuators)):
            power = loop_power(config.circuit, side, act, side=s)
            self.t_ss[j] = steady_state_temperature(power, act, env)
            self.tau[j] = time_constant(act, env)
        self._gains: dict[float, tuple[float, float]] = {}

    def gain(self, dt: float) -> tuple[float, float]:
        g = self._gains.get(dt)
        if g is None:
            g = (rk4_gain(self.tau[0], dt), rk4_gain(self.tau[1], dt))
            self._gains[dt] = g
        return g


def simulate(config: SimConfig) -> Trace:
    """Integrate ``config`` over ``[0, horizon_s]``.

    Raises ConfigError for an invalid config and SimulationDiverged if a
    temperature stops being finite.
    """
    violations = validate(config)
    if violations:
        raise ConfigError("invalid configuration", violations)

    h = config.step_s
    n_steps = max(1, int(round(config.horizon_s / h)))
    acts = config.actuators
    beam = config.beam

    temps = np.empty((n_steps + 1, 2))
    drifts = np.empty((n_steps + 1, 2))
    sides = np.empty(n_steps + 1, dtype=np.int8)   # 0 = A, 1 = B

    ta, tb = config.initial_temperatures()
    states = (ActuatorState(ta), ActuatorState(tb))
    side = config.initial_side
    temps[0] = (ta, tb)
    drifts[0] = (0.0, 0.0)
    sides[0] = 0 if side is BeamSide.A else 1
    events: list[tuple[SnapEvent, int]] = []   # (event, step index)

    modes: dict[BeamSide, _Mode] = {}
    k = 1              # next grid index to fill
    t_cur = 0.0        # time of ``states``
    first_len = h      # distance from t_cur to grid point k

    while k <= n_steps:
        mode = modes.get(side)
        if mode is None:
            mode = modes[side] = _Mode(config, side)
        j = 0 if side is BeamSide.A else 1
        act = acts[j]
        crit = beam.crit_stroke(side)
        drift_j = states[j].accumulated_drift_m
        excess0 = np.array([states[0].temperature_c, states[1].temperature_c]) - mode.t_ss

        def state_after(dt: float, excess=excess0, mode=mode) -> tuple[ActuatorState, ...]:
            g = mode.gain(dt)
            return tuple(ActuatorState(mode.t_ss[i] + excess[i] * g[i],
                                       states[i].accumulated_drift_m) for i in range(2))

        def fires(st: tuple[ActuatorState, ...]) -> bool:
            return snap_condition(available_stroke(st[j], act), beam, side)

        # Already past critical when the mode starts: snap at the end of the first substep.
        if fires(states):
            after = state_after(first_len)
            k, t_cur, first_len, side, states = _fire(
                config, after, side, t_cur + first_len, k, True, h,
                temps, drifts, sides, events, at_grid_time=k * h)
            continue

        # Bulk-advance grid points k, k+1, ... until the snap condition turns true.
        found = None
        excess = excess0
        seg_start, seg_first = k, first_len
        g_first, g_full = mode.gain(first_len), mode.gain(h)
        while k <= n_steps:
            m = min(_CHUNK, n_steps - k + 1)
            factors = np.empty((m, 2))
            factors[0] = g_first if k == seg_start else g_full
            factors[1:] = g_full
            chunk_excess = np.cumprod(np.vstack([excess, factors]), axis=0)[1:]
            chunk_t = mode.t_ss + chunk_excess
            if not np.all(np.isfinite(chunk_t)):
                bad = int(np.argmin(np.all(np.isfinite(chunk_t), axis=1)))
                raise SimulationDiverged((k + bad) * h, events)
            tj = chunk_t[:, j]
            raw = act.contraction_coeff_m_per_k * np.maximum(0.0, tj - act.activation_temp_c)
            stroke = np.maximum(np.minimum(np.maximum(raw, 0.0), act.max_stroke_m) - drift_j, 0.0)
            hit = np.flatnonzero(stroke >= crit)
            stop = m if hit.size == 0 else int(hit[0])
            temps[k:k + stop] = chunk_t[:stop]
            drifts[k:k + stop] = (states[0].accumulated_drift_m, states[1].accumulated_drift_m)
            sides[k:k + stop] = j
            if hit.size:
                found = (k + stop, chunk_excess[stop - 1] if stop > 0 else excess)
                break
            excess = chunk_excess[-1]
            k += m

        if found is None:
            break

        k_hit, prev_excess = found
        if k_hit == seg_start:
            t_prev, length = t_cur, seg_first
            prev_excess = excess0
        else:
            t_prev, length = (k_hit - 1) * h, h
        prev_states = tuple(ActuatorState(mode.t_ss[i] + prev_excess[i],
                                          states[i].accumulated_drift_m) for i in range(2))

        def sub_state(dt: float, excess=prev_excess, mode=mode, prev=prev_states):
            g = mode.gain(dt)
            return tuple(ActuatorState(mode.t_ss[i] + excess[i] * g[i],
                                       prev[i].accumulated_drift_m) for i in range(2))

        lo, hi = 0.0, length
        hi_state = sub_state(hi)
        if not fires(hi_state):
            raise RuntimeError("bulk step and substep disagree on the snap condition")
        while hi - lo > config.event_tolerance_s:
            mid = 0.5 * (lo + hi)
            st = sub_state(mid)
            if fires(st):
                hi, hi_state = mid, st
            else:
                lo = mid
        k, t_cur, first_len, side, states = _fire(
            config, hi_state, side, t_prev + hi, k_hit, hi == length, h,
            temps, drifts, sides, events, at_grid_time=k_hit * h)

    return _build_trace(config, temps, drifts, sides, events, n_steps)


def _fire(config, states, side, t_event, k, at_grid, h, temps, drifts, sides, events,
          at_grid_time):
    """Apply a snap at ``t_event``; record grid ``k`` too if the event sits on it.

    The event belongs to the step ending at grid ``k``; a second event in
    the same step raises ChatteringError.
    """
    if events and events[-1][1] == k:
        raise ChatteringError(t_event, [e for e, _ in events])
    new_side, states = apply_snap(states, side, config.actuators, config.beam)
    events.append((SnapEvent(float(at_grid_time if at_grid else t_event), side,
                             states[0].accumulated_drift_m, states[1].accumulated_drift_m), k))
    if at_grid:
        temps[k] = (states[0].temperature_c, states[1].temperature_c)
        drifts[k] = (states[0].accumulated_drift_m, states[1].accumulated_drift_m)
        sides[k] = 0 if new_side is BeamSide.A else 1
        return k + 1, k * h, h, new_side, states
    return k, t_event, k * h - t_event, new_side, states


def _build_trace(config: SimConfig, temps, drifts, sides, events, n_steps) -> Trace:
    idx = np.arange(0, n_steps + 1, config.record_stride)
    t = idx * config.step_s
    ta, tb = temps[idx, 0], temps[idx, 1]
    da, db = drifts[idx, 0], drifts[idx, 1]
    sd = sides[idx]
    act_a, act_b = config.actuators
    current = config.circuit.source_current_a
    cur_a = np.where(sd == 0, current, 0.0)
    cur_b = np.where(sd == 1, current, 0.0)

    def strokes(temp, drift, act):
        raw = act.contraction_coeff_m_per_k * np.maximum(0.0, temp - act.activation_temp_c)
        return np.maximum(np.minimum(np.maximum(raw, 0.0), act.max_stroke_m) - drift, 0.0)

    # Contact heat that bypasses the actuator warms the structure at the contact.
    # Its rise tracks the powered actuator's rise, scaled by total/absorbed power.
    circ, amb = config.circuit, config.environment.ambient_c
    lost = (1.0 - circ.contact_heat_fraction) * current ** 2

    def contact_scale(side, act):
        absorbed = loop_power(circ, side, act)
        if absorbed <= 0.0:
            return 1.0
        return 1.0 + lost * circ.contact_resistance(side) / absorbed

    scale_a = contact_scale(BeamSide.A, act_a)
    scale_b = contact_scale(BeamSide.B, act_b)
    struct = np.where(sd == 0, amb + (ta - amb) * scale_a, amb + (tb - amb) * scale_b)
    struct = np.maximum(struct, np.maximum(ta, tb))

    return Trace(
        time_s=t, temp_a_c=ta, temp_b_c=tb, current_a_a=cur_a, current_b_a=cur_b,
        beam_side=np.where(sd == 0, "A", "B"),
        stroke_a_m=strokes(ta, da, act_a), stroke_b_m=strokes(tb, db, act_b),
        events=[e for e, _ in events], struct_temp_c=struct,
        horizon_s=n_steps * config.step_s,
    )


def resample(trace: Trace, dt_s: float) -> Trace:
    """Resample onto a uniform grid starting at the first sample.

    Continuous channels are interpolated linearly; beam side and currents
    are held from the left neighbour so the loops stay mutually exclusive.
    """
    if not dt_s > 0:
        raise ValueError("dt_s must be > 0")
    if len(trace) == 0:
        raise ValueError("cannot resample an empty trace")
    t0, t1 = float(trace.time_s[0]), float(trace.time_s[-1])
    n = int(math.floor((t1 - t0) / dt_s * (1 + 1e-12))) + 1
    t = t0 + np.arange(n) * dt_s
    left = np.searchsorted(trace.time_s, t * (1 + 1e-12) + 1e-15, side="right") - 1
    left = np.clip(left, 0, len(trace) - 1)

    def lin(y):
        return np.interp(t, trace.time_s, y)

    return Trace(
        time_s=t,
        temp_a_c=lin(trace.temp_a_c), temp_b_c=lin(trace.temp_b_c),
        current_a_a=trace.current_a_a[left], current_b_a=trace.current_b_a[left],
        beam_side=trace.beam_side[left],
        stroke_a_m=lin(trace.stroke_a_m), stroke_b_m=lin(trace.stroke_b_m),
        events=list(trace.events),
        struct_temp_c=None if trace.struct_temp_c is None else lin(trace.struct_temp_c),
        horizon_s=trace.horizon_s,
    )
