import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from foldosc.analysis import phase_shift, summarize
from foldosc.config import validate
from foldosc.integrator import ChatteringError, resample, simulate
from foldosc.io import fmt
from foldosc.model import (
    BeamModel, BeamSide, CircuitModel, Environment, effective_conductance, loop_power,
    steady_state_temperature,
)

from conftest import make_actuator, make_config
from test_analysis import square_wave_trace

SLOW = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def oscillator_configs(draw):
    M = draw(st.floats(2e-3, 8e-3))
    drift = M * draw(st.floats(0.03, 0.5))
    crit = [M * draw(st.floats(0.05, 0.95)) for _ in range(2)]
    hA = draw(st.floats(0.01, 0.1))
    current = draw(st.floats(0.3, 0.8))
    R = draw(st.floats(5.0, 15.0))
    t_act = draw(st.floats(28.0, 45.0))
    t_ss = 24.0 + current ** 2 * R / (3.0 * hA)
    assume(t_ss > t_act + 1.0)
    coeff = M / (t_ss - t_act) * draw(st.floats(1.05, 3.0))
    act = make_actuator(resistance_ohm=R, thermal_capacitance_j_per_k=draw(st.floats(0.05, 0.5)),
                        conv_conductance_w_per_k=hA, activation_temp_c=t_act,
                        contraction_coeff_m_per_k=coeff, max_stroke_m=M, drift_per_cycle_m=drift)
    cfg = make_config(act, beam=BeamModel(*crit),
                      circuit=CircuitModel(current, draw(st.floats(0, 10)), draw(st.floats(0, 10))),
                      horizon_s=120.0)
    assume(not validate(cfg))
    return cfg


def per_side_pulls(cfg):
    act = cfg.actuator_a
    return [math.floor((act.max_stroke_m - c) / act.drift_per_cycle_m) + 1
            for c in (cfg.beam.crit_stroke_a_m, cfg.beam.crit_stroke_b_m)]


@SLOW
@given(oscillator_configs())
def test_event_count_within_per_side_budget(cfg):
    try:
        events = simulate(cfg).events
    except ChatteringError as exc:
        events = exc.events
    n_a, n_b = per_side_pulls(cfg)
    # A pulls first; the sequence stops at the first side that runs out
    assert len(events) <= min(2 * n_a, 2 * n_b + 1)


@SLOW
@given(oscillator_configs())
def test_alternation_and_temperature_envelope(cfg):
    tr = simulate(cfg)
    pullers = [e.puller for e in tr.events]
    assert all(a is not b for a, b in zip(pullers, pullers[1:]))
    assert np.all((tr.current_a_a == 0) | (tr.current_b_a == 0))
    hottest = max(steady_state_temperature(loop_power(cfg.circuit, s, a), a, cfg.environment)
                  for s, a in zip(BeamSide, cfg.actuators))
    amb = cfg.environment.ambient_c
    for temp in (tr.temp_a_c, tr.temp_b_c):
        assert temp.min() >= amb - 1e-9 and temp.max() <= hottest + 1e-9
    if len(tr.events) >= 4:
        period = np.max(np.diff(tr.event_times)) * 2
        assert abs(phase_shift(tr) - 0.5) <= cfg.step_s / period + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.2, 3.0), min_size=4, max_size=12))
def test_phase_half_for_any_alternating_square_wave(gaps):
    times = np.cumsum(np.round(gaps, 2))
    assert abs(phase_shift(square_wave_trace(list(times), times[-1] + 1.0)) - 0.5) < 1e-2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.2, 3.0), min_size=0, max_size=12))
def test_cycle_accounting(gaps):
    times = list(np.cumsum(np.round(gaps, 2)))
    s = summarize(square_wave_trace(times, (times[-1] if times else 0.0) + 1.0))
    assert s.n_full_cycles * 2 + s.half_cycle_fraction == s.n_snap_events == len(times)
    assert len(s.periods_s) == max(0, (len(times) - 1) // 2)


@given(st.floats(allow_nan=False, allow_infinity=False, min_value=-1e9, max_value=1e9))
def test_fmt_round_trips_to_nine_digits(x):
    text = fmt(x)
    assert "e" not in text
    assert float(text) == (0.0 if x == 0 else float(f"{x:.8e}"))


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 2.0))
def test_resample_grid(dt):
    tr = simulate(make_config(beam=BeamModel(1e-3, 1e-3), horizon_s=10.0))
    rs = resample(tr, dt)
    assert rs.time_s[0] == 0.0 and rs.time_s[-1] <= tr.time_s[-1] + 1e-9
    assert np.allclose(np.diff(rs.time_s), dt)
    assert set(np.unique(rs.beam_side)) <= {"A", "B"}
    assert np.all((rs.current_a_a == 0) | (rs.current_b_a == 0))


@given(st.floats(1.0, 5000.0), st.floats(0.001, 1.0))
def test_conductance_scales_with_multiplier(mult, hA):
    act = make_actuator(conv_conductance_w_per_k=hA)
    assert math.isclose(effective_conductance(act, Environment.forced_air(mult)), hA * mult)
