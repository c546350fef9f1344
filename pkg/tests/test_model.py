import pytest

from foldosc.model import (
    ActuatorParams, ActuatorState, BeamModel, BeamSide, CircuitModel, CoolingMode,
    Environment, SnapError, apply_snap, available_stroke, free_stroke, loop_power,
    snap_condition, steady_state_temperature, thermal_derivative, time_constant,
)

from conftest import make_actuator


def still_air():
    return Environment.standing_air(24.0)


def unit_actuator(hA=0.1, C=1.0):
    return make_actuator(thermal_capacitance_j_per_k=C, conv_conductance_w_per_k=hA)


# --- Joule power --------------------------------------------------------------

def test_power_pure_actuator_resistance():
    act = make_actuator(resistance_ohm=10.0)
    c = CircuitModel(0.55, contact_heat_fraction=0.0)
    assert loop_power(c, BeamSide.A, act) == pytest.approx(3.025, rel=1e-12)


def test_power_zero_current_heats_neither_actuator():
    act = make_actuator()
    c = CircuitModel(0.0, 5.0, 5.0)
    for side in BeamSide:
        assert loop_power(c, BeamSide.A, act, side) == 0.0


def test_power_with_contact_share():
    act = make_actuator(resistance_ohm=10.0)
    c = CircuitModel(0.45, contact_resistance_a_ohm=2.0, contact_heat_fraction=0.5)
    assert loop_power(c, BeamSide.A, act) == pytest.approx(2.025 + 0.2025, rel=1e-12)


def test_power_only_in_closed_loop():
    act = make_actuator()
    c = CircuitModel(0.55, 1.0, 7.0)
    assert loop_power(c, BeamSide.A, act, BeamSide.B) == 0.0
    assert loop_power(c, BeamSide.B, act) == pytest.approx(0.3025 * (10 + 0.5 * 7.0))
    assert c.loop_currents(BeamSide.A) == (0.55, 0.0)
    assert c.loop_currents(BeamSide.B) == (0.0, 0.55)


# --- heat balance ------------------------------------------------------------

def test_derivative_zero_at_ambient_unpowered():
    assert thermal_derivative(24.0, 0.0, unit_actuator(), still_air()) == 0.0


def test_derivative_zero_at_steady_state():
    act = unit_actuator(hA=0.1, C=1.0)
    assert thermal_derivative(ActuatorState(54.25), 3.025, act, still_air()) == pytest.approx(
        0.0, abs=1e-12)
    assert steady_state_temperature(3.025, act, still_air()) == pytest.approx(54.25)


def test_derivative_cooling_rate():
    act = unit_actuator(hA=0.1, C=1.0)
    assert thermal_derivative(80.0, 0.0, act, still_air()) == pytest.approx(-5.6)


def test_cooling_multiplier_scales_conductance():
    act = unit_actuator(hA=0.1, C=1.0)
    env = Environment.forced_air(3.0)
    assert env.cooling_mode is CoolingMode.FORCED_AIR
    assert thermal_derivative(80.0, 0.0, act, env) == pytest.approx(-16.8)
    assert time_constant(act, env) == pytest.approx(1 / 0.3)
    assert still_air().cooling_multiplier == 1.0
    assert Environment.water().cooling_multiplier == 1000.0


# --- stroke ------------------------------------------------------------------

def test_stroke_zero_below_activation():
    act = make_actuator(activation_temp_c=35.0)
    assert free_stroke(30.0, act) == 0.0
    assert available_stroke(ActuatorState(30.0), act) == 0.0


def test_stroke_linear_above_activation():
    act = make_actuator(activation_temp_c=35.0, contraction_coeff_m_per_k=1e-4, max_stroke_m=5e-3)
    assert available_stroke(ActuatorState(65.0), act) == pytest.approx(3e-3)


def test_stroke_saturates_at_max():
    act = make_actuator(activation_temp_c=35.0, contraction_coeff_m_per_k=1e-4, max_stroke_m=5e-3)
    assert free_stroke(500.0, act) == 5e-3


def test_stroke_floored_by_drift():
    act = make_actuator(activation_temp_c=35.0, contraction_coeff_m_per_k=1e-4)
    assert available_stroke(ActuatorState(65.0, accumulated_drift_m=3.5e-3), act) == 0.0


# --- snap --------------------------------------------------------------------

@pytest.mark.parametrize("stroke, expected", [(2e-3, True), (0.0, False), (1.01 * 2e-3, True),
                                              (0.99 * 2e-3, False)])
def test_snap_condition(stroke, expected):
    assert snap_condition(stroke, BeamModel(2e-3, 3e-3), BeamSide.A) is expected


def test_snap_condition_uses_side_threshold():
    beam = BeamModel(2e-3, 3e-3)
    assert snap_condition(2.5e-3, beam, BeamSide.A)
    assert not snap_condition(2.5e-3, beam, BeamSide.B)


def _hot_pair(drift=2e-4):
    act = make_actuator(drift_per_cycle_m=drift)
    return (act, act), (ActuatorState(100.0), ActuatorState(100.0))


def test_apply_snap_toggles_and_charges_puller():
    params, states = _hot_pair()
    side, new = apply_snap(states, BeamSide.A, params, BeamModel(1e-3, 1e-3))
    assert side is BeamSide.B
    assert new[0].accumulated_drift_m == pytest.approx(2e-4)
    assert new[1].accumulated_drift_m == 0.0
    assert new[0].temperature_c == 100.0


def test_two_snaps_return_to_a_with_both_drifts():
    params, states = _hot_pair()
    beam = BeamModel(1e-3, 1e-3)
    side, states = apply_snap(states, BeamSide.A, params, beam)
    side, states = apply_snap(states, side, params, beam)
    assert side is BeamSide.A
    assert [s.accumulated_drift_m for s in states] == pytest.approx([2e-4, 2e-4])


def test_zero_drift_snap_only_toggles():
    params, states = _hot_pair(drift=0.0)
    side, new = apply_snap(states, BeamSide.A, params, BeamModel(1e-3, 1e-3))
    assert side is BeamSide.B and new == states


def test_apply_snap_refuses_when_condition_false():
    act = make_actuator()
    with pytest.raises(SnapError):
        apply_snap((ActuatorState(24.0), ActuatorState(24.0)), BeamSide.A, (act, act),
                   BeamModel(1e-3, 1e-3))


def test_side_other():
    assert BeamSide.A.other is BeamSide.B and BeamSide.B.other is BeamSide.A
