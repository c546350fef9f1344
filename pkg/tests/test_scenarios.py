import time

import pytest

from foldosc.analysis import summarize
from foldosc.integrator import simulate
from foldosc.scenarios import Outcome, UnknownPreset, preset, preset_names


@pytest.mark.parametrize("name", preset_names())
def test_preset_outcome_met_quickly(name):
    p = preset(name)
    start = time.perf_counter()
    trace = simulate(p.config)
    elapsed = time.perf_counter() - start
    s = summarize(trace, p.config.beam.beam_tg_c, p.config.actuator_a.actuator_tg_c)
    assert p.outcome_met(s), s
    assert elapsed < 5.0


def test_expected_outcomes():
    assert preset("oscillator_forced_air").expected is Outcome.OSCILLATES
    assert preset("water_immersion").expected is Outcome.NO_SNAP
    assert preset("contact_standing_air").expected is Outcome.OVERHEAT_FLAG
    assert preset("zero_drift").expected is Outcome.OSCILLATES


def test_water_never_snaps_in_60_s():
    cfg = preset("water_immersion").config
    assert cfg.horizon_s == 60.0 and cfg.circuit.source_current_a == 4.0
    assert simulate(cfg).events == []


def test_zero_drift_sustains():
    cfg = preset("zero_drift").config
    assert cfg.actuator_a.drift_per_cycle_m == 0.0
    assert len(simulate(cfg).events) >= 100


def test_contact_test_overheats_structure_not_actuator():
    cfg = preset("contact_standing_air").config
    s = summarize(simulate(cfg), cfg.beam.beam_tg_c, cfg.actuator_a.actuator_tg_c)
    assert s.beam_overheat_flag and not s.actuator_overheat_flag


def test_unknown_preset_lists_available():
    with pytest.raises(UnknownPreset) as info:
        preset("nope")
    assert "oscillator_forced_air" in str(info.value)
