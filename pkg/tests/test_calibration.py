import math
from dataclasses import replace

import numpy as np
import pytest

from foldosc.analysis import summarize
from foldosc.calibration import (
    FIT_PARAMETERS, NO_EVENT_PENALTY, TARGET_NAMES, CalibrationFailed, CalibrationTargets,
    OptimizerSettings, ParameterBounds, apply_params, calibrate, loss_from_summary, objective,
    relative_errors,
)
from foldosc.config import get_param
from foldosc.integrator import simulate
from foldosc.model import CircuitModel
from foldosc.scenarios import preset

BASE = preset("oscillator_forced_air").config
IDENTIFIABLE = ("thermal_capacitance_j_per_k", "conv_conductance_w_per_k", "drift_per_cycle_m")


def own_params(config=BASE, names=FIT_PARAMETERS):
    return {n: get_param(config, n) for n in names}


def synthetic(scales=(1.12, 0.9, 1.15)):
    truth = {n: get_param(BASE, n) * s for n, s in zip(IDENTIFIABLE, scales)}
    targets = CalibrationTargets.from_summary(summarize(simulate(apply_params(BASE, truth))))
    bounds = ParameterBounds({n: (get_param(BASE, n) * 0.7, get_param(BASE, n) * 1.3)
                              for n in IDENTIFIABLE})
    return truth, targets, bounds


def test_exact_targets_give_zero():
    targets = CalibrationTargets.from_summary(summarize(simulate(BASE)))
    assert objective(own_params(), targets, BASE) == 0.0


def test_self_consistency_on_synthetic_targets():
    truth, targets, _ = synthetic()
    assert objective(truth, targets, BASE) < 1e-6


def test_zero_event_penalty_exceeds_any_single_miss():
    targets = CalibrationTargets()
    dead = objective({"source_current_a": 0.0}, targets, BASE)
    assert math.isfinite(dead)
    assert dead >= NO_EVENT_PENALTY * len(TARGET_NAMES)
    # a 100 % miss on one target costs weight * 1
    s = summarize(simulate(BASE))
    doubled = CalibrationTargets(first_snap_s=s.first_snap_s / 2, first_snapback_s=s.first_snapback_s,
                                 mean_period_s=s.mean_period_s, total_cycles=s.total_cycles,
                                 stall_time_s=s.stall_time_s)
    assert loss_from_summary(s, doubled) == pytest.approx(1.0)
    assert dead > loss_from_summary(s, doubled)


def test_penalty_shaped_by_stroke_shortfall():
    targets = CalibrationTargets()
    far = objective({"source_current_a": 0.35}, targets, BASE)
    assert far < NO_EVENT_PENALTY * len(TARGET_NAMES) + 1
    near = objective({"source_current_a": 0.4}, targets, BASE)
    assert near < far


def test_missing_observable_counts_as_full_miss():
    s = summarize(simulate(replace(BASE, horizon_s=4.0)))       # a single snap
    assert s.n_snap_events == 1
    err = relative_errors(s, CalibrationTargets())
    assert err["first_snapback_s"] == 1.0 and err["mean_period_s"] == 1.0


def test_invalid_point_scores_inf():
    assert objective({"thermal_capacitance_j_per_k": -1.0}, CalibrationTargets(), BASE) == math.inf


def test_targets_validated():
    with pytest.raises(ValueError):
        CalibrationTargets(first_snap_s=-1.0)
    with pytest.raises(ValueError):
        CalibrationTargets(weights={"first_snap_s": -1.0})


def test_bounds_validated():
    with pytest.raises(ValueError):
        ParameterBounds({"drift_per_cycle_m": (2.0, 1.0)})
    with pytest.raises(ValueError):
        ParameterBounds({})


def test_degenerate_box_single_evaluation():
    point = own_params(names=IDENTIFIABLE)
    bounds = ParameterBounds({n: (v, v) for n, v in point.items()})
    res = calibrate(CalibrationTargets(), bounds, BASE)
    assert res.n_evaluations == 1
    assert res.best_params == point
    assert res.best_loss == objective(point, CalibrationTargets(), BASE)


def test_round_trip_recovers_parameters():
    truth, targets, bounds = synthetic()
    res = calibrate(targets, bounds, BASE, OptimizerSettings(max_evaluations=600, restarts=4))
    assert res.best_loss < 1e-6
    for name, value in truth.items():
        assert res.best_params[name] == pytest.approx(value, rel=0.05)


def test_history_monotone_and_in_bounds():
    _, targets, bounds = synthetic()
    res = calibrate(targets, bounds, BASE, OptimizerSettings(max_evaluations=150, restarts=3))
    best = [e.best_loss for e in res.history]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert best[-1] == res.best_loss == min(e.loss for e in res.history)
    assert res.n_evaluations <= 150
    for e in res.history:
        for n, (lo, hi) in bounds.bounds.items():
            assert lo <= e.params[n] <= hi


def test_deterministic_for_seed():
    _, targets, bounds = synthetic()
    settings = OptimizerSettings(max_evaluations=120, restarts=3, seed=7)
    a = calibrate(targets, bounds, BASE, settings)
    b = calibrate(targets, bounds, BASE, settings)
    assert a.best_params == b.best_params
    assert [e.loss for e in a.history] == [e.loss for e in b.history]


def test_no_oscillating_candidate_fails():
    dead = replace(BASE, circuit=CircuitModel(0.05))
    bounds = ParameterBounds({"drift_per_cycle_m": (1e-5, 1e-3)})
    with pytest.raises(CalibrationFailed) as info:
        calibrate(CalibrationTargets(), bounds, dead, OptimizerSettings(max_evaluations=20, restarts=2))
    assert info.value.result.n_evaluations > 0
