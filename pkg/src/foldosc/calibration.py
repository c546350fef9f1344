"""Fit free model parameters to the measured oscillation timeline.

The objective is a weighted sum of squared relative errors over five
scalar observables. It is piecewise smooth (event counts are integers), so
the search is a bounded Nelder-Mead simplex with deterministic restarts,
run in the unit cube spanned by the parameter box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .analysis import SimSummary, summarize
from .config import ConfigError, SimConfig, get_param, set_param
from .integrator import SimulationError, simulate
from .model import BeamSide

TARGET_NAMES = ("first_snap_s", "first_snapback_s", "mean_period_s", "total_cycles",
                "stall_time_s")

# Free set; resistance_ohm, max_stroke_m and contact_heat_fraction stay fixed.
FIT_PARAMETERS = (
    "thermal_capacitance_j_per_k",
    "conv_conductance_w_per_k",
    "contraction_coeff_m_per_k",
    "activation_temp_c",
    "crit_stroke_a_m",
    "crit_stroke_b_m",
    "drift_per_cycle_m",
    "contact_resistance_a_ohm",
    "contact_resistance_b_ohm",
)

NO_EVENT_PENALTY = 10.0


@dataclass(frozen=True)
class CalibrationTargets:
    first_snap_s: float = 3.8
    first_snapback_s: float = 5.9
    mean_period_s: float = 3.75
    total_cycles: float = 4.5
    stall_time_s: float = 20.0
    weights: dict[str, float] = field(default_factory=lambda: dict.fromkeys(TARGET_NAMES, 1.0))

    def __post_init__(self):
        for name in TARGET_NAMES:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"target {name} must be positive, got {value!r}")
        unknown = set(self.weights) - set(TARGET_NAMES)
        if unknown:
            raise ValueError(f"weights for unknown targets: {sorted(unknown)}")
        for name, w in self.weights.items():
            if not (math.isfinite(w) and w >= 0):
                raise ValueError(f"weight for {name} must be >= 0, got {w!r}")

    def weight(self, name: str) -> float:
        return self.weights.get(name, 1.0)

    @classmethod
    def from_summary(cls, summary: SimSummary, **kwargs) -> "CalibrationTargets":
        """Targets that a simulated summary reproduces exactly (round-trip checks)."""
        return cls(first_snap_s=summary.first_snap_s,
                   first_snapback_s=summary.first_snapback_s,
                   mean_period_s=summary.mean_period_s,
                   total_cycles=summary.total_cycles,
                   stall_time_s=observed_stall(summary), **kwargs)


@dataclass(frozen=True)
class ParameterBounds:
    """Box for the free parameters; a collapsed interval pins that parameter."""

    bounds: dict[str, tuple[float, float]]

    def __post_init__(self):
        if not self.bounds:
            raise ValueError("no parameters to fit")
        for name, (lo, hi) in self.bounds.items():
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"bounds for {name} must be finite")
            if lo > hi:
                raise ValueError(f"lower bound exceeds upper bound for {name}")
            if lo < 0:
                raise ValueError(f"bounds for {name} must be non-negative")

    @property
    def names(self) -> list[str]:
        return list(self.bounds)

    @property
    def free(self) -> list[str]:
        return [n for n, (lo, hi) in self.bounds.items() if hi > lo]

    def clip(self, params: dict[str, float]) -> dict[str, float]:
        return {n: min(max(params[n], lo), hi) for n, (lo, hi) in self.bounds.items()}


@dataclass(frozen=True)
class OptimizerSettings:
    max_evaluations: int = 2000
    restarts: int = 8
    seed: int = 0
    spread_tol: float = 1e-4    # simplex spread, relative to the box width


@dataclass(frozen=True)
class Evaluation:
    index: int
    restart: int
    params: dict[str, float]
    loss: float
    best_loss: float


@dataclass
class CalibrationResult:
    best_params: dict[str, float]
    best_loss: float
    history: list[Evaluation]
    config: SimConfig
    summary: SimSummary | None = None

    @property
    def n_evaluations(self) -> int:
        return len(self.history)


class CalibrationFailed(RuntimeError):
    def __init__(self, message: str, result: CalibrationResult):
        super().__init__(message)
        self.result = result


def apply_params(config: SimConfig, params: dict[str, float]) -> SimConfig:
    for name, value in params.items():
        config = set_param(config, name, value)
    return config


def observed_stall(summary: SimSummary) -> float | None:
    """Stall time, or the last snap when no stall was detected inside the horizon."""
    return summary.stall_time_s if summary.stall_time_s is not None else summary.last_event_s


def relative_errors(summary: SimSummary, targets: CalibrationTargets) -> dict[str, float]:
    """Signed relative error per target; a missing observable counts as a 100 % miss."""
    observed = {
        "first_snap_s": summary.first_snap_s,
        "first_snapback_s": summary.first_snapback_s,
        "mean_period_s": summary.mean_period_s,
        "total_cycles": summary.total_cycles,
        "stall_time_s": observed_stall(summary),
    }
    out = {}
    for name in TARGET_NAMES:
        value, target = observed[name], getattr(targets, name)
        out[name] = 1.0 if value is None else (value - target) / target
    return out


def loss_from_summary(summary: SimSummary, targets: CalibrationTargets,
                      peak_stroke_fraction: float = 0.0) -> float:
    if summary.n_snap_events == 0:
        # Shaping term: how far the first pull fell short of its critical stroke.
        shortfall = min(max(1.0 - peak_stroke_fraction, 0.0), 1.0)
        return NO_EVENT_PENALTY * sum(targets.weight(n) for n in TARGET_NAMES) + shortfall
    errors = relative_errors(summary, targets)
    return float(sum(targets.weight(n) * errors[n] ** 2 for n in TARGET_NAMES))


def _score(config: SimConfig, params: dict[str, float],
           targets: CalibrationTargets) -> tuple[float, int]:
    try:
        cfg = apply_params(config, params)
        trace = simulate(cfg)
    except (SimulationError, ConfigError):
        return math.inf, 0
    summary = summarize(trace, cfg.beam.beam_tg_c, cfg.actuator_a.actuator_tg_c)
    first = cfg.initial_side
    stroke = trace.stroke_a_m if first is BeamSide.A else trace.stroke_b_m
    peak = float(np.max(stroke)) / cfg.beam.crit_stroke(first)
    return loss_from_summary(summary, targets, peak), summary.n_snap_events


def objective(params: dict[str, float], targets: CalibrationTargets, config: SimConfig) -> float:
    """Loss of ``config`` with ``params`` applied; divergence or invalid points give inf."""
    return _score(config, params, targets)[0]


def calibrate(targets: CalibrationTargets, bounds: ParameterBounds, config: SimConfig,
              settings: OptimizerSettings | None = None) -> CalibrationResult:
    """Minimise :func:`objective` over the box with restarted Nelder-Mead.

    Restart 0 starts from the config's own values (clipped into the box);
    the others start from points drawn with ``settings.seed``. The
    evaluation budget is shared across restarts. Raises CalibrationFailed
    (carrying the best-so-far result) if no evaluated point oscillates.
    """
    settings = settings or OptimizerSettings()
    names = bounds.names
    free = bounds.free
    lo = np.array([bounds.bounds[n][0] for n in free])
    width = np.array([bounds.bounds[n][1] - bounds.bounds[n][0] for n in free])
    pinned = {n: bounds.bounds[n][0] for n in names if n not in free}

    history: list[Evaluation] = []
    best = {"loss": math.inf, "params": None, "oscillated": False}

    def to_params(u: np.ndarray) -> dict[str, float]:
        u = np.clip(u, 0.0, 1.0)   # projection at proposal time
        params = dict(pinned)
        params.update({n: float(lo[i] + u[i] * width[i]) for i, n in enumerate(free)})
        return {n: params[n] for n in names}

    class _Budget(Exception):
        pass

    def evaluate(u: np.ndarray, restart: int) -> float:
        if len(history) >= settings.max_evaluations:
            raise _Budget
        params = to_params(u)
        loss, n_events = _score(config, params, targets)
        if n_events >= 2:
            best["oscillated"] = True
        if loss < best["loss"]:
            best["loss"], best["params"] = loss, params
        history.append(Evaluation(len(history), restart, params, loss, best["loss"]))
        return loss

    start0 = bounds.clip({n: get_param(config, n) for n in names})
    u0 = np.array([(start0[n] - lo[i]) / width[i] for i, n in enumerate(free)])

    if not free:
        evaluate(np.zeros(0), 0)
    else:
        rng = np.random.default_rng(settings.seed)
        starts = [u0] + [rng.uniform(0.05, 0.95, len(free)) for _ in range(settings.restarts - 1)]
        for r, start in enumerate(starts):
            remaining = settings.max_evaluations - len(history)
            if remaining <= 0:
                break
            share = remaining // (len(starts) - r)
            simplex = _initial_simplex(start)
            try:
                minimize(evaluate, start, args=(r,), method="Nelder-Mead",
                         bounds=[(0.0, 1.0)] * len(free),
                         options=dict(initial_simplex=simplex, maxfev=max(share, len(free) + 1),
                                      xatol=settings.spread_tol, fatol=math.inf,
                                      adaptive=len(free) > 4))
            except _Budget:
                break

    best_params = best["params"] if best["params"] is not None else to_params(u0)
    cfg = apply_params(config, best_params)
    summary = None
    try:
        summary = summarize(simulate(cfg), cfg.beam.beam_tg_c, cfg.actuator_a.actuator_tg_c)
    except (SimulationError, ConfigError):
        pass
    result = CalibrationResult(best_params, best["loss"], history, cfg, summary)
    if not best["oscillated"]:
        raise CalibrationFailed("no evaluated parameter set produced an oscillation", result)
    return result


def _initial_simplex(start: np.ndarray, size: float = 0.1) -> np.ndarray:
    n = len(start)
    simplex = np.tile(start, (n + 1, 1))
    for i in range(n):
        step = size if start[i] + size <= 1.0 else -size
        simplex[i + 1, i] += step
    return simplex
