"""Observables extracted from a trace: cycles, periods, stall, temperatures, flags."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .integrator import Trace
from .model import BeamSide

STALL_WINDOW_PERIODS = 2.0


class InsufficientCycles(ValueError):
    pass


@dataclass(frozen=True)
class SimSummary:
    n_snap_events: int
    n_full_cycles: int
    half_cycle_fraction: int
    mean_period_s: float | None
    periods_s: list[float]
    half_periods_s: list[float]
    half_period_ratio: float | None
    first_snap_s: float | None
    first_snapback_s: float | None
    last_event_s: float | None
    stall_time_s: float | None
    max_temp_a_c: float
    max_temp_b_c: float
    mean_temp_a_c: float
    mean_temp_b_c: float
    max_struct_temp_c: float
    beam_overheat_flag: bool
    actuator_overheat_flag: bool
    alternates: bool = field(default=True)

    @property
    def total_cycles(self) -> float:
        return self.n_snap_events / 2.0

    @property
    def oscillates(self) -> bool:
        return self.n_snap_events >= 2


def summarize(trace: Trace, beam_tg_c: float = 60.0, actuator_tg_c: float = 60.0) -> SimSummary:
    """Reduce a trace to the reported observables.

    A period runs from one A-pull to the next A-pull (two snaps). The
    oscillation is declared stalled at the last event when the trace extends
    at least two mean periods beyond it without another snap.
    """
    if len(trace) == 0:
        raise ValueError("cannot summarize an empty trace")
    times = trace.event_times
    n = len(times)
    pullers = [e.puller for e in trace.events]

    # alternate same-direction events: e0 -> e2 -> e4 ...
    periods = [float(times[i + 2] - times[i]) for i in range(0, n - 2, 2)]
    half = [float(x) for x in np.diff(times)]
    mean_period = float(np.mean(periods)) if periods else None

    half_ratio = None
    if n >= 3:
        # a gap that starts with an A-pull is time spent on side B
        on_b = [g for g, p in zip(half, pullers) if p is BeamSide.A]
        on_a = [g for g, p in zip(half, pullers) if p is BeamSide.B]
        if on_a and on_b:
            half_ratio = float(np.mean(on_a) / np.mean(on_b))

    end = trace.end_time
    stall = None
    if n:
        last = float(times[-1])
        if mean_period is not None:
            window = STALL_WINDOW_PERIODS * mean_period
        else:
            window = STALL_WINDOW_PERIODS * max([float(times[0])] + half)
        if end - last >= window:
            stall = last

    t = trace.time_s
    if n:
        mask = t <= times[-1]
        if not mask.any():
            mask = np.zeros_like(t, dtype=bool)
            mask[0] = True
    else:
        mask = np.ones_like(t, dtype=bool)

    struct = trace.struct_temp_c
    if struct is None:
        struct = np.maximum(trace.temp_a_c, trace.temp_b_c)
    max_a = float(np.max(trace.temp_a_c))
    max_b = float(np.max(trace.temp_b_c))
    alternates = all(pullers[i] is not pullers[i + 1] for i in range(n - 1))

    return SimSummary(
        n_snap_events=n,
        n_full_cycles=n // 2,
        half_cycle_fraction=n % 2,
        mean_period_s=mean_period,
        periods_s=periods,
        half_periods_s=half,
        half_period_ratio=half_ratio,
        first_snap_s=float(times[0]) if n >= 1 else None,
        first_snapback_s=float(times[1]) if n >= 2 else None,
        last_event_s=float(times[-1]) if n else None,
        stall_time_s=stall,
        max_temp_a_c=max_a,
        max_temp_b_c=max_b,
        mean_temp_a_c=float(np.mean(trace.temp_a_c[mask])),
        mean_temp_b_c=float(np.mean(trace.temp_b_c[mask])),
        max_struct_temp_c=float(np.max(struct)),
        beam_overheat_flag=bool(np.max(struct) > beam_tg_c),
        actuator_overheat_flag=bool(max(max_a, max_b) > actuator_tg_c),
        alternates=alternates,
    )


def loops_alternate(trace: Trace) -> bool:
    """Pullers alternate and the sampled loop currents are never both on."""
    pullers = [e.puller for e in trace.events]
    if any(a is b for a, b in zip(pullers, pullers[1:])):
        return False
    both = (trace.current_a_a > 0) & (trace.current_b_a > 0)
    return not bool(both.any())


def _indicator_at(trace: Trace, channel: np.ndarray, t: np.ndarray) -> np.ndarray:
    left = np.searchsorted(trace.time_s, t, side="right") - 1
    return (channel[np.clip(left, 0, len(trace) - 1)] > 0).astype(float)


def _plateau_centre(c: np.ndarray) -> float:
    """Middle of the run of maximal values, treating the lag axis as circular."""
    n = len(c)
    best = np.isclose(c, c.max(), rtol=0.0, atol=1e-9)
    if best.all():
        return 0.0
    # rotate so index 0 is not maximal, then the first run is contiguous
    start = int(np.flatnonzero(~best)[0])
    rolled = np.roll(best, -start)
    first = int(np.flatnonzero(rolled)[0])
    run_end = first
    while run_end + 1 < n and rolled[run_end + 1]:
        run_end += 1
    return ((first + run_end) / 2.0 + start) % n


def phase_shift(trace: Trace, dt_s: float | None = None,
                current_b: np.ndarray | None = None) -> float:
    """Lag of loop B's current square wave behind loop A's, as a fraction of a period.

    Each complete cycle (A-pull to the next A-pull) is sampled at ``dt_s``
    (default: the trace sample interval) and the circular cross-correlation
    of the two on/off indicators is maximised; the centre of the maximal
    plateau is taken as the lag. Cycle results are averaged. ``current_b``
    substitutes the loop-B channel (used to check the degenerate self-lag).
    """
    times = trace.event_times
    if len(times) < 4:
        raise InsufficientCycles("phase_shift needs at least two full cycles (4 snap events)")
    if dt_s is None:
        dt_s = float(trace.time_s[1] - trace.time_s[0]) if len(trace) > 1 else 1e-3
    chan_b = trace.current_b_a if current_b is None else current_b

    shifts = []
    for i in range(0, len(times) - 2, 2):
        t0, t1 = times[i], times[i + 2]
        n = max(int(round((t1 - t0) / dt_s)), 8)
        grid = t0 + (np.arange(n) + 0.5) * (t1 - t0) / n
        ia = _indicator_at(trace, trace.current_a_a, grid)
        ib = _indicator_at(trace, chan_b, grid)
        # c[m] = sum_j ia[j - m] * ib[j]
        fa, fb = np.fft.rfft(ia), np.fft.rfft(ib)
        c = np.fft.irfft(np.conj(fa) * fb, n)
        shifts.append(_plateau_centre(np.round(c, 6)) / n)
    return float(np.mean(shifts))
