"""Report figures rendered with matplotlib (Agg backend).

SVG output is made byte-reproducible by fixing the id hash salt and
dropping the creation date from the metadata.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .integrator import Trace  # noqa: E402

MAX_POINTS = 20000

_RC = {
    "svg.hashsalt": "foldosc",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
}
_METADATA = {"Date": None, "Creator": "foldosc"}

COLOR_A = "#c0392b"
COLOR_B = "#2471a3"


def _save(fig, path: Path) -> None:
    fig.savefig(path, format=Path(path).suffix.lstrip(".") or "svg", metadata=_METADATA)
    plt.close(fig)


def plot_trace(trace: Trace, path: str | Path, title: str | None = None) -> None:
    """Temperatures (top) and loop currents (bottom) against time."""
    step = max(1, int(np.ceil(len(trace) / MAX_POINTS)))
    t = trace.time_s[::step]
    with plt.rc_context(_RC):
        fig, (ax_t, ax_i) = plt.subplots(2, 1, figsize=(7.0, 5.0), sharex=True)
        ax_t.plot(t, trace.temp_a_c[::step], color=COLOR_A, label="actuator A")
        ax_t.plot(t, trace.temp_b_c[::step], color=COLOR_B, label="actuator B")
        ax_t.set_ylabel("temperature (°C)")
        ax_t.legend(loc="upper left", frameon=False)
        ax_i.step(t, trace.current_a_a[::step], where="post", color=COLOR_A, label="loop A")
        ax_i.step(t, trace.current_b_a[::step], where="post", color=COLOR_B,
                  linestyle="--", label="loop B")
        ax_i.set_ylabel("current (A)")
        ax_i.set_xlabel("time (s)")
        ax_i.legend(loc="upper right", frameon=False)
        for ev in trace.events:
            ax_t.axvline(ev.time_s, color="0.85", linewidth=0.6, zorder=0)
        if title:
            ax_t.set_title(title)
        fig.tight_layout()
        _save(fig, Path(path))


def plot_sweep(values, periods, param: str, path: str | Path) -> None:
    """Mean period against the swept parameter; non-oscillating points are omitted."""
    x = np.asarray(values, dtype=float)
    y = np.array([np.nan if p is None else p for p in periods], dtype=float)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.plot(x, y, marker="o", color="k", markersize=3)
        ax.set_xlabel(param)
        ax.set_ylabel("mean period (s)")
        fig.tight_layout()
        _save(fig, Path(path))


def plot_history(losses, best, path: str | Path) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        idx = np.arange(len(losses))
        finite = np.isfinite(losses)
        ax.semilogy(idx[finite], np.asarray(losses)[finite], ".", color="0.6", markersize=2)
        ax.semilogy(idx, best, color="k")
        ax.set_xlabel("evaluation")
        ax.set_ylabel("loss")
        fig.tight_layout()
        _save(fig, Path(path))
