import math

import pytest

from foldosc.config import SimConfig
from foldosc.model import ActuatorParams, BeamModel, CircuitModel, Environment


def make_actuator(**kw):
    base = dict(resistance_ohm=10.0, thermal_capacitance_j_per_k=0.2,
                conv_conductance_w_per_k=0.03, activation_temp_c=35.0,
                contraction_coeff_m_per_k=1e-4, max_stroke_m=5e-3, drift_per_cycle_m=0.0)
    base.update(kw)
    return ActuatorParams(**base)


def make_config(actuator=None, beam=None, circuit=None, environment=None, **kw):
    act = actuator or make_actuator()
    kw.setdefault("horizon_s", 30.0)
    return SimConfig(
        actuator_a=act,
        actuator_b=act,
        beam=beam or BeamModel(2e-3, 2e-3),
        circuit=circuit or CircuitModel(0.55),
        environment=environment or Environment.forced_air(3.0),
        **kw,
    )


def drift_budget_config(pulls_a, pulls_b, drift=1e-3, max_stroke=5e-3, **kw):
    """Config whose stroke budget allows exactly ``pulls_a``/``pulls_b`` pulls per side.

    Per-side pulls are floor((max_stroke - crit) / drift) + 1, so the critical
    stroke is placed half a drift increment inside each bracket.
    """
    crit = [max_stroke - (n - 1) * drift - 0.5 * drift for n in (pulls_a, pulls_b)]
    assert all(c > 0 for c in crit)
    act = make_actuator(drift_per_cycle_m=drift, max_stroke_m=max_stroke,
                        contraction_coeff_m_per_k=3e-4)
    return make_config(act, beam=BeamModel(*crit), **kw)


@pytest.fixture
def symmetric_config():
    return make_config(make_actuator(), horizon_s=20.0)


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


__all__ = ["make_actuator", "make_config", "drift_budget_config", "rel", "math", "record_criterion"]


# --- acceptance report -------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
