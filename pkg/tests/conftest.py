import math

import numpy as np
import pytest

from slowdecay import CantorModel, DecayProfile, Gauge, PowerGauge, build_model, calibrate_scaling

ALPHA = math.log(2) / math.log(3)


@pytest.fixture(scope="session")
def rlog_profile():
    return DecayProfile("reciprocal-log", 0.5)


@pytest.fixture(scope="session")
def rlog_gauge(rlog_profile):
    return Gauge(rlog_profile)


@pytest.fixture(scope="session")
def rlog_model(rlog_gauge):
    return build_model(rlog_gauge)


@pytest.fixture(scope="session")
def power_gauge():
    return Gauge(DecayProfile("power", 1.0))


@pytest.fixture(scope="session")
def power_model(power_gauge):
    return build_model(power_gauge)


@pytest.fixture(scope="session")
def classical_gauge():
    return PowerGauge(ALPHA)


@pytest.fixture(scope="session")
def middle_thirds(classical_gauge):
    """Middle-thirds set on the base arc [0, 1], 46 generations, calibrated."""
    raw = CantorModel(3.0 ** -np.arange(46), gauge=classical_gauge, base_center=0.5)
    c, report = calibrate_scaling(raw, classical_gauge, raw.depth)
    return CantorModel(raw.lengths, gauge=classical_gauge, base_center=0.5,
                       mass_scale=c, calibration=report)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
