import numpy as np
import pytest

from qbmzeno.correlators import Observable, make_correlators
from qbmzeno.dynamics import MeasurementProtocol
from qbmzeno.params import BathSpec, OscillatorParams, SeriesControl


@pytest.fixture
def params():
    return OscillatorParams(temperature=0.1)


@pytest.fixture
def fig_series():
    return SeriesControl.fixed(2000)


@pytest.fixture(autouse=True)
def _no_series_override(monkeypatch):
    # tests pin their own truncation; a stray shell setting must not leak in
    monkeypatch.delenv("QBMZENO_MATSUBARA_TERMS", raising=False)


def position_set(params, gamma, ctrl=None):
    return make_correlators(params, BathSpec.ohmic(gamma), Observable.POSITION,
                            ctrl or SeriesControl.fixed(2000))


def drude_set(params, gamma, observable="position", wd=100.0, ctrl=None):
    return make_correlators(params, BathSpec.drude(gamma, wd), observable,
                            ctrl or SeriesControl.fixed(2000))


def protocol(params, mu=None, x0=0.0, n=None, observable="position"):
    spacing = np.inf if mu is None else 2 * np.pi / (mu * params.frequency)
    return MeasurementProtocol.figure_default(params, observable, x0, spacing, n)


# one line per exit criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
