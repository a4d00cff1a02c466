import math
import warnings

import numpy as np
import pytest

from qbmzeno.errors import DrudeCutoffWarning, UnsupportedRegimeError
from qbmzeno.params import (
    TERMS_ENV,
    BathKind,
    BathSpec,
    OscillatorParams,
    SeriesControl,
    SeriesMode,
    check_underdamped,
    drude_coefficients,
    matsubara_frequency,
)


def test_natural_unit_widths():
    p = OscillatorParams()
    assert p.sigma_gs == pytest.approx(math.sqrt(0.5))
    assert p.momentum_gs == pytest.approx(math.sqrt(0.5))
    assert p.beta == pytest.approx(10.0)


def test_physical_units_scale():
    p = OscillatorParams(mass=2.0, frequency=3.0, temperature=0.5, hbar=0.1, boltzmann=4.0)
    assert p.beta == pytest.approx(0.5)
    assert p.sigma_gs == pytest.approx(math.sqrt(0.1 / 12.0))
    assert p.momentum_gs == pytest.approx(6.0 * p.sigma_gs)


@pytest.mark.parametrize("field", ["mass", "frequency", "temperature", "hbar", "boltzmann"])
@pytest.mark.parametrize("value", [0.0, -1.0, np.inf, np.nan])
def test_oscillator_rejects_non_positive(field, value):
    with pytest.raises(ValueError, match=field):
        OscillatorParams(**{field: value})


def test_bath_factories():
    assert BathSpec.ohmic(0.0).kind is BathKind.NONE
    assert BathSpec.ohmic(0.3).kind is BathKind.OHMIC
    d = BathSpec.drude(0.0, 50.0)
    assert d.kind is BathKind.DRUDE and d.gamma == 0.0
    assert BathSpec.free().gamma == 0.0


@pytest.mark.parametrize("kwargs", [
    dict(kind=BathKind.NONE, gamma=0.1),
    dict(kind=BathKind.OHMIC, gamma=0.0),
    dict(kind=BathKind.OHMIC, gamma=-0.1),
    dict(kind=BathKind.DRUDE, gamma=0.1),
    dict(kind=BathKind.DRUDE, gamma=0.1, drude_cutoff=-5.0),
])
def test_bath_validation(kwargs):
    with pytest.raises(ValueError):
        BathSpec(**kwargs)


def test_overdamped_rejected():
    p = OscillatorParams()
    assert check_underdamped(p, BathSpec.ohmic(1.0)) == pytest.approx(math.sqrt(0.75))
    with pytest.raises(UnsupportedRegimeError):
        check_underdamped(p, BathSpec.ohmic(2.0))
    with pytest.raises(UnsupportedRegimeError):
        check_underdamped(p, BathSpec.ohmic(5.0))


def test_matsubara_frequency():
    p = OscillatorParams(temperature=0.25)
    assert matsubara_frequency(1, p) == pytest.approx(0.5 * math.pi)
    np.testing.assert_allclose(matsubara_frequency(np.arange(1, 4), p),
                               0.5 * math.pi * np.arange(1, 4))
    with pytest.raises(ValueError):
        matsubara_frequency(0, p)


def test_series_control_defaults(monkeypatch):
    ctrl = SeriesControl.default()
    assert ctrl.mode is SeriesMode.ADAPTIVE
    assert ctrl.relative_tolerance == 1e-10 and ctrl.max_terms == 20000
    monkeypatch.setenv(TERMS_ENV, "300")
    assert SeriesControl.default() == SeriesControl.fixed(300)
    monkeypatch.setenv(TERMS_ENV, "many")
    with pytest.raises(ValueError, match=TERMS_ENV):
        SeriesControl.default()


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_series_control_rejects_bad_counts(bad):
    with pytest.raises(ValueError):
        SeriesControl.fixed(bad)


@pytest.mark.parametrize("gamma", [0.0, 0.05, 0.2, 0.5, 1.0, 1.5])
@pytest.mark.parametrize("wd", [20.0, 100.0, 1000.0])
def test_drude_coefficients_solve_their_relations(gamma, wd):
    p = OscillatorParams()
    bath = BathSpec.drude(gamma, wd)
    co = drude_coefficients(p, bath)
    assert max(co.residuals(p, bath)) <= 1e-12


def test_drude_coefficients_approach_ohmic_rates():
    p = OscillatorParams()
    co = drude_coefficients(p, BathSpec.drude(0.4, 1e5))
    assert co.alpha == pytest.approx(0.2, rel=1e-4)
    assert co.eta == pytest.approx(math.sqrt(1 - 0.04), rel=1e-4)
    assert co.delta == pytest.approx(1e5, rel=1e-5)


def test_drude_coefficients_without_friction():
    co = drude_coefficients(OscillatorParams(frequency=2.0), BathSpec.drude(0.0, 100.0))
    assert co.alpha == 0.0
    assert co.eta == pytest.approx(2.0)
    assert co.delta == pytest.approx(100.0)


def test_small_cutoff_warns():
    with pytest.warns(DrudeCutoffWarning):
        drude_coefficients(OscillatorParams(), BathSpec.drude(0.2, 5.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        drude_coefficients(OscillatorParams(), BathSpec.drude(0.2, 100.0))
