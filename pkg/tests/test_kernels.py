import math
import os
import subprocess
import sys

import numpy as np
import pytest

from qbmzeno import _kernels
from qbmzeno._accel import HAVE_NUMBA
from qbmzeno.correlators import drude_position_S, drude_momentum_S
from qbmzeno.params import BathSpec, OscillatorParams, SeriesControl, drude_coefficients

T_GRID = np.concatenate(([0.0, 1e-6, 1e-3], np.linspace(0.01, 30.0, 97)))


def _drude_args(gamma=0.2, wd=100.0, temperature=0.1):
    p = OscillatorParams(temperature=temperature)
    co = drude_coefficients(p, BathSpec.drude(gamma, wd))
    return 2 * math.pi * temperature, co.alpha, co.eta, co.delta, wd


@pytest.mark.parametrize("adaptive", [False, True])
@pytest.mark.parametrize("gamma", [0.05, 0.2, 1.0])
def test_ohmic_paths_agree(adaptive, gamma):
    nu1, a, e = 2 * math.pi * 0.1, 0.5 * gamma, math.sqrt(1 - 0.25 * gamma**2)
    s1, n1, c1 = _kernels.ohmic_sum_jit(T_GRID, nu1, a, e, 3000, 1e-10, adaptive)
    s2, n2, c2 = _kernels.ohmic_sum_numpy(T_GRID, nu1, a, e, 3000, 1e-10, adaptive)
    np.testing.assert_allclose(s1, s2, rtol=1e-12, atol=0)
    np.testing.assert_array_equal(n1, n2)
    np.testing.assert_array_equal(c1, c2)


@pytest.mark.parametrize("adaptive", [False, True])
@pytest.mark.parametrize("power", [1, 3])
@pytest.mark.parametrize("gamma", [0.0, 0.2, 1.0])
def test_drude_paths_agree(adaptive, power, gamma):
    nu1, a, e, d, wd = _drude_args(gamma)
    s1, n1, _ = _kernels.drude_sum_jit(T_GRID, nu1, a, e, d, wd, power, 3000, 1e-10, adaptive)
    s2, n2, _ = _kernels.drude_sum_numpy(T_GRID, nu1, a, e, d, wd, power, 3000, 1e-10, adaptive)
    np.testing.assert_allclose(s1, s2, rtol=1e-11, atol=1e-14 * np.abs(s2).max())
    if adaptive:
        # stopping indices may differ by one where a term sits on the threshold
        assert np.abs(n1 - n2).max() <= 1


def test_fixed_mode_uses_all_terms():
    _, used, conv = _kernels.ohmic_sum(T_GRID, 0.6, 0.1, 1.0, 77, 1e-10, False)
    assert np.all(used == 77) and conv.all()


def test_adaptive_stops_early_at_large_times():
    _, used, conv = _kernels.ohmic_sum(np.array([5.0]), 2 * math.pi * 0.1, 0.1, 1.0,
                                       20000, 1e-10, True)
    assert conv.all() and used[0] < 100


def test_adaptive_reports_cap():
    _, used, conv = _kernels.ohmic_sum(np.array([0.0]), 2 * math.pi * 0.1, 0.1, 1.0,
                                       50, 1e-14, True)
    assert not conv[0] and used[0] == 50


def test_terms_eventually_decrease():
    nu1, a, e, d, wd = _drude_args()
    for t in (0.0, 0.3, 4.0):
        n = np.arange(1, 5001) * nu1
        terms = np.abs(_kernels._drude_terms_np(n[None, :], np.array([[t]]), a, e, d, wd, 3)[0])
        tail = terms[200:]
        tail = tail[tail > 0]
        assert np.all(np.diff(tail) <= 0)


def _resonant_temperature(k, gamma=0.2, wd=100.0):
    # temperature at which nu_k hits the Drude pole delta to rounding
    d = drude_coefficients(OscillatorParams(), BathSpec.drude(gamma, wd)).delta
    return d / (2 * math.pi * k)


@pytest.mark.parametrize("jit", [True, False])
def test_resonant_term_is_finite_and_continuous(jit):
    fn = _kernels.drude_sum_jit if jit else _kernels.drude_sum_numpy
    t = np.array([0.0, 0.5, 3.0])
    vals = []
    for shift in (0.0, 1e-7, -1e-7):
        temp = _resonant_temperature(40) * (1 + shift)
        p = OscillatorParams(temperature=temp)
        co = drude_coefficients(p, BathSpec.drude(0.2, 100.0))
        s, _, _ = fn(t, 2 * math.pi * temp, co.alpha, co.eta, co.delta, 100.0, 3, 400, 1e-10, False)
        assert np.all(np.isfinite(s))
        vals.append(s)
    np.testing.assert_allclose(vals[0], vals[1], rtol=1e-5)
    np.testing.assert_allclose(vals[0], vals[2], rtol=1e-5)


def test_resonance_through_public_correlators():
    p = OscillatorParams(temperature=_resonant_temperature(12))
    bath = BathSpec.drude(0.2, 100.0)
    t = np.linspace(0, 5, 11)
    for fn in (drude_position_S, drude_momentum_S):
        assert np.all(np.isfinite(fn(t, p, bath, SeriesControl.fixed(500))))


def _use_jit_in_subprocess(flag):
    env = dict(os.environ)
    env.pop("QBMZENO_DISABLE_JIT", None)
    if flag is not None:
        env["QBMZENO_DISABLE_JIT"] = flag
    out = subprocess.run([sys.executable, "-c", "from qbmzeno import _accel; print(_accel.USE_JIT)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_disable_flag_selects_numpy_path():
    assert _use_jit_in_subprocess("1") == "False"
    assert _use_jit_in_subprocess("0") == str(HAVE_NUMBA)
    assert _use_jit_in_subprocess(None) == str(HAVE_NUMBA)
