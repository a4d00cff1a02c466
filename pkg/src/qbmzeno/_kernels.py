"""Matsubara-series kernels.

Every series here has the form ``sum_{n>=1} term(nu_n, t)`` with
``nu_n = n * nu1``.  Each kernel exists twice: an explicit loop compiled
with numba, and a block-vectorized numpy version.  :data:`USE_JIT` picks
the one exported through :func:`ohmic_sum` and :func:`drude_sum`.
The compiled loops tabulate the t-independent factors once and build
exp(-nu_n t) by repeated multiplication with exp(-nu1 t); the rounding
drift of that recurrence is about n machine epsilons.

The pole polynomial ((x-a)^2+e^2)((x+a)^2+e^2) equals
(x^2+a^2+e^2)^2 - 4a^2x^2 without the cancellation of the expanded form.
"""
import math

import numpy as np

from ._accel import USE_JIT, njit

# Relative distance |nu - delta| / delta below which the Drude term is
# evaluated through its removable-singularity limit.
RESONANCE_RTOL = 1e-8

_BLOCK = 256
_T_CHUNK = 512


def _pole_poly(x, a, e):
    return ((x - a) ** 2 + e * e) * ((x + a) ** 2 + e * e)


def _pole_poly_prime(x, a, e):
    # d/dx [(x^2 + a^2 + e^2)^2 - 4 a^2 x^2]
    return 4.0 * x * (x * x + a * a + e * e) - 8.0 * a * a * x


def _g(x, t, a, e, p):
    return x**p * np.exp(-x * t) / _pole_poly(x, a, e)


def _g_prime(x, t, a, e, p):
    pp = _pole_poly(x, a, e)
    ex = np.exp(-x * t)
    return ex * ((p * x ** (p - 1) - t * x**p) / pp - x**p * _pole_poly_prime(x, a, e) / (pp * pp))


# numba versions of the scalar helpers
_pole_poly_nb = njit(cache=True, nogil=True)(_pole_poly)
_pole_poly_prime_nb = njit(cache=True, nogil=True)(_pole_poly_prime)


@njit(cache=True, nogil=True)
def _g_nb(x, t, a, e, p):
    return x**p * math.exp(-x * t) / _pole_poly_nb(x, a, e)


@njit(cache=True, nogil=True)
def _g_prime_nb(x, t, a, e, p):
    pp = _pole_poly_nb(x, a, e)
    ex = math.exp(-x * t)
    return ex * ((p * x ** (p - 1) - t * x**p) / pp - x**p * _pole_poly_prime_nb(x, a, e) / (pp * pp))


@njit(cache=True, nogil=True)
def _ohmic_sum_nb(t, nu1, a, e, max_terms, rtol, adaptive):
    coef = np.empty(max_terms)
    for k in range(max_terms):
        nu = (k + 1) * nu1
        coef[k] = nu / _pole_poly_nb(nu, a, e)
    out = np.empty(t.size)
    used = np.empty(t.size, np.int64)
    conv = np.empty(t.size, np.bool_)
    for i in range(t.size):
        q = math.exp(-nu1 * t[i])
        ex = 1.0
        s = 0.0
        n = 0
        ok = not adaptive
        for n in range(1, max_terms + 1):
            ex *= q
            term = coef[n - 1] * ex
            s += term
            if adaptive and abs(term) <= rtol * abs(s):
                ok = True
                break
        out[i] = s
        used[i] = n
        conv[i] = ok
    return out, used, conv


@njit(cache=True, nogil=True)
def _drude_sum_nb(t, nu1, a, e, d, wd, p, max_terms, rtol, adaptive):
    # term_n = coef_n exp(-nu_n t) - g(d) weight_n, except at resonance
    wd2 = wd * wd
    coef = np.empty(max_terms)
    weight = np.empty(max_terms)
    resonant = np.zeros(max_terms, np.bool_)
    for k in range(max_terms):
        nu = (k + 1) * nu1
        if abs(nu - d) < RESONANCE_RTOL * d:
            resonant[k] = True
            coef[k] = 0.0
            weight[k] = 0.0
        else:
            weight[k] = wd2 / ((d - nu) * (d + nu))
            coef[k] = nu**p / _pole_poly_nb(nu, a, e) * weight[k]
    out = np.empty(t.size)
    used = np.empty(t.size, np.int64)
    conv = np.empty(t.size, np.bool_)
    for i in range(t.size):
        ti = t[i]
        g_d = _g_nb(d, ti, a, e, p)
        q = math.exp(-nu1 * ti)
        ex = 1.0
        s = 0.0
        n = 0
        ok = not adaptive
        for n in range(1, max_terms + 1):
            ex *= q
            if resonant[n - 1]:
                term = -_g_prime_nb(d, ti, a, e, p) * wd2 / (d + n * nu1)
            else:
                term = coef[n - 1] * ex - g_d * weight[n - 1]
            s += term
            if adaptive and abs(term) <= rtol * abs(s):
                ok = True
                break
        out[i] = s
        used[i] = n
        conv[i] = ok
    return out, used, conv


def _ohmic_terms_np(nu, t, a, e, **_):
    return nu * np.exp(-nu * t) / _pole_poly(nu, a, e)


def _drude_terms_np(nu, t, a, e, d, wd, p):
    wd2 = wd * wd
    g_d = _g(d, t, a, e, p)
    near = np.abs(nu - d) < RESONANCE_RTOL * d
    with np.errstate(divide="ignore", invalid="ignore"):
        regular = (_g(nu, t, a, e, p) - g_d) * wd2 / ((d - nu) * (d + nu))
    if not near.any():
        return regular
    limit = -_g_prime(d, t, a, e, p) * wd2 / (d + nu)
    return np.where(near, limit, regular)


def _series_np(terms, t, nu1, max_terms, rtol, adaptive, **kw):
    out = np.empty(t.size)
    used = np.empty(t.size, np.int64)
    conv = np.empty(t.size, bool)
    for lo in range(0, t.size, _T_CHUNK):
        tc = t[lo:lo + _T_CHUNK, None]
        m = tc.shape[0]
        s = np.zeros(m)
        n_used = np.full(m, max_terms, np.int64)
        done = np.zeros(m, bool)
        for n0 in range(1, max_terms + 1, _BLOCK):
            n = np.arange(n0, min(n0 + _BLOCK, max_terms + 1))
            active = ~done
            if not active.any():
                break
            block = terms(n[None, :] * nu1, tc[active], **kw)
            if not adaptive:
                s[active] += block.sum(axis=1)
                continue
            partial = s[active, None] + np.cumsum(block, axis=1)
            hit = np.abs(block) <= rtol * np.abs(partial)
            first = np.where(hit.any(axis=1), hit.argmax(axis=1), -1)
            rows = np.flatnonzero(active)
            stop = first >= 0
            s[rows[stop]] = partial[stop, first[stop]]
            n_used[rows[stop]] = n[first[stop]]
            done[rows[stop]] = True
            s[rows[~stop]] = partial[~stop, -1]
        out[lo:lo + m] = s
        used[lo:lo + m] = n_used
        conv[lo:lo + m] = done if adaptive else True
    return out, used, conv


def ohmic_sum_numpy(t, nu1, a, e, max_terms, rtol, adaptive):
    return _series_np(_ohmic_terms_np, t, nu1, max_terms, rtol, adaptive, a=a, e=e)


def drude_sum_numpy(t, nu1, a, e, d, wd, p, max_terms, rtol, adaptive):
    return _series_np(_drude_terms_np, t, nu1, max_terms, rtol, adaptive,
                      a=a, e=e, d=d, wd=wd, p=p)


def ohmic_sum_jit(t, nu1, a, e, max_terms, rtol, adaptive):
    return _ohmic_sum_nb(t, float(nu1), float(a), float(e), int(max_terms),
                         float(rtol), bool(adaptive))


def drude_sum_jit(t, nu1, a, e, d, wd, p, max_terms, rtol, adaptive):
    return _drude_sum_nb(t, float(nu1), float(a), float(e), float(d), float(wd),
                         int(p), int(max_terms), float(rtol), bool(adaptive))


def ohmic_sum(t, nu1, a, e, max_terms, rtol, adaptive):
    """sum_n nu_n exp(-nu_n t) / P(nu_n) for each entry of ``t`` (t >= 0).

    Returns ``(sums, terms_used, converged)``.
    """
    t = np.ascontiguousarray(t, dtype=float)
    fn = ohmic_sum_jit if USE_JIT else ohmic_sum_numpy
    return fn(t, nu1, a, e, max_terms, rtol, adaptive)


def drude_sum(t, nu1, a, e, d, wd, p, max_terms, rtol, adaptive):
    """sum_n [g(nu_n) - g(d)] wd^2 / (d^2 - nu_n^2), g(x) = x^p exp(-x t) / P(x).

    ``p`` is 1 for the position series and 3 for the momentum series.
    Returns ``(sums, terms_used, converged)``.
    """
    t = np.ascontiguousarray(t, dtype=float)
    fn = drude_sum_jit if USE_JIT else drude_sum_numpy
    return fn(t, nu1, a, e, d, wd, p, max_terms, rtol, adaptive)
