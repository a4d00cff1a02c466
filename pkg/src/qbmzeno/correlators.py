"""Equilibrium correlation functions of the damped oscillator.

``S`` is the symmetrized correlation 1/2 <q(t)q(0) + q(0)q(t)>, ``A`` the
antisymmetrized part -i/2 <[q(t), q(0)]>.  Both accept any real ``t``:
S is even and A is odd in time.  Scalars in, float out; arrays in,
arrays out.

Position correlators exist for the strictly Ohmic and the Drude bath;
momentum correlators only where they are finite at t = 0 (Drude cutoff,
or no friction at all).
"""
from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernels
from .errors import ConvergenceWarning, UnsupportedObservableError, UnsupportedRegimeError
from .params import (
    BathKind,
    BathSpec,
    OscillatorParams,
    SeriesControl,
    SeriesMode,
    check_underdamped,
    drude_coefficients,
    matsubara_frequency,
)


class Observable(str, enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


def _as_array(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _out(values, scalar):
    return float(values) if scalar else values


def _thermal_ratios(x, y):
    """sinh(x)/(cosh x - cos y) and sin(y)/(cosh x - cos y), overflow-safe."""
    if x < 40.0:
        den = 2.0 * math.sinh(0.5 * x) ** 2 + 2.0 * math.sin(0.5 * y) ** 2
        return math.sinh(x) / den, math.sin(y) / den
    sech = 2.0 * math.exp(-x) / (1.0 + math.exp(-2.0 * x))
    rel = 1.0 - math.cos(y) * sech
    return math.tanh(x) / rel, math.sin(y) * sech / rel


def _series(kind, t_abs, params, ctrl, **kw):
    ctrl = ctrl or SeriesControl.default()
    adaptive = ctrl.mode is SeriesMode.ADAPTIVE
    nu1 = matsubara_frequency(1, params)
    flat = t_abs.ravel()
    if kind == "ohmic":
        sums, used, conv = _kernels.ohmic_sum(
            flat, nu1, kw["a"], kw["e"], ctrl.max_terms, ctrl.relative_tolerance, adaptive)
    else:
        sums, used, conv = _kernels.drude_sum(
            flat, nu1, kw["a"], kw["e"], kw["d"], kw["wd"], kw["p"],
            ctrl.max_terms, ctrl.relative_tolerance, adaptive)
    if adaptive and not conv.all():
        warnings.warn(
            f"Matsubara series hit max_terms={ctrl.max_terms} before reaching "
            f"relative tolerance {ctrl.relative_tolerance:g} at {int((~conv).sum())} "
            f"of {conv.size} time points",
            ConvergenceWarning, stacklevel=3,
        )
    return sums.reshape(t_abs.shape)


def _require(bath, kinds, what):
    if bath.kind not in kinds:
        raise UnsupportedRegimeError(f"{what} requires bath kind in {[k.value for k in kinds]}, "
                                     f"got {bath.kind.value!r}")


# ---------------------------------------------------------------- Ohmic

def ohmic_position_S(t, params: OscillatorParams, bath: BathSpec,
                     ctrl: SeriesControl | None = None):
    """Symmetrized position correlation for a strictly Ohmic bath (length^2).

    Resonant part plus the Matsubara series truncated per ``ctrl``.  At
    gamma = 0 the series vanishes identically.
    """
    _require(bath, (BathKind.NONE, BathKind.OHMIC), "ohmic_position_S")
    wr = check_underdamped(params, bath)
    g, hbar, m, beta = bath.gamma, params.hbar, params.mass, params.beta
    arr, scalar = _as_array(t)
    ta = np.abs(arr)
    ra, rb = _thermal_ratios(beta * hbar * wr, 0.5 * beta * hbar * g)
    s = hbar / (2 * m * wr) * np.exp(-0.5 * g * ta) * (ra * np.cos(wr * ta) + rb * np.sin(wr * ta))
    if g > 0:
        s = s - 2 * g / (m * beta) * _series("ohmic", ta, params, ctrl, a=0.5 * g, e=wr)
    return _out(s, scalar)


def ohmic_position_A(t, params: OscillatorParams, bath: BathSpec):
    """Antisymmetrized position correlation, -hbar/(2 M wr) sin(wr t) e^{-gamma|t|/2}."""
    _require(bath, (BathKind.NONE, BathKind.OHMIC), "ohmic_position_A")
    wr = check_underdamped(params, bath)
    arr, scalar = _as_array(t)
    a = -params.hbar / (2 * params.mass * wr) * np.sin(wr * arr) * np.exp(-0.5 * bath.gamma * np.abs(arr))
    return _out(a, scalar)


def free_momentum_S(t, params: OscillatorParams):
    """(M hbar w0 / 2) coth(beta hbar w0 / 2) cos(w0 t): frictionless oscillator."""
    arr, scalar = _as_array(t)
    w0 = params.frequency
    x = 0.5 * params.beta * params.hbar * w0
    coth = 1.0 / math.tanh(x)
    return _out(0.5 * params.mass * params.hbar * w0 * coth * np.cos(w0 * arr), scalar)


def free_momentum_A(t, params: OscillatorParams):
    arr, scalar = _as_array(t)
    w0 = params.frequency
    return _out(-0.5 * params.mass * params.hbar * w0 * np.sin(w0 * arr), scalar)


# ---------------------------------------------------------------- Drude

@functools.lru_cache(maxsize=256)
def _drude_setup(params: OscillatorParams, bath: BathSpec):
    co = drude_coefficients(params, bath)
    a, e, d = co.alpha, co.eta, co.delta
    den = (a - d) ** 2 + e * e
    c1 = (d * d - a * a + e * e) / den
    c2 = 2 * a * e / den
    ra, rb = _thermal_ratios(params.beta * params.hbar * e, params.beta * params.hbar * a)
    # e^{-a t} (X cos(e t) + Y sin(e t)) is the resonant block of S
    x_cos = c1 * ra - c2 * rb
    y_sin = c1 * rb + c2 * ra
    return co, den, c1, c2, x_cos, y_sin


def drude_position_S(t, params: OscillatorParams, bath: BathSpec,
                     ctrl: SeriesControl | None = None):
    """Symmetrized position correlation with a Drude-regularized Ohmic bath."""
    _require(bath, (BathKind.DRUDE,), "drude_position_S")
    co, den, _, _, xc, ys = _drude_setup(params, bath)
    a, e, d = co.alpha, co.eta, co.delta
    hbar, m, beta, g = params.hbar, params.mass, params.beta, bath.gamma
    arr, scalar = _as_array(t)
    ta = np.abs(arr)
    s = hbar / (2 * m * e) * np.exp(-a * ta) * (xc * np.cos(e * ta) + ys * np.sin(e * ta))
    if g > 0:
        s = s + 2 * a / (m * beta) * np.exp(-d * ta) / (d * den)
        s = s - 2 * g / (m * beta) * _series(
            "drude", ta, params, ctrl, a=a, e=e, d=d, wd=bath.drude_cutoff, p=1)
    return _out(s, scalar)


def drude_position_A(t, params: OscillatorParams, bath: BathSpec):
    """Antisymmetrized position correlation with a Drude-regularized bath."""
    _require(bath, (BathKind.DRUDE,), "drude_position_A")
    co, _, c1, c2, _, _ = _drude_setup(params, bath)
    a, e, d = co.alpha, co.eta, co.delta
    arr, scalar = _as_array(t)
    ta = np.abs(arr)
    ea = np.exp(-a * ta)
    val = -params.hbar / (2 * params.mass * e) * (
        c2 * (np.exp(-d * ta) - np.cos(e * ta) * ea) + c1 * ea * np.sin(e * ta))
    return _out(np.sign(arr) * val, scalar)


def drude_momentum_S(t, params: OscillatorParams, bath: BathSpec,
                     ctrl: SeriesControl | None = None):
    """Symmetrized momentum correlation, -M^2 d^2/dt^2 of the Drude position S."""
    if bath.kind is BathKind.OHMIC:
        raise UnsupportedObservableError(
            "momentum correlators diverge at t=0 for a strictly Ohmic bath; use a Drude cutoff")
    _require(bath, (BathKind.DRUDE,), "drude_momentum_S")
    if bath.gamma == 0:
        return free_momentum_S(t, params)
    co, den, _, _, xc, ys = _drude_setup(params, bath)
    a, e, d = co.alpha, co.eta, co.delta
    hbar, m, beta, g = params.hbar, params.mass, params.beta, bath.gamma
    arr, scalar = _as_array(t)
    ta = np.abs(arr)
    ea = np.exp(-a * ta)
    cs, sn = np.cos(e * ta), np.sin(e * ta)
    s = hbar * m / (2 * e) * (e * e - a * a) * ea * (xc * cs + ys * sn)
    s = s + hbar * m * a * ea * (ys * cs - xc * sn)
    s = s - 2 * m * a / beta * d * np.exp(-d * ta) / den
    s = s + 2 * m * g / beta * _series(
        "drude", ta, params, ctrl, a=a, e=e, d=d, wd=bath.drude_cutoff, p=3)
    return _out(s, scalar)


def drude_momentum_A(t, params: OscillatorParams, bath: BathSpec):
    """Antisymmetrized momentum correlation, -M^2 d^2/dt^2 of the Drude position A."""
    if bath.kind is BathKind.OHMIC:
        raise UnsupportedObservableError(
            "momentum correlators diverge at t=0 for a strictly Ohmic bath; use a Drude cutoff")
    _require(bath, (BathKind.DRUDE,), "drude_momentum_A")
    if bath.gamma == 0:
        return free_momentum_A(t, params)
    co, _, c1, c2, _, _ = _drude_setup(params, bath)
    a, e, d = co.alpha, co.eta, co.delta
    arr, scalar = _as_array(t)
    ta = np.abs(arr)
    ea = np.exp(-a * ta)
    cs, sn = np.cos(e * ta), np.sin(e * ta)
    w2 = e * e - a * a
    val = params.hbar * params.mass / (2 * e) * (
        c2 * (d * d * np.exp(-d * ta) + w2 * ea * cs - 2 * a * e * ea * sn)
        - c1 * ea * (w2 * sn + 2 * a * e * cs))
    return _out(np.sign(arr) * val, scalar)


# ---------------------------------------------------------------- bundles

def position_S(t, params, bath, ctrl=None):
    if bath.kind is BathKind.DRUDE:
        return drude_position_S(t, params, bath, ctrl)
    return ohmic_position_S(t, params, bath, ctrl)


def position_A(t, params, bath):
    if bath.kind is BathKind.DRUDE:
        return drude_position_A(t, params, bath)
    return ohmic_position_A(t, params, bath)


def momentum_S(t, params, bath, ctrl=None):
    if bath.kind is BathKind.NONE:
        return free_momentum_S(t, params)
    return drude_momentum_S(t, params, bath, ctrl)


def momentum_A(t, params, bath):
    if bath.kind is BathKind.NONE:
        return free_momentum_A(t, params)
    return drude_momentum_A(t, params, bath)


def _zero(t):
    arr, scalar = _as_array(t)
    return _out(np.zeros_like(arr), scalar)


@dataclass(frozen=True)
class CorrelatorSet:
    """Matched pair (S, A) for one observable, bath and truncation.

    ``S0`` caches S(0).  Units are length^2 for position and momentum^2
    for momentum.
    """

    S: Callable
    A: Callable
    observable: Observable
    params: OscillatorParams
    bath: BathSpec
    ctrl: SeriesControl | None = None
    S0: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "S0", float(self.S(0.0)))

    def classical(self) -> "CorrelatorSet":
        """Same S with the commutator part switched off (A = 0)."""
        return replace(self, A=_zero)


def make_correlators(params: OscillatorParams, bath: BathSpec,
                     observable: Observable | str = Observable.POSITION,
                     ctrl: SeriesControl | None = None) -> CorrelatorSet:
    """Build the correlator pair for ``observable`` under ``bath``.

    Raises UnsupportedObservableError for momentum with a strictly Ohmic
    bath at nonzero friction.
    """
    observable = Observable(observable)
    ctrl = ctrl or SeriesControl.default()
    if observable is Observable.POSITION:
        check_underdamped(params, bath)
        s = functools.partial(position_S, params=params, bath=bath, ctrl=ctrl)
        a = functools.partial(position_A, params=params, bath=bath)
    else:
        if bath.kind is BathKind.OHMIC:
            raise UnsupportedObservableError(
                "momentum observable needs a Drude cutoff when gamma > 0")
        check_underdamped(params, bath)
        s = functools.partial(momentum_S, params=params, bath=bath, ctrl=ctrl)
        a = functools.partial(momentum_A, params=params, bath=bath)
    return CorrelatorSet(S=s, A=a, observable=observable, params=params, bath=bath, ctrl=ctrl)
