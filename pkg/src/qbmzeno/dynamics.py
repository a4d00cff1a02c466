"""Outcome statistics under repeated Gaussian measurements.

A selective measurement with outcome ``x0`` is followed by ``n``
nonselective measurements spaced by ``tau`` and a final selective one
after the elapsed time ``t_bar``.  The pair of recorded outcomes is a
zero-mean bivariate Gaussian; conditioning on ``x0`` gives a Gaussian in
the final outcome whose mean ignores the intermediate measurements and
whose variance picks up one A^2/sigma^2 term per measurement.

Everything here works for both observables: the correlator set decides
whether x means position or momentum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .correlators import CorrelatorSet, Observable
from .errors import (
    NumericalConsistencyError,
    OutlierOutcomeWarning,
    UnsupportedObservableError,
    UnsupportedRegimeError,
)
from .params import BathKind, OscillatorParams, check_underdamped

#: |x0| / zeta0 above which the first outcome is flagged as an outlier.
OUTLIER_ZSCORE = 6.0

_LOG_2PI = math.log(2.0 * math.pi)


def spacing_from_rate(mu: float, params: OscillatorParams) -> float:
    """Spacing tau for a monitoring rate ``mu`` given in units of omega0 / 2 pi."""
    if not mu > 0:
        raise ValueError("monitoring rate must be > 0")
    return 2.0 * math.pi / (mu * params.frequency)


@dataclass(frozen=True)
class MeasurementProtocol:
    """Gaussian-slit measurement sequence.

    ``spacing`` is the time between nonselective measurements; ``inf``
    means none are performed.  ``intermediate_count`` may be fixed, in
    which case every elapsed time must satisfy 0 <= t_bar - n tau <= tau;
    left as None, n is derived per elapsed time as floor(t_bar / tau).
    A final measurement landing exactly on a nonselective instant is
    accepted: the coincident term is A(0)^2 = 0.
    """

    slit_width: float
    observable: Observable = Observable.POSITION
    first_outcome: float = 0.0
    spacing: float = math.inf
    intermediate_count: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "observable", Observable(self.observable))
        if not (np.isfinite(self.slit_width) and self.slit_width > 0):
            raise ValueError(
                f"slit_width must be finite and > 0 (projective limit is excluded), "
                f"got {self.slit_width!r}")
        if not (self.spacing > 0):
            raise ValueError("spacing must be > 0")
        if not np.isfinite(self.first_outcome):
            raise ValueError("first_outcome must be finite")
        n = self.intermediate_count
        if n is not None:
            if int(n) != n or n < 0:
                raise ValueError("intermediate_count must be a non-negative integer")
            if n > 0 and not np.isfinite(self.spacing):
                raise ValueError("intermediate measurements need a finite spacing")

    @classmethod
    def figure_default(cls, params: OscillatorParams,
                       observable: Observable | str = Observable.POSITION,
                       first_outcome: float = 0.0, spacing: float = math.inf,
                       intermediate_count: int | None = None) -> "MeasurementProtocol":
        """Slit width 0.5 sigma_GS (position) or 0.5 M omega0 sigma_GS (momentum)."""
        observable = Observable(observable)
        scale = params.sigma_gs if observable is Observable.POSITION else params.momentum_gs
        return cls(0.5 * scale, observable, first_outcome, spacing, intermediate_count)

    @property
    def rate(self) -> float:
        """Measurements per unit time, 1 / tau (0 when unmonitored)."""
        return 0.0 if math.isinf(self.spacing) else 1.0 / self.spacing

    def counts(self, t_bar) -> np.ndarray:
        """Number of nonselective measurements preceding each elapsed time."""
        t = np.asarray(t_bar, dtype=float)
        if np.any(t < 0):
            raise ValueError("elapsed time must be >= 0")
        if self.intermediate_count is not None:
            n = self.intermediate_count
            if n > 0:
                rem = t - n * self.spacing
                tol = 1e-9 * self.spacing
                if np.any(rem < -tol) or np.any(rem > self.spacing + tol):
                    raise ValueError(
                        f"elapsed time incompatible with {n} measurements spaced by "
                        f"{self.spacing}: need 0 <= t_bar - n*tau <= tau")
            return np.full(t.shape, n, dtype=np.int64)
        if math.isinf(self.spacing):
            return np.zeros(t.shape, dtype=np.int64)
        return np.floor(t / self.spacing).astype(np.int64)


@dataclass(frozen=True)
class JointTwoPoint:
    """Covariance of the (first, final) outcome pair."""

    zeta0_sq: float
    zeta_sq: np.ndarray
    S: np.ndarray

    @property
    def covariance(self) -> np.ndarray:
        z, s = np.broadcast_arrays(self.zeta_sq, self.S)
        cov = np.empty(z.shape + (2, 2))
        cov[..., 0, 0] = self.zeta0_sq
        cov[..., 0, 1] = cov[..., 1, 0] = s
        cov[..., 1, 1] = z
        return cov

    @property
    def determinant(self):
        return self.zeta0_sq * self.zeta_sq - self.S**2


@dataclass(frozen=True)
class ConditionalGaussian:
    """Density of the final outcome given the first one."""

    mean: np.ndarray
    variance: np.ndarray

    def logpdf(self, x):
        return -0.5 * (_LOG_2PI + np.log(self.variance)) - (x - self.mean) ** 2 / (2 * self.variance)

    def pdf(self, x):
        return np.exp(self.logpdf(x))


def _out(values):
    return float(values) if np.ndim(values) == 0 else values


def _check_match(protocol: MeasurementProtocol, correlators: CorrelatorSet):
    if protocol.observable is not correlators.observable:
        raise ValueError(
            f"protocol measures {protocol.observable.value} but correlators are for "
            f"{correlators.observable.value}")


def backaction_sum(t_bar, counts, spacing, A) -> np.ndarray:
    """sum_{k=0}^{n} A(t_bar - k tau)^2 for each (t_bar, n) pair.

    All shifted times are evaluated in a single call to ``A``.
    """
    t = np.asarray(t_bar, dtype=float)
    n = np.broadcast_to(np.asarray(counts, dtype=np.int64), t.shape)
    flat_t, flat_n = t.ravel(), n.ravel()
    if flat_t.size == 0:
        return np.zeros(t.shape)
    lengths = flat_n + 1
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    k = np.arange(lengths.sum()) - np.repeat(starts, lengths)
    shifted = np.repeat(flat_t, lengths)
    if k.any():
        shifted = shifted - k * spacing
    a = np.asarray(A(shifted), dtype=float)
    return np.add.reduceat(a * a, starts).reshape(t.shape)


def zeta_sq(t_bar, protocol: MeasurementProtocol, correlators: CorrelatorSet):
    """Variance of the final outcome: zeta0^2 + sum_k A^2(t_bar - k tau) / sigma^2."""
    _check_match(protocol, correlators)
    sig2 = protocol.slit_width**2
    back = backaction_sum(t_bar, protocol.counts(t_bar), protocol.spacing, correlators.A)
    return _out(correlators.S0 + sig2 + back / sig2)


def joint_covariance(t_bar, protocol: MeasurementProtocol,
                     correlators: CorrelatorSet) -> JointTwoPoint:
    z = np.asarray(zeta_sq(t_bar, protocol, correlators))
    s = np.asarray(correlators.S(np.asarray(t_bar, dtype=float)))
    joint = JointTwoPoint(correlators.S0 + protocol.slit_width**2, z, s)
    if np.any(joint.determinant <= 0):
        raise NumericalConsistencyError(
            "non-positive covariance determinant; the correlators violate |S(t)| <= S(0)")
    return joint


def joint_two_point(x0, xF, t_bar, protocol: MeasurementProtocol,
                    correlators: CorrelatorSet):
    """Joint density of first outcome ``x0`` and final outcome ``xF``."""
    x0, xF, t = np.broadcast_arrays(np.asarray(x0, float), np.asarray(xF, float),
                                    np.asarray(t_bar, float))
    ut, inv = np.unique(t, return_inverse=True)
    joint = joint_covariance(ut, protocol, correlators)
    z0 = joint.zeta0_sq
    z, s, det = joint.zeta_sq[inv], joint.S[inv], joint.determinant[inv]
    z, s, det = z.reshape(t.shape), s.reshape(t.shape), det.reshape(t.shape)
    quad = (z * x0**2 - 2 * s * x0 * xF + z0 * xF**2) / (2 * det)
    logp = -_LOG_2PI - 0.5 * np.log(det) - quad
    return _out(np.exp(logp))


def marginal_first(x0, protocol: MeasurementProtocol, correlators: CorrelatorSet):
    """Density of the first outcome: N(0, S(0) + sigma^2)."""
    _check_match(protocol, correlators)
    z0 = correlators.S0 + protocol.slit_width**2
    x = np.asarray(x0, dtype=float)
    logp = -0.5 * (_LOG_2PI + math.log(z0)) - x**2 / (2 * z0)
    return _out(np.exp(logp))


def conditional_mean(t_bar, protocol: MeasurementProtocol, correlators: CorrelatorSet):
    """x0 S(t_bar) / (S(0) + sigma^2).  Depends on neither n nor tau."""
    _check_match(protocol, correlators)
    s = correlators.S(np.asarray(t_bar, dtype=float))
    return _out(protocol.first_outcome * s / (correlators.S0 + protocol.slit_width**2))


def _thermal_spread(S0, s, sig2):
    z0 = S0 + sig2
    return (z0 * z0 - s * s) / z0


def conditional_variance(t_bar, protocol: MeasurementProtocol, correlators: CorrelatorSet):
    """[(S0 + sigma^2)^2 - S^2(t_bar)] / (S0 + sigma^2) + sum_k A^2(t_bar - k tau) / sigma^2."""
    _check_match(protocol, correlators)
    t = np.asarray(t_bar, dtype=float)
    sig2 = protocol.slit_width**2
    s = correlators.S(t)
    back = backaction_sum(t, protocol.counts(t), protocol.spacing, correlators.A)
    return _out(_thermal_spread(correlators.S0, s, sig2) + back / sig2)


def conditional_gaussian(t_bar, protocol: MeasurementProtocol,
                         correlators: CorrelatorSet) -> ConditionalGaussian:
    z0 = correlators.S0 + protocol.slit_width**2
    if abs(protocol.first_outcome) > OUTLIER_ZSCORE * math.sqrt(z0):
        warnings.warn(
            f"first outcome {protocol.first_outcome:g} lies beyond {OUTLIER_ZSCORE:g} "
            "standard deviations of its marginal", OutlierOutcomeWarning, stacklevel=3)
    return ConditionalGaussian(
        np.asarray(conditional_mean(t_bar, protocol, correlators)),
        np.asarray(conditional_variance(t_bar, protocol, correlators)),
    )


def conditional_density(xF, t_bar, protocol: MeasurementProtocol,
                        correlators: CorrelatorSet):
    """Density of the final outcome ``xF`` after ``t_bar`` given the first outcome."""
    xF = np.asarray(xF, dtype=float)
    t = np.asarray(t_bar, dtype=float)
    ut, inv = np.unique(t, return_inverse=True)
    g = conditional_gaussian(ut, protocol, correlators)
    mean = g.mean[inv].reshape(t.shape)
    var = g.variance[inv].reshape(t.shape)
    out = ConditionalGaussian(mean, var).pdf(xF)
    return _out(out)


# ----------------------------------------------------------- analytic limits

def _ohmic_position_only(correlators: CorrelatorSet, what: str):
    if correlators.observable is not Observable.POSITION:
        raise UnsupportedObservableError(f"{what} has no closed form for momentum measurements")
    if correlators.bath.kind not in (BathKind.NONE, BathKind.OHMIC):
        raise UnsupportedRegimeError(f"{what} is derived for a strictly Ohmic bath")


def small_tau_variance(t_bar, protocol: MeasurementProtocol, correlators: CorrelatorSet,
                       require_aligned: bool = True):
    """Variance with the backaction sum replaced by (1/tau) int_0^t A^2.

    Valid for fast monitoring with the final measurement one spacing
    after the last nonselective one, t_bar = (n + 1) tau.  With
    ``require_aligned`` False the expression is evaluated at any t_bar.
    """
    _check_match(protocol, correlators)
    _ohmic_position_only(correlators, "small_tau_variance")
    tau = protocol.spacing
    if not np.isfinite(tau):
        raise ValueError("small-tau limit needs a finite spacing")
    t = np.asarray(t_bar, dtype=float)
    if require_aligned:
        steps = t / tau
        if np.any(np.abs(steps - np.rint(steps)) > 1e-9 * np.maximum(steps, 1)) or np.any(steps < 1 - 1e-9):
            raise ValueError("small_tau_variance assumes t_bar = (n+1) tau; "
                             "pass require_aligned=False to evaluate off the grid")
    p, g = correlators.params, correlators.bath.gamma
    wr = check_underdamped(p, correlators.bath)
    sig2 = protocol.slit_width**2
    coef = p.hbar**2 / (8 * tau * sig2 * p.mass**2 * wr**2)
    if g > 0:
        decay = np.exp(-g * t)
        brace = -np.expm1(-g * t) / g - (
            g + (2 * wr * np.sin(2 * wr * t) - g * np.cos(2 * wr * t)) * decay
        ) / (4 * wr**2 + g**2)
    else:
        brace = t - np.sin(2 * wr * t) / (2 * wr)
    s = correlators.S(t)
    return _out(_thermal_spread(correlators.S0, s, sig2) + coef * brace)


def frictionless_limit_variance(t_bar, protocol: MeasurementProtocol, params: OscillatorParams):
    """gamma -> 0 limit of the small-tau variance: linear-plus-oscillatory growth."""
    if protocol.observable is not Observable.POSITION:
        raise UnsupportedObservableError("frictionless limit is derived for position measurements")
    tau = protocol.spacing
    if not np.isfinite(tau):
        raise ValueError("frictionless limit needs a finite spacing")
    t = np.asarray(t_bar, dtype=float)
    w0, hbar, m = params.frequency, params.hbar, params.mass
    amp = hbar / (2 * m * w0) / math.tanh(0.5 * params.beta * hbar * w0)
    sig2 = protocol.slit_width**2
    spread = _thermal_spread(amp, amp * np.cos(w0 * t), sig2)
    growth = hbar**2 / (8 * tau * sig2 * m**2 * w0**3) * (w0 * t - 0.5 * np.sin(2 * w0 * t))
    return _out(spread + growth)


def asymptotic_variance(protocol: MeasurementProtocol, correlators: CorrelatorSet) -> float:
    """Stationary width S(0) + sigma^2 + hbar^2 / (2 tau sigma^2 M^2 gamma (4 wr^2 + gamma^2))."""
    _check_match(protocol, correlators)
    _ohmic_position_only(correlators, "asymptotic_variance")
    g = correlators.bath.gamma
    if g == 0:
        raise UnsupportedRegimeError(
            "no stationary width without friction: the variance grows linearly in time")
    tau = protocol.spacing
    if not np.isfinite(tau):
        raise ValueError("asymptotic limit needs a finite spacing")
    p = correlators.params
    wr = check_underdamped(p, correlators.bath)
    sig2 = protocol.slit_width**2
    return correlators.S0 + sig2 + p.hbar**2 / (2 * tau * sig2 * p.mass**2 * g * (4 * wr**2 + g**2))
