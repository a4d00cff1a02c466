"""Parameter records for the damped oscillator, its bath and series control.

All records are frozen dataclasses; they are safe to share between threads.
The defaults fix natural units hbar = M = omega0 = k_B = 1.
"""
from __future__ import annotations

import enum
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DrudeCutoffWarning, UnsupportedRegimeError

#: Environment variable overriding the default Matsubara truncation.
TERMS_ENV = "QBMZENO_MATSUBARA_TERMS"


@dataclass(frozen=True)
class OscillatorParams:
    """Central oscillator and reservoir temperature.

    Parameters
    ----------
    mass : float
        Oscillator mass M.
    frequency : float
        Bare angular frequency omega0 (rad / time).
    temperature : float
        Temperature T in energy units divided by ``boltzmann``.
    hbar : float
        Reduced Planck constant.
    boltzmann : float
        Boltzmann constant k_B.
    """

    mass: float = 1.0
    frequency: float = 1.0
    temperature: float = 0.1
    hbar: float = 1.0
    boltzmann: float = 1.0

    def __post_init__(self):
        for name in ("mass", "frequency", "temperature", "hbar", "boltzmann"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")

    @property
    def beta(self) -> float:
        """Inverse temperature 1/(k_B T)."""
        return 1.0 / (self.boltzmann * self.temperature)

    @property
    def sigma_gs(self) -> float:
        """Ground-state position width (2 M omega0 / hbar)^(-1/2)."""
        return math.sqrt(self.hbar / (2.0 * self.mass * self.frequency))

    @property
    def momentum_gs(self) -> float:
        """Ground-state momentum width M omega0 sigma_gs."""
        return self.mass * self.frequency * self.sigma_gs


class BathKind(str, enum.Enum):
    NONE = "none"
    OHMIC = "ohmic"
    DRUDE = "drude"


@dataclass(frozen=True)
class BathSpec:
    """Coupling spectrum of the reservoir.

    ``kind`` NONE requires ``gamma == 0``; OHMIC requires ``gamma > 0``
    (use :meth:`ohmic`, which maps zero friction to NONE).  DRUDE accepts
    ``gamma >= 0`` and needs a finite ``drude_cutoff``.
    """

    kind: BathKind = BathKind.NONE
    gamma: float = 0.0
    drude_cutoff: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BathKind(self.kind))
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        if self.kind is BathKind.NONE and self.gamma != 0:
            raise ValueError("bath kind 'none' requires gamma == 0")
        if self.kind is BathKind.OHMIC and self.gamma == 0:
            raise ValueError("ohmic bath requires gamma > 0; use BathSpec.ohmic(0.0)")
        if self.kind is BathKind.DRUDE:
            if self.drude_cutoff is None or not (
                np.isfinite(self.drude_cutoff) and self.drude_cutoff > 0
            ):
                raise ValueError("drude bath requires a finite positive drude_cutoff")

    @classmethod
    def free(cls) -> "BathSpec":
        return cls(BathKind.NONE, 0.0)

    @classmethod
    def ohmic(cls, gamma: float) -> "BathSpec":
        if gamma == 0:
            return cls.free()
        return cls(BathKind.OHMIC, float(gamma))

    @classmethod
    def drude(cls, gamma: float, drude_cutoff: float) -> "BathSpec":
        return cls(BathKind.DRUDE, float(gamma), float(drude_cutoff))


def check_underdamped(params: OscillatorParams, bath: BathSpec) -> float:
    """Return omega_r = sqrt(omega0^2 - gamma^2/4); raise outside gamma < 2 omega0."""
    if bath.gamma >= 2.0 * params.frequency:
        raise UnsupportedRegimeError(
            f"gamma={bath.gamma} >= 2*omega0={2 * params.frequency}: "
            "overdamped regime is not supported"
        )
    return math.sqrt(params.frequency**2 - 0.25 * bath.gamma**2)


class SeriesMode(str, enum.Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class SeriesControl:
    """Truncation rule for the Matsubara series.

    FIXED sums exactly ``max_terms`` terms.  ADAPTIVE stops at the first
    term whose magnitude is below ``relative_tolerance`` times the running
    partial sum, or after ``max_terms`` terms (with a ConvergenceWarning).
    """

    max_terms: int = 20000
    relative_tolerance: float = 1e-10
    mode: SeriesMode = SeriesMode.ADAPTIVE

    def __post_init__(self):
        object.__setattr__(self, "mode", SeriesMode(self.mode))
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError(f"max_terms must be an integer >= 1, got {self.max_terms!r}")
        object.__setattr__(self, "max_terms", int(self.max_terms))
        if not (self.relative_tolerance > 0):
            raise ValueError("relative_tolerance must be > 0")

    @classmethod
    def fixed(cls, max_terms: int) -> "SeriesControl":
        return cls(max_terms=max_terms, mode=SeriesMode.FIXED)

    @classmethod
    def adaptive(cls, relative_tolerance: float = 1e-10, max_terms: int = 20000):
        return cls(max_terms=max_terms, relative_tolerance=relative_tolerance,
                   mode=SeriesMode.ADAPTIVE)

    @classmethod
    def default(cls) -> "SeriesControl":
        """Library default, or FIXED(N) when $QBMZENO_MATSUBARA_TERMS is set."""
        raw = os.environ.get(TERMS_ENV, "").strip()
        if raw:
            try:
                n = int(raw)
            except ValueError:
                raise ValueError(f"{TERMS_ENV} must be an integer, got {raw!r}") from None
            return cls.fixed(n)
        return cls.adaptive()


# Truncations used for the published figures.
SURFACE_SERIES = SeriesControl.fixed(150)
VARIANCE_SERIES = SeriesControl.fixed(2000)


def matsubara_frequency(n, params: OscillatorParams):
    """Bosonic Matsubara frequency nu_n = 2 pi n k_B T / hbar (n >= 1)."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 1):
        raise ValueError("Matsubara index must be >= 1")
    nu = 2.0 * np.pi * n_arr * params.boltzmann * params.temperature / params.hbar
    return float(nu) if nu.ndim == 0 else nu


@dataclass(frozen=True)
class DrudeCoefficients:
    """Decay rates of the Drude-regularized response.

    ``alpha`` and ``eta`` are the real and imaginary parts of the complex
    pole pair, ``delta`` the real pole near the cutoff.
    """

    alpha: float
    eta: float
    delta: float

    def residuals(self, params: OscillatorParams, bath: BathSpec):
        """Relative residuals of the three defining relations."""
        a, e, d = self.alpha, self.eta, self.delta
        w0sq, wd, g = params.frequency**2, bath.drude_cutoff, bath.gamma
        lhs = (2 * a + d, a * a + e * e, a * a + e * e + 2 * a * d)
        rhs = (wd, w0sq * wd / d, w0sq + g * wd)
        return tuple(abs(l_ - r) / abs(r) for l_, r in zip(lhs, rhs))


def drude_coefficients(params: OscillatorParams, bath: BathSpec) -> DrudeCoefficients:
    """Solve 2a + d = wD, a^2 + e^2 = w0^2 wD / d, a^2 + e^2 + 2ad = w0^2 + g wD.

    Eliminating d and e leaves a cubic in a, solved by Newton iteration
    from the first-order small-g/wD estimate.
    """
    if bath.kind is not BathKind.DRUDE:
        raise UnsupportedRegimeError("drude_coefficients requires a Drude bath")
    w0, wd, g = params.frequency, bath.drude_cutoff, bath.gamma
    if wd < 10.0 * max(g, w0):
        warnings.warn(
            f"drude_cutoff={wd} is not >> max(gamma, omega0); "
            "the Drude expressions lose their small-cutoff-correction meaning",
            DrudeCutoffWarning, stacklevel=2,
        )
    w0sq = w0 * w0
    rhs3 = w0sq + g * wd

    def f(a):
        d = wd - 2 * a
        return w0sq * wd + 2 * a * d * d - rhs3 * d

    def fprime(a):
        d = wd - 2 * a
        return 2 * d * d - 8 * a * d + 2 * rhs3

    a = 0.5 * g * wd**2 / (wd**2 + w0sq)
    scale = w0sq * wd + rhs3 * wd
    for _ in range(100):
        step = f(a) / fprime(a)
        a -= step
        if abs(step) <= 4e-16 * max(abs(a), 1e-300) or f(a) == 0.0:
            break
    else:
        raise UnsupportedRegimeError("Drude coefficient iteration did not converge")
    if abs(f(a)) > 1e-12 * scale:
        raise UnsupportedRegimeError("Drude coefficient iteration did not converge")
    d = wd - 2 * a
    e_sq = w0sq * wd / d - a * a
    if g > 0 and not (a > 0 and d > 0 and e_sq > 0):
        raise UnsupportedRegimeError(
            f"no underdamped Drude root for gamma={g}, omega_D={wd}"
        )
    if e_sq <= 0 or d <= 0:
        raise UnsupportedRegimeError("Drude bath outside the underdamped domain")
    return DrudeCoefficients(alpha=a, eta=math.sqrt(e_sq), delta=d)
