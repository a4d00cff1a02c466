"""Independent numerical routes used to check the closed forms.

Not part of the public surface; imported by the test-suite only.

The multi-time characteristic function is assembled from one numerical
slit integral per measurement and the Gaussian thermal expectation
exp(-1/2 sum k_l k_m S(t_l - t_m)).  The two-point density is then
recovered by a brute-force trapezoidal Fourier inversion, so nothing on
this path uses the covariance formulas it is compared against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .correlators import CorrelatorSet
from .dynamics import MeasurementProtocol
from .errors import CoverageError, OracleError, StepSizeError

# Slit integrals: absolute/relative tolerances of the adaptive quadrature.
QUAD_EPSABS = 1e-15
QUAD_EPSREL = 1e-13
# Half-width of the slit integration window in units of zeta0.
QUAD_HALF_WIDTH = 10.0
# The k-box is cut where the characteristic function drops below exp(-KBOX_LOG).
KBOX_LOG = 40.0


@dataclass(frozen=True)
class CharFunctionInput:
    """Wavenumbers k_0..k_F at strictly increasing measurement times t_0..t_F."""

    wavenumbers: np.ndarray
    times: np.ndarray
    slit_width: float
    correlators: CorrelatorSet

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.wavenumbers, dtype=float))
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        if k.ndim != 1 or k.shape != t.shape or k.size < 1:
            raise ValueError("wavenumbers and times must be 1-d of equal non-zero length")
        if not np.all(np.isfinite(k)) or not np.all(np.isfinite(t)):
            raise ValueError("wavenumbers and times must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("measurement times must be strictly increasing")
        if not self.slit_width > 0:
            raise ValueError("slit_width must be > 0")
        object.__setattr__(self, "wavenumbers", k)
        object.__setattr__(self, "times", t)


def _shift_matrix(times, A):
    # M[j, l] = A(t_j - t_l) for l > j, zero elsewhere
    dt = times[:, None] - times[None, :]
    upper = np.triu(np.ones_like(dt, dtype=bool), k=1)
    out = np.zeros_like(dt)
    out[upper] = A(dt[upper])
    return out


def commutator_shifts(inp: CharFunctionInput) -> np.ndarray:
    """s_j = sum_{l>j} k_l <[q(t_j), q(t_l)]> / 2i = sum_{l>j} k_l A(t_j - t_l); s_F = 0."""
    return _shift_matrix(inp.times, inp.correlators.A) @ inp.wavenumbers


def slit_integrals(k, s, sigma, half_width):
    """int dx f(s - x) f(-s - x) e^{i k x} for arrays of (k, s) by adaptive quadrature."""
    k = np.asarray(k, dtype=float).ravel()
    s = np.asarray(s, dtype=float).ravel()
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma**2)

    def integrand(x):
        # f(s-x) f(-s-x) with f(y) = (2 pi sigma^2)^{-1/4} exp(-y^2 / 4 sigma^2)
        w = norm * np.exp(-((s - x) ** 2 + (s + x) ** 2) / (4.0 * sigma**2))
        return np.concatenate((w * np.cos(k * x), w * np.sin(k * x)))

    res, err = integrate.quad_vec(integrand, -half_width, half_width,
                                  epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, norm="max",
                                  limit=20000)
    if not np.isfinite(err) or err > 1e3 * QUAD_EPSABS + 1e-10 * np.abs(res).max():
        raise OracleError(f"slit quadrature did not converge (error estimate {err:.3g})")
    n = k.size
    return res[:n] + 1j * res[n:]


def _thermal_log(kmat, times, S):
    dt = times[:, None] - times[None, :]
    smat = np.asarray(S(dt), dtype=float)
    return -0.5 * np.einsum("pi,ij,pj->p", kmat, smat, kmat)


def characteristic_function_batch(kmat, times, slit_width, correlators: CorrelatorSet,
                                  half_width=None) -> np.ndarray:
    """phi for every row of ``kmat`` (shape (npoints, F+1))."""
    kmat = np.atleast_2d(np.asarray(kmat, dtype=float))
    times = np.asarray(times, dtype=float)
    if half_width is None:
        half_width = QUAD_HALF_WIDTH * math.sqrt(correlators.S0 + slit_width**2)
    shifts = kmat @ _shift_matrix(times, correlators.A).T
    phi = np.exp(_thermal_log(kmat, times, correlators.S)).astype(complex)
    for j in range(times.size):
        phi *= slit_integrals(kmat[:, j], shifts[:, j], slit_width, half_width)
    return phi


def characteristic_function(inp: CharFunctionInput) -> complex:
    """(F+1)-point characteristic function of the measurement outcomes."""
    return complex(characteristic_function_batch(
        inp.wavenumbers[None, :], inp.times, inp.slit_width, inp.correlators)[0])


def protocol_times(t_bar: float, protocol: MeasurementProtocol) -> np.ndarray:
    """Measurement instants 0, tau, ..., n tau, t_bar with n from the protocol.

    Coincident instants are merged, so t_bar = 0 gives the single time 0.
    """
    n = int(protocol.counts(t_bar))
    times = [0.0] + [j * protocol.spacing for j in range(1, n + 1)]
    if t_bar <= times[-1]:
        # final measurement coincides with the last nonselective one
        times = times[:-1]
    return np.array(times + [float(t_bar)])


def _probe_covariance(phi2):
    # Second moments from the log of a Gaussian characteristic function.
    kappa = 1.0
    for _ in range(60):
        vals = phi2(np.array([[kappa, 0.0], [0.0, kappa], [kappa, kappa]]))
        if np.all(np.abs(vals) > 1e-200):
            break
        kappa *= 0.5
    la = -2.0 * np.log(np.abs(vals)) / kappa**2
    c00, c11 = la[0], la[1]
    c01 = 0.5 * (la[2] - c00 - c11)
    return np.array([[c00, c01], [c01, c11]])


def two_point_density_oracle(x0, xF, t_bar: float, protocol: MeasurementProtocol,
                             correlators: CorrelatorSet, pad: float = KBOX_LOG):
    """Joint density on the grid ``x0`` x ``xF`` by Fourier-inverting phi.

    Intermediate wavenumbers are set to zero, which integrates out the
    nonselective outcomes.  Returns an array of shape (len(x0), len(xF)).
    """
    x0 = np.asarray(x0, dtype=float)
    xF = np.asarray(xF, dtype=float)
    times = protocol_times(t_bar, protocol)
    if times.size < 2:
        raise ValueError("first and final measurement coincide; the oracle needs t_bar > 0")
    m = times.size
    sigma = protocol.slit_width

    def phi2(kk):
        kmat = np.zeros((kk.shape[0], m))
        kmat[:, 0] = kk[:, 0]
        kmat[:, -1] = kk[:, 1]
        return characteristic_function_batch(kmat, times, sigma, correlators)

    cov = _probe_covariance(phi2)
    inv = np.linalg.inv(cov)
    axes = []
    for j, x in enumerate((x0, xF)):
        kmax = math.sqrt(2.0 * pad * inv[j, j])
        period = 2.0 * (np.abs(x).max() + math.sqrt(2.0 * pad * cov[j, j]))
        dk = 2.0 * math.pi / period
        half = int(math.ceil(kmax / dk))
        axes.append(dk * np.arange(-half, half + 1))
    k0, kF = axes
    K0, KF = np.meshgrid(k0, kF, indexing="ij")
    phi = phi2(np.column_stack((K0.ravel(), KF.ravel()))).reshape(K0.shape)
    e0 = np.exp(-1j * np.outer(x0, k0))
    eF = np.exp(-1j * np.outer(kF, xF))
    dens = (e0 @ phi @ eF).real * (k0[1] - k0[0]) * (kF[1] - kF[0]) / (4.0 * math.pi**2)
    return dens


def quadrature_marginalize(density, x, std=None, min_coverage: float = 8.0) -> float:
    """Trapezoidal integral of a density sampled on ``x``.

    The grid must span at least ``min_coverage`` standard deviations
    (estimated from the sampled moments unless ``std`` is given);
    otherwise CoverageError carries the integral anyway.
    """
    density = np.asarray(density, dtype=float)
    x = np.asarray(x, dtype=float)
    total = float(np.trapezoid(density, x, axis=-1)) if density.ndim == 1 else np.trapezoid(density, x, axis=-1)
    if std is None:
        mass = np.trapezoid(density, x, axis=-1)
        mean = np.trapezoid(density * x, x, axis=-1) / mass
        var = np.trapezoid(density * x**2, x, axis=-1) / mass - mean**2
        std = np.sqrt(np.maximum(var, 0.0))
    span = (x[-1] - x[0]) / np.asarray(std)
    if np.any(span < min_coverage):
        raise CoverageError(
            f"grid spans {np.min(span):.3g} standard deviations, need {min_coverage:g}",
            integral=total)
    return total


def finite_difference_second_derivative(f, t, h: float, levels: int = 2):
    """Central second difference of ``f`` at ``t`` with Richardson extrapolation.

    ``levels`` halvings of ``h`` are combined, cancelling error terms up to
    O(h^(2 levels)).
    """
    t = np.asarray(t, dtype=float)
    floor = 1e-5 * max(1.0, float(np.max(np.abs(t))) if t.size else 1.0)
    if h / 2**levels < floor:
        raise StepSizeError(f"step {h:g} halved {levels} times falls below roundoff floor {floor:g}")
    f0 = np.asarray(f(t), dtype=float)

    def second(step):
        return (np.asarray(f(t + step)) - 2.0 * f0 + np.asarray(f(t - step))) / step**2

    table = [second(h / 2**i) for i in range(levels + 1)]
    for order in range(1, levels + 1):
        fac = 4.0**order
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
    out = table[0]
    return float(out) if np.ndim(out) == 0 else out
