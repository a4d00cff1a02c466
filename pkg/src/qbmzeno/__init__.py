"""Damped quantum oscillator under repeated Gaussian measurements."""
from .correlators import CorrelatorSet, Observable, make_correlators
from .dynamics import (
    ConditionalGaussian,
    JointTwoPoint,
    MeasurementProtocol,
    asymptotic_variance,
    conditional_density,
    conditional_gaussian,
    conditional_mean,
    conditional_variance,
    frictionless_limit_variance,
    joint_covariance,
    joint_two_point,
    marginal_first,
    small_tau_variance,
    spacing_from_rate,
    zeta_sq,
)
from .errors import (
    ConfigError,
    ConvergenceWarning,
    NumericalConsistencyError,
    QBMError,
    UnsupportedObservableError,
    UnsupportedRegimeError,
)
from .params import (
    BathKind,
    BathSpec,
    OscillatorParams,
    SeriesControl,
    SeriesMode,
    drude_coefficients,
)

__version__ = "0.1.0"
