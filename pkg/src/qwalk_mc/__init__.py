"""
Coined and continuous-time quantum walks on the integer line.

Exact unitary references, truncated-series one-step operators, and
Poisson-sampling Monte Carlo estimators of walk amplitudes.
"""

from .analysis import (
    ComparisonReport,
    ConvergenceStudy,
    amplitude_error,
    convergence_slope,
    convergence_study,
    probability_std_error,
    total_variation,
    within_std_errors,
)
from .core import (
    SYMMETRIC_INIT,
    HADAMARD,
    HADAMARD_SPEC,
    CoinedState,
    CoinSpec,
    PointMassInitialState,
    ScalarState,
    coin_from_euler,
    euler_decompose,
    point_mass_state,
)
from .errors import (
    ComplexityGuard,
    ConfigError,
    NonConvergence,
    NonUnitaryInput,
    NotADistribution,
    NotNormalized,
    QuantumWalkError,
    RateOutOfRange,
    TruncationInvalid,
    VarianceAdvisory,
    WindowOverflow,
)
from .montecarlo import (
    EstimateReport,
    RngStream,
    TrajectorySample,
    estimate_continuous,
    estimate_discrete,
    estimate_sigma2,
    poisson_cdf_table,
    sample_poisson,
    sample_trajectory,
)
from .reference import (
    LatticeGenerator,
    bessel_propagator,
    distribution,
    evolve_coined,
    evolve_continuous,
    step_coined,
)
from .series import (
    SeriesTruncation,
    nstep_bruteforce,
    sigma3_closed_form,
    step_general_series,
    step_sigma2_series,
    step_sigma3_series,
)

__version__ = "0.1.0"
