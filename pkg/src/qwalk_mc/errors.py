"""Exception and warning types raised by the walk toolkit."""


class QuantumWalkError(Exception):
    """Base class for every error raised by this package."""


class NonUnitaryInput(QuantumWalkError, ValueError):
    pass


class NotNormalized(QuantumWalkError, ValueError):
    pass


class WindowOverflow(QuantumWalkError):
    """A lattice window is too small for the requested evolution."""


class NonConvergence(QuantumWalkError):
    pass


class TruncationInvalid(QuantumWalkError, ValueError):
    pass


class ComplexityGuard(QuantumWalkError, ValueError):
    pass


class RateOutOfRange(QuantumWalkError, ValueError):
    pass


class NotADistribution(QuantumWalkError, ValueError):
    pass


class ConfigError(QuantumWalkError, ValueError):
    pass


class VarianceAdvisory(UserWarning):
    """The exponential weight makes the estimator noisy for this sample count."""
