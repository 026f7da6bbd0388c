"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures with 3, and failed verification checks with 1.
"""


class EndowriskError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(EndowriskError, ValueError):
    """Invalid configuration file, scenario, or constructor argument."""


class GridRangeError(EndowriskError, ValueError):
    """A query point falls outside the solved grid."""


class NumericalError(EndowriskError, RuntimeError):
    """Base class for solver failures."""


class PicardDivergenceError(NumericalError):
    """The per-step fixed-point iteration hit its cap above tolerance."""


class NonFiniteValueError(NumericalError):
    """A NaN or infinity appeared during a solve."""


class SolverQualityError(NumericalError):
    """A computed surface violates a property the scheme should preserve."""
