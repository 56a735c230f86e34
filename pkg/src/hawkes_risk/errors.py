"""Exception types raised across the package."""


class HawkesRiskError(Exception):
    """Base class for all package errors."""


class InvalidParameter(HawkesRiskError):
    """A parameter violates its domain (sign, ordering, range)."""


class InvalidOrder(HawkesRiskError):
    """Two-time quantity called with s > t."""


class IntegralDivergence(HawkesRiskError):
    """A kernel integral is divergent or ill-defined."""


class UnstableKernel(HawkesRiskError):
    """Kernel L1 norm >= 1; moment/limit computations are undefined."""


class GridMismatch(HawkesRiskError):
    """Grid functions built on different time grids were combined."""


class NotSamplable(HawkesRiskError):
    """The claim distribution carries moments only and cannot be sampled."""


class PathBudgetExceeded(HawkesRiskError):
    """Expected or realized event count exceeds the per-path budget."""


class InsufficientSamples(HawkesRiskError):
    """Monte Carlo sample count below the required minimum."""


class AsymptoticInapplicable(HawkesRiskError):
    """The large-u asymptotic prefactor is undefined for these inputs."""


class NoConvergence(HawkesRiskError):
    """An iterative estimate failed to converge within its limits."""
