"""Exciting kernels h(.) and claim-size distributions.

Kernels are the nonnegative integrable weight an arrival adds to the
future intensity; all downstream moment and limit computations require
the subcriticality condition ||h||_L1 < 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import IntegralDivergence, InvalidParameter, NotSamplable

#: non-strict tolerance for the decreasing-tail check on tabulated kernels
MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class ZeroKernel:
    """h identically zero: arrivals form a Poisson process."""

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def l1_norm(self) -> float:
        return 0.0

    def first_moment(self) -> float:
        """Integral of t*h(t) over [0, inf)."""
        return 0.0

    def is_decreasing(self) -> bool:
        return True


@dataclass(frozen=True)
class ExponentialKernel:
    """h(t) = alpha * exp(-beta * t), the Markovian special case."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0:
            raise InvalidParameter(f"alpha must be >= 0, got {self.alpha}")
        if self.beta <= 0:
            raise InvalidParameter(f"beta must be > 0, got {self.beta}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.alpha * np.exp(-self.beta * t)

    def l1_norm(self) -> float:
        return self.alpha / self.beta

    def first_moment(self) -> float:
        return self.alpha / self.beta**2

    def is_decreasing(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class TabulatedKernel:
    """h sampled on a time grid; h = 0 beyond the last grid point.

    The zero-tail assumption keeps the L1 norm finite for any table;
    the decreasing check below is what bounds the truncation error.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise InvalidParameter("grid and values must be 1-d arrays of equal length >= 2")
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise InvalidParameter("grid must start at 0 and be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise IntegralDivergence("kernel table contains non-finite values")
        if np.any(values < 0):
            raise InvalidParameter("kernel values must be nonnegative")
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.grid, self.values, left=self.values[0], right=0.0)

    def l1_norm(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def first_moment(self) -> float:
        return float(np.trapezoid(self.grid * self.values, self.grid))

    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= MONOTONE_TOL))


ExcitingKernel = Union[ZeroKernel, ExponentialKernel, TabulatedKernel]


def l1_norm(kernel: ExcitingKernel) -> float:
    """Integral of h over [0, inf); alpha/beta exactly for exponentials."""
    return kernel.l1_norm()


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    norm: float
    #: for exponential kernels, whether alpha < beta (closed forms valid); else None
    closed_forms_valid: bool | None = None

    def __str__(self):
        return "stable" if self.stable else f"unstable(norm={self.norm:g})"


def stability_check(kernel: ExcitingKernel) -> StabilityReport:
    """Stable iff ||h||_L1 < 1 (strictly)."""
    norm = kernel.l1_norm()
    valid = None
    if isinstance(kernel, ExponentialKernel):
        valid = kernel.alpha < kernel.beta
    return StabilityReport(stable=norm < 1.0, norm=norm, closed_forms_valid=valid)


def require_stable(kernel: ExcitingKernel) -> StabilityReport:
    from .errors import UnstableKernel

    report = stability_check(kernel)
    if not report.stable:
        raise UnstableKernel(f"kernel L1 norm {report.norm:g} >= 1")
    return report


# --------------------------------------------------------------------------
# claim-size distributions


@dataclass(frozen=True)
class ExponentialClaims:
    """Claim sizes Y ~ Exponential(rate): m1 = 1/rate, m2 = 2/rate^2."""

    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise InvalidParameter(f"rate must be > 0, got {self.rate}")

    @property
    def moments(self) -> tuple[float, float]:
        return 1.0 / self.rate, 2.0 / self.rate**2

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.exponential(scale=1.0 / self.rate, size=n)


@dataclass(frozen=True)
class GammaClaims:
    """Claim sizes Y ~ Gamma(shape, rate): m1 = a/b, m2 = a(a+1)/b^2."""

    shape: float
    rate: float

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise InvalidParameter("shape and rate must be > 0")

    @property
    def moments(self) -> tuple[float, float]:
        a, b = self.shape, self.rate
        return a / b, a * (a + 1.0) / b**2

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.gamma(self.shape, scale=1.0 / self.rate, size=n)


@dataclass(frozen=True)
class MomentsOnlyClaims:
    """First two moments without a sampler; supports analytics only."""

    m1: float
    m2: float

    def __post_init__(self):
        if self.m1 <= 0:
            raise InvalidParameter(f"m1 must be > 0, got {self.m1}")
        if self.m2 < self.m1**2:
            raise InvalidParameter(f"m2 = {self.m2} < m1^2 = {self.m1**2} violates Jensen")

    @property
    def moments(self) -> tuple[float, float]:
        return self.m1, self.m2

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotSamplable("claim distribution specified by moments only")


ClaimDistribution = Union[ExponentialClaims, GammaClaims, MomentsOnlyClaims]


def claim_moments(claims: ClaimDistribution) -> tuple[float, float]:
    """(E[Y], E[Y^2]) for the claim-size law."""
    return claims.moments
