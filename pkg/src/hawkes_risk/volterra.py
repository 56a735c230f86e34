"""Renewal-type Volterra solver for the count-moment densities.

Solves on a uniform grid, by forward time stepping of the trapezoidal
convolution quadrature,

    g1(t) = 1 + int_0^t h(t-s) g1(s) ds,
    g2(t) = g1(t)^2 + int_0^t h(t-s) g2(s) ds,

whose cumulative integrals scaled by the baseline intensity give the
mean and variance of the arrival count.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameter
from .grids import GridFunction, TimeGrid, require_same_grid
from .kernels import ClaimDistribution, ExcitingKernel, require_stable

DEFAULT_STEP = 1e-3


def _solve_renewal(kernel: ExcitingKernel, grid: TimeGrid, forcing: np.ndarray) -> np.ndarray:
    """March g(t_k) = forcing(t_k) + (h * g)(t_k) with the current node implicit."""
    dt = grid.step
    hv = kernel(grid.nodes)
    if dt * hv[0] >= 2.0:
        raise InvalidParameter(f"step*h(0) = {dt * hv[0]:g} >= 2; refine the grid")
    denom = 1.0 - 0.5 * dt * hv[0]
    n = grid.n_points
    g = np.empty(n)
    g[0] = forcing[0]
    for k in range(1, n):
        conv = dt * (0.5 * hv[k] * g[0] + np.dot(hv[1:k][::-1], g[1:k]))
        g[k] = (forcing[k] + conv) / denom
    return g


def solve_g1(kernel: ExcitingKernel, grid: TimeGrid) -> GridFunction:
    """Per-unit-baseline mean density g1; requires a stable kernel.

    g1(0) = 1, g1 is nondecreasing and bounded by 1/(1 - ||h||_L1).
    """
    require_stable(kernel)
    forcing = np.ones(grid.n_points)
    return GridFunction(grid, _solve_renewal(kernel, grid, forcing))


def solve_g2(kernel: ExcitingKernel, g1: GridFunction) -> GridFunction:
    """Variance density g2 on the grid of a previously solved g1."""
    require_stable(kernel)
    return GridFunction(g1.grid, _solve_renewal(kernel, g1.grid, g1.values**2))


def count_moments(mu: float, g1: GridFunction, g2: GridFunction) -> tuple[GridFunction, GridFunction]:
    """(E[N_t], Var[N_t]) for baseline intensity mu, as grid functions."""
    if mu <= 0:
        raise InvalidParameter(f"baseline intensity must be > 0, got {mu}")
    grid = require_same_grid(g1, g2)
    mean = GridFunction(grid, mu * g1.cumulative().values)
    variance = GridFunction(grid, mu * g2.cumulative().values)
    return mean, variance


def sigma_function(claims: ClaimDistribution, g1: GridFunction, g2: GridFunction) -> GridFunction:
    """Standard deviation function of the Gaussian limit,

    sigma(t) = sqrt(m1^2 int_0^t g2 + (m2 - m1^2) int_0^t g1).
    """
    grid = require_same_grid(g1, g2)
    m1, m2 = claims.moments
    var = m1**2 * g2.cumulative().values + (m2 - m1**2) * g1.cumulative().values
    return GridFunction(grid, np.sqrt(var))
