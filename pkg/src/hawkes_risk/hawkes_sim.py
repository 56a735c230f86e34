"""Exact simulation of Hawkes arrivals, compound claims, and risk paths.

Thinning is exact for the conditional intensity

    lambda(t) = mu + sum_{tau_i < t} h(t - tau_i).

Exponential kernels use the Markov excitation state (O(1) work per
candidate); other decreasing kernels use full-history thinning with the
majorant recomputed at every candidate. Every path owns a counter-based
random stream, so batches are reproducible regardless of worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import GridMismatch, InvalidParameter, InsufficientSamples, PathBudgetExceeded
from .grids import GridFunction, TimeGrid
from .kernels import (ClaimDistribution, ExcitingKernel, ExponentialKernel,
                      ZeroKernel, require_stable)

#: default cap on events per path, guarding near-critical kernels
DEFAULT_PATH_BUDGET = 10_000_000

#: majorant refresh interval for the exponential fast path, in units of 1/beta
_REMAJORIZE = 0.1


@dataclass(frozen=True, eq=False)
class HawkesPath:
    """Event times of one realization on (0, T]."""

    event_times: np.ndarray
    horizon: float
    baseline: float

    def __post_init__(self):
        times = np.asarray(self.event_times, dtype=float)
        times.flags.writeable = False
        object.__setattr__(self, "event_times", times)

    def __len__(self):
        return self.event_times.size

    def counts_at(self, times) -> np.ndarray:
        """N(t) = #events in (0, t] for each query time."""
        return np.searchsorted(self.event_times, np.asarray(times), side="right")

    def intensity_at(self, kernel: ExcitingKernel, times) -> np.ndarray:
        """lambda(t) reconstructed from the stored history (left limits)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.full(times.shape, self.baseline)
        for i, t in enumerate(times):
            past = self.event_times[self.event_times < t]
            if past.size:
                out[i] += float(np.sum(kernel(t - past)))
        return out

    def excitation_at(self, kernel: ExponentialKernel, times) -> np.ndarray:
        """Z(t) = sum of alpha*exp(-beta (t - tau_i)) over past events."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.zeros(times.shape)
        for i, t in enumerate(times):
            past = self.event_times[self.event_times < t]
            out[i] = float(np.sum(kernel(t - past)))
        return out


@dataclass(frozen=True, eq=False)
class CompoundPath:
    """Events plus i.i.d. claim sizes; X_t is their running sum."""

    events: HawkesPath
    claim_sizes: np.ndarray

    def __post_init__(self):
        sizes = np.asarray(self.claim_sizes, dtype=float)
        if sizes.shape != self.events.event_times.shape:
            raise InvalidParameter("one claim size per event required")
        sizes.flags.writeable = False
        object.__setattr__(self, "claim_sizes", sizes)

    def aggregate_at(self, times) -> np.ndarray:
        """X(t) = sum of claims arrived in (0, t]."""
        cum = np.concatenate(([0.0], np.cumsum(self.claim_sizes)))
        return cum[self.events.counts_at(times)]


@dataclass(frozen=True)
class RiskPathConfig:
    """Scaled risk process parameters; claim sizes carry the 1/sqrt(mu) factor."""

    u: float
    c: float
    mu: float
    claims: ClaimDistribution
    kernel: ExcitingKernel
    horizon: float

    def __post_init__(self):
        if self.u < 0 or self.c <= 0 or self.mu <= 0 or self.horizon <= 0:
            raise InvalidParameter("require u >= 0, c > 0, mu > 0, horizon > 0")
        require_stable(self.kernel)


def _check_budget(kernel: ExcitingKernel, mu: float, T: float, max_events: int) -> None:
    norm = require_stable(kernel).norm
    expected = mu * T / (1.0 - norm)
    if expected > max_events:
        raise PathBudgetExceeded(
            f"expected event count {expected:.3g} exceeds budget {max_events}")


def _simulate_poisson(mu, T, gen, max_events):
    n = gen.poisson(mu * T)
    if n > max_events:
        raise PathBudgetExceeded(f"realized event count {n} exceeds budget {max_events}")
    return np.sort(gen.uniform(0.0, T, n))


def _simulate_markov(alpha, beta, mu, T, gen, max_events):
    dmax = _REMAJORIZE / beta
    z = 0.0
    t = 0.0
    events = []
    while True:
        lam_bar = mu + z
        w = gen.exponential() / lam_bar
        if w > dmax:
            t += dmax
            if t >= T:
                break
            z *= math.exp(-beta * dmax)
            continue
        t += w
        if t > T:
            break
        z *= math.exp(-beta * w)
        if gen.random() * lam_bar <= mu + z:
            events.append(t)
            z += alpha
            if len(events) > max_events:
                raise PathBudgetExceeded(f"event count exceeded budget {max_events}")
    return np.array(events)


def _simulate_generic(kernel, mu, T, gen, max_events):
    if not kernel.is_decreasing():
        raise InvalidParameter("generic thinning requires a decreasing kernel")
    t = 0.0
    events: list[float] = []
    while True:
        past = np.array(events)
        lam_bar = mu + float(np.sum(kernel(t - past))) if events else mu
        w = gen.exponential() / lam_bar
        t += w
        if t > T:
            break
        lam_t = mu + float(np.sum(kernel(t - np.array(events)))) if events else mu
        if gen.random() * lam_bar <= lam_t:
            events.append(t)
            if len(events) > max_events:
                raise PathBudgetExceeded(f"event count exceeded budget {max_events}")
    return np.array(events)


def simulate_hawkes(kernel: ExcitingKernel, mu: float, T: float, seed: int,
                    path_index: int = 0, method: str = "auto",
                    max_events: int = DEFAULT_PATH_BUDGET) -> HawkesPath:
    """One exact Hawkes path on (0, T] from stream (seed, path_index).

    method: "auto" picks the Markov fast path for exponential kernels and
    full-history thinning otherwise; "thinning" forces the generic route
    (used to cross-check the fast path).
    """
    if T <= 0 or mu <= 0:
        raise InvalidParameter("require T > 0 and mu > 0")
    _check_budget(kernel, mu, T, max_events)
    gen = _rng.path_stream(seed, path_index, _rng.EVENTS)

    if method == "auto":
        if isinstance(kernel, ZeroKernel):
            method = "poisson"
        elif isinstance(kernel, ExponentialKernel):
            method = "markov" if kernel.alpha > 0 else "poisson"
        else:
            method = "thinning"

    if method == "poisson":
        times = _simulate_poisson(mu, T, gen, max_events)
    elif method == "markov":
        if not isinstance(kernel, ExponentialKernel):
            raise InvalidParameter("markov method requires an exponential kernel")
        times = _simulate_markov(kernel.alpha, kernel.beta, mu, T, gen, max_events)
    elif method == "thinning":
        times = _simulate_generic(kernel, mu, T, gen, max_events)
    else:
        raise InvalidParameter(f"unknown simulation method: {method!r}")
    return HawkesPath(times, horizon=T, baseline=mu)


def simulate_compound(kernel: ExcitingKernel, mu: float, T: float,
                      claims: ClaimDistribution, seed: int, path_index: int = 0,
                      method: str = "auto",
                      max_events: int = DEFAULT_PATH_BUDGET) -> CompoundPath:
    """Events plus claim sizes; claims use a stream independent of the events."""
    path = simulate_hawkes(kernel, mu, T, seed, path_index, method, max_events)
    claims_gen = _rng.path_stream(seed, path_index, _rng.CLAIMS)
    sizes = claims.sample(claims_gen, len(path))
    return CompoundPath(path, sizes)


def simulate_risk_path(cfg: RiskPathConfig, grid: TimeGrid, seed: int,
                       path_index: int = 0,
                       g1_cum: GridFunction | None = None) -> GridFunction:
    """Wealth U(t_k) = u + c t_k + sqrt(mu) m1 int_0^{t_k} g1 - X(t_k)/sqrt(mu).

    The premium term is the compensator of the scaled claims (the unique
    centering under which U converges to u + ct - G(t)). Callers looping
    over many paths should precompute g1_cum once.
    """
    if abs(grid.t_max - cfg.horizon) > 1e-12:
        raise GridMismatch(f"grid horizon {grid.t_max} != config horizon {cfg.horizon}")
    if g1_cum is None:
        from .volterra import solve_g1

        g1_cum = solve_g1(cfg.kernel, grid).cumulative()
    elif g1_cum.grid != grid:
        raise GridMismatch("g1_cum computed on a different grid")
    path = simulate_compound(cfg.kernel, cfg.mu, cfg.horizon, cfg.claims, seed, path_index)
    nodes = grid.nodes
    m1 = cfg.claims.moments[0]
    root_mu = math.sqrt(cfg.mu)
    values = (cfg.u + cfg.c * nodes + root_mu * m1 * g1_cum.values
              - path.aggregate_at(nodes) / root_mu)
    return GridFunction(grid, values)


def simulate_scaled_centered(kernel: ExcitingKernel, claims: ClaimDistribution,
                             mu: float, grid: TimeGrid, n_paths: int, seed: int,
                             g1_cum: GridFunction | None = None) -> np.ndarray:
    """Paths of (X_t - mu m1 int_0^t g1)/sqrt(mu) sampled at the grid nodes.

    Returns an (n_paths, n_points) array; the FCLT says rows converge
    weakly to the Gaussian limit as mu grows.
    """
    if g1_cum is None:
        from .volterra import solve_g1

        g1_cum = solve_g1(kernel, grid).cumulative()
    nodes = grid.nodes
    m1 = claims.moments[0]
    center = mu * m1 * g1_cum.values
    root_mu = math.sqrt(mu)
    out = np.empty((n_paths, nodes.size))
    for i in range(n_paths):
        path = simulate_compound(kernel, mu, grid.t_max, claims, seed, i)
        out[i] = (path.aggregate_at(nodes) - center) / root_mu
    return out


def empirical_cov(paths, grid: TimeGrid | None = None):
    """Unbiased sample covariance of paths at the grid nodes (t=0 excluded).

    `paths` is either a sequence of GridFunction on a shared grid or an
    (n_paths, n_points) array with `grid` supplied.
    """
    from .gaussian import CovarianceModel
    from .grids import require_same_grid

    if isinstance(paths, np.ndarray):
        if grid is None:
            raise InvalidParameter("grid required with an array of path values")
        values = paths
    else:
        paths = list(paths)
        if not paths:
            raise InsufficientSamples("no paths supplied")
        grid = require_same_grid(*paths)
        values = np.stack([p.values for p in paths])
    if values.shape[0] < 2:
        raise InsufficientSamples("need at least 2 paths for a covariance estimate")
    if values.shape[1] != grid.n_points:
        raise GridMismatch("path values do not match the grid")
    matrix = np.cov(values[:, 1:], rowvar=False, ddof=1)
    matrix = np.atleast_2d(matrix)
    return CovarianceModel(grid=grid, matrix=matrix, source="mc-estimated",
                           n_paths=values.shape[0])
