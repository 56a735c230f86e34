"""Covariance model of the Gaussian limit G, path sampling, FCLT checks.

The model holds Cov(G(t_i), G(t_j)) over the grid nodes excluding t = 0
(G(0) = 0 is degenerate and is re-attached as an exact zero when
sampling). Exponential kernels get analytic entries; other kernels get
a Prop-1 diagonal with Monte Carlo off-diagonals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import analytic_exp, rng as _rng, volterra
from .errors import InsufficientSamples, InvalidParameter
from .grids import TimeGrid
from .kernels import (ClaimDistribution, ExcitingKernel, ExponentialKernel, ZeroKernel,
                      require_stable)

#: shrinkage weight toward the diagonal for MC-estimated covariances
MC_SHRINKAGE = 0.01

#: jitter ladder: eps * max(diag) added to the diagonal until Cholesky succeeds
JITTER_START = 1e-12
JITTER_MAX = 1e-6


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Symmetric PSD covariance of G over grid.nodes[1:]."""

    grid: TimeGrid
    matrix: np.ndarray
    source: str  # "analytic-exponential" | "mc-estimated"
    n_paths: int | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        n = self.grid.n_points - 1
        if mat.shape != (n, n):
            raise InvalidParameter(f"matrix shape {mat.shape} != ({n}, {n})")
        scale = max(float(np.max(np.abs(mat))), 1.0)
        if np.max(np.abs(mat - mat.T)) > 1e-12 * scale:
            raise InvalidParameter("covariance matrix is not symmetric to 1e-12")
        mat = 0.5 * (mat + mat.T)
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def times(self) -> np.ndarray:
        return self.grid.nodes[1:]

    def restricted(self, indices: np.ndarray, grid: TimeGrid) -> "CovarianceModel":
        """Model restricted to a sub-grid (indices into times)."""
        return CovarianceModel(grid, self.matrix[np.ix_(indices, indices)],
                               self.source, self.n_paths)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(repr(float(t)) for t in self.times) + "\n")
            for row in self.matrix:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True, eq=False)
class GaussianSampler:
    """Lower-triangular factor of a covariance model, plus the jitter used."""

    model: CovarianceModel
    cholesky: np.ndarray
    jitter: float = 0.0


def build_covariance(kernel: ExcitingKernel, claims: ClaimDistribution, grid: TimeGrid,
                     mc_mu: float = 400.0, mc_paths: int = 4000,
                     seed: int = 0) -> CovarianceModel:
    """Covariance of G on the grid.

    Zero kernel: Brownian, m2*min(s,t). Exponential: analytic entries.
    Anything else: diagonal from the Prop-1 integrals, off-diagonals from
    the sample covariance of mc_paths scaled compound paths at baseline
    mc_mu, shrunk toward the diagonal before use.
    """
    require_stable(kernel)
    m1, m2 = claims.moments
    times = grid.nodes[1:]

    if isinstance(kernel, ZeroKernel) or (isinstance(kernel, ExponentialKernel)
                                          and kernel.alpha == 0):
        matrix = m2 * np.minimum.outer(times, times)
        return CovarianceModel(grid, matrix, "analytic-exponential")

    if isinstance(kernel, ExponentialKernel):
        p = analytic_exp.ExpKernelParams.from_kernel(kernel)
        matrix = analytic_exp.cov_G_matrix(p, claims, times)
        return CovarianceModel(grid, matrix, "analytic-exponential")

    if mc_paths < 1000:
        raise InsufficientSamples(f"mc-estimated covariance needs >= 1000 paths, got {mc_paths}")
    from .hawkes_sim import simulate_scaled_centered

    # Prop-1 diagonal on an internal refinement so its quadrature error is
    # independent of how coarse the requested covariance grid is
    refine = max(1, math.ceil(grid.step / volterra.DEFAULT_STEP))
    fine = TimeGrid(grid.t_max, grid.step / refine)
    g1_f = volterra.solve_g1(kernel, fine)
    g2_f = volterra.solve_g2(kernel, fine and g1_f)
    sub = np.arange(0, fine.n_points, refine)
    diag = (m1**2 * g2_f.cumulative().values[sub]
            + (m2 - m1**2) * g1_f.cumulative().values[sub])[1:]
    g1 = volterra.solve_g1(kernel, grid)
    paths = simulate_scaled_centered(kernel, claims, mc_mu, grid, mc_paths, seed,
                                     g1_cum=g1.cumulative())
    matrix = np.atleast_2d(np.cov(paths[:, 1:], rowvar=False, ddof=1))
    np.fill_diagonal(matrix, diag)
    matrix = (1.0 - MC_SHRINKAGE) * matrix + MC_SHRINKAGE * np.diag(np.diag(matrix))
    matrix = 0.5 * (matrix + matrix.T)
    return CovarianceModel(grid, matrix, "mc-estimated", n_paths=mc_paths)


def make_sampler(model: CovarianceModel) -> GaussianSampler:
    """Cholesky factor with the escalating-jitter policy; records the jitter."""
    mat = model.matrix
    max_diag = float(np.max(np.diag(mat)))
    eps = 0.0
    while True:
        try:
            L = np.linalg.cholesky(mat + eps * max_diag * np.eye(mat.shape[0]))
            return GaussianSampler(model=model, cholesky=L, jitter=eps)
        except np.linalg.LinAlgError:
            eps = JITTER_START if eps == 0.0 else eps * 10.0
            if eps > JITTER_MAX:
                raise InvalidParameter(
                    f"covariance not factorizable even with jitter {JITTER_MAX}")


def sample_G(sampler: GaussianSampler, n_paths: int, seed: int,
             path_offset: int = 0) -> np.ndarray:
    """(n_paths, n_points) array of G paths, G(0) = 0 attached exactly.

    Path i uses stream (seed, path_offset + i); results are identical
    however paths are split into batches.
    """
    n = sampler.cholesky.shape[0]
    Z = np.empty((n, n_paths))
    for i in range(n_paths):
        gen = _rng.path_stream(seed, path_offset + i, _rng.GAUSSIAN)
        Z[:, i] = gen.standard_normal(n)
    paths = (sampler.cholesky @ Z).T
    return np.concatenate([np.zeros((n_paths, 1)), paths], axis=1)


@dataclass(frozen=True)
class FcltReport:
    """Scaled-centered compound paths against the Gaussian limit."""

    mu: float
    n_paths: int
    ks_stat: float
    ks_pvalue: float
    var_T_model: float
    var_T_sample: float
    max_cov_dev_se: float
    grid_step: float
    t_max: float
    seed: int
    cov_source: str = "analytic-exponential"

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def fclt_check(kernel: ExcitingKernel, claims: ClaimDistribution, mu: float,
               grid: TimeGrid, n_paths: int, seed: int,
               model: CovarianceModel | None = None) -> FcltReport:
    """Simulate scaled-centered compound paths and compare to the limit law.

    Reports the KS test of the terminal marginal against
    Normal(0, Var G(T)) and the largest covariance-entry deviation in
    units of its sampling standard error.
    """
    if not kernel.is_decreasing():
        raise InvalidParameter("limit theorem requires a decreasing kernel")
    if not math.isfinite(kernel.first_moment()):
        raise InvalidParameter("limit theorem requires a finite kernel first moment")
    if model is None:
        model = build_covariance(kernel, claims, grid)
    from .hawkes_sim import simulate_scaled_centered

    paths = simulate_scaled_centered(kernel, claims, mu, grid, n_paths, seed)
    var_T = float(model.matrix[-1, -1])
    terminal = paths[:, -1]
    ks = stats.kstest(terminal, "norm", args=(0.0, math.sqrt(var_T)))
    emp = np.atleast_2d(np.cov(paths[:, 1:], rowvar=False, ddof=1))
    C = model.matrix
    se = np.sqrt((np.outer(np.diag(C), np.diag(C)) + C**2) / (n_paths - 1))
    dev = float(np.max(np.abs(emp - C) / se))
    return FcltReport(mu=mu, n_paths=n_paths, ks_stat=float(ks.statistic),
                      ks_pvalue=float(ks.pvalue), var_T_model=var_T,
                      var_T_sample=float(np.var(terminal, ddof=1)),
                      max_cov_dev_se=dev, grid_step=grid.step, t_max=grid.t_max,
                      seed=seed, cov_source=model.source)
