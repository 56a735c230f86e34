"""Risk processes with Hawkes claim arrivals: moments, Gaussian diffusion
approximation, and finite-horizon ruin probabilities, with closed-form,
integral-equation, and Monte Carlo routes cross-validating one another."""

from .errors import (AsymptoticInapplicable, GridMismatch, HawkesRiskError,
                     InsufficientSamples, IntegralDivergence, InvalidOrder,
                     InvalidParameter, NoConvergence, NotSamplable,
                     PathBudgetExceeded, UnstableKernel)
from .kernels import (ClaimDistribution, ExcitingKernel, ExponentialClaims,
                      ExponentialKernel, GammaClaims, MomentsOnlyClaims,
                      StabilityReport, TabulatedKernel, ZeroKernel, claim_moments,
                      l1_norm, stability_check)
from .grids import GridFunction, TimeGrid
from .volterra import count_moments, sigma_function, solve_g1, solve_g2
from .analytic_exp import (ExpKernelParams, MConstants, cov_G, cov_N_lambda,
                           cross_count_moment, formula_mode, g1_closed, g2_closed,
                           m_constants, mean_N1, var_G, var_N1, z_moments, zz_cross)
from .hawkes_sim import (CompoundPath, HawkesPath, RiskPathConfig, empirical_cov,
                         simulate_compound, simulate_hawkes, simulate_risk_path)
from .gaussian import (CovarianceModel, FcltReport, GaussianSampler, build_covariance,
                       fclt_check, make_sampler, sample_G)
from .ruin import (AsymptoticInputs, PiterbargEstimate, RuinEstimate, RuinProblem,
                   asymptotic_inputs, exponential_asymptotic_inputs, normal_upper_tail,
                   piterbarg_constant, ruin_asymptotic, ruin_mc_direct, ruin_mc_gaussian)

__version__ = "0.1.0"
