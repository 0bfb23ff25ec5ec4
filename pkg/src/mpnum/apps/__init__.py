"""Statistical application workloads built on the multi-precision stack."""

from .laplace import (
    LaplaceData,
    LaplaceState,
    PosteriorResult,
    generate_data,
    laplace_log_posterior,
    laplace_mode,
    laplace_state,
    normalize_posterior,
    posterior_grid,
    precision_matrix,
    simpson,
    simpson_weights,
)
from .mala import GaussianTarget, MalaConfig, MalaKernel, MalaResult, default_problem, mala_run
from .mle import MleResult, gaussian_nll, matern_mle
from .optim import NelderMeadResult, nelder_mead
from .pca import PcaResult, pca_eof, sign_align, synthetic_field
from .rng import Rng, rng_bernoulli, rng_normal, rng_uniform
from .spatial import MaternParams, distance_matrix, exp_cov, grid_locations, matern_cov, matern_values, sample_gp

__all__ = [
    "Rng", "rng_uniform", "rng_normal", "rng_bernoulli",
    "MaternParams", "grid_locations", "distance_matrix", "matern_values", "matern_cov", "exp_cov", "sample_gp",
    "nelder_mead", "NelderMeadResult",
    "gaussian_nll", "matern_mle", "MleResult",
    "GaussianTarget", "MalaConfig", "MalaKernel", "MalaResult", "mala_run", "default_problem",
    "pca_eof", "sign_align", "synthetic_field", "PcaResult",
    "LaplaceData", "LaplaceState", "PosteriorResult", "generate_data", "laplace_mode", "laplace_state",
    "laplace_log_posterior", "precision_matrix", "posterior_grid", "normalize_posterior",
    "simpson", "simpson_weights",
]
