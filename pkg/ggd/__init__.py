"""Generalized Gaussian uncertainty modelling."""
from ggd.distribution import (
    ALPHA_FLOOR,
    BETA_FLOOR,
    INITIAL_BETA,
    MAX_POWER_EXPONENT,
    RESIDUAL_FLOOR,
    GGDParamMaps,
    cap_exponent,
    gaussian_nll,
    ggd_nll,
    initial_beta_bias,
    param_transform,
    softplus_inverse,
    uncertainty_map,
)

__all__ = [
    "ALPHA_FLOOR",
    "BETA_FLOOR",
    "INITIAL_BETA",
    "RESIDUAL_FLOOR",
    "MAX_POWER_EXPONENT",
    "GGDParamMaps",
    "param_transform",
    "ggd_nll",
    "cap_exponent",
    "uncertainty_map",
    "gaussian_nll",
    "softplus_inverse",
    "initial_beta_bias",
]
