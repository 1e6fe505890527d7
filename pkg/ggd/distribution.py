"""
Heteroscedastic generalized Gaussian likelihood.

Per pixel the residual r = prediction - target is modelled with density
β / (2 α Γ(1/β)) · exp(-(|r| / α)^β). Scale α and shape β are predicted per
pixel by the network; β = 2 recovers a Gaussian and β = 1 a Laplace
distribution.
"""
import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from diffcore import Tensor, ops, special
from diffcore.tensor import ShapeError

logger = logging.getLogger(__name__)

ALPHA_FLOOR = 1e-3
BETA_FLOOR = 0.5
RESIDUAL_FLOOR = 1e-6
INITIAL_BETA = 2.0
# Upper bound on β · log(r / α); exp of it stays finite in float32
MAX_POWER_EXPONENT = 50.0


@dataclass
class GGDParamMaps:
    """Per-pixel scale (alpha) and shape (beta), each (batch, 1, H, W)."""

    alpha: Tensor
    beta: Tensor

    def __post_init__(self) -> None:
        if self.alpha.shape != self.beta.shape:
            raise ShapeError(f"alpha shape {self.alpha.shape} differs from beta shape {self.beta.shape}")
        if self.alpha.data.ndim != 4 or self.alpha.shape[1] != 1:
            raise ShapeError(f"parameter maps must be (batch, 1, H, W), got {self.alpha.shape}")

    def validate(self) -> None:
        """Check the floors; the construction transform guarantees them."""
        # Small tolerance for float32 rounding of floor + softplus(-large)
        if np.min(self.alpha.data) < ALPHA_FLOOR * (1 - 1e-6):
            raise ValueError(f"alpha below floor {ALPHA_FLOOR}: min={np.min(self.alpha.data)}")
        if np.min(self.beta.data) < BETA_FLOOR * (1 - 1e-6):
            raise ValueError(f"beta below floor {BETA_FLOOR}: min={np.min(self.beta.data)}")


def softplus_inverse(y: float) -> float:
    """Raw value whose softplus equals y > 0."""
    if y <= 0:
        raise ValueError(f"softplus_inverse needs y > 0, got {y}")
    return y + math.log(-math.expm1(-y))


def initial_beta_bias() -> float:
    """Bias for the β head so that the initial shape is INITIAL_BETA."""
    return softplus_inverse(INITIAL_BETA - BETA_FLOOR)


def param_transform(raw_alpha: Tensor, raw_beta: Tensor) -> GGDParamMaps:
    """
    Map unconstrained head outputs to valid GGD parameters.

    alpha = ALPHA_FLOOR + softplus(raw_alpha); beta = BETA_FLOOR + softplus(raw_beta)
    """
    if raw_alpha.shape != raw_beta.shape:
        raise ShapeError(f"raw maps differ in shape: {raw_alpha.shape} vs {raw_beta.shape}")
    dtype = raw_alpha.dtype
    alpha = ops.add(ops.softplus(raw_alpha), Tensor(np.full((1, 1, 1, 1), ALPHA_FLOOR), dtype=dtype))
    beta = ops.add(ops.softplus(raw_beta), Tensor(np.full((1, 1, 1, 1), BETA_FLOOR), dtype=dtype))
    return GGDParamMaps(alpha=alpha, beta=beta)


def cap_exponent(exponent: Tensor, limit: float = MAX_POWER_EXPONENT) -> Tensor:
    """Bound the power-term exponent smoothly; identity well below ``limit``."""
    return ops.soft_cap(exponent, limit)


def ggd_nll(
    prediction: Tensor,
    target: Tensor,
    params: GGDParamMaps,
    reduction: Literal["mean", "sum"] = "mean",
) -> Tensor:
    """
    Negative log-likelihood of ``target`` under the predicted distributions.

    Per pixel: (|Ĵ - J| / α)^β - log(β / α) + log Γ(1 / β), with |Ĵ - J|
    clamped below at RESIDUAL_FLOOR. Parameter maps broadcast over image
    channels.

    The exponent z = β log(|Ĵ - J| / α) is passed through the smooth cap
    z - softplus(z - MAX_POWER_EXPONENT), which differs from z by less than
    exp(z - MAX_POWER_EXPONENT) and keeps a positive slope. The loss and its
    gradient therefore stay finite for any α and β above their floors.

    Args:
        prediction: Derained image (batch, C, H, W)
        target: Ground truth, same shape
        params: GGD maps (batch, 1, H, W)
        reduction: "mean" over all pixels and channels, or "sum"

    Returns:
        Scalar tensor
    """
    if prediction.shape != target.shape:
        raise ShapeError(f"prediction {prediction.shape} and target {target.shape} differ")
    expected = (prediction.shape[0], 1, *prediction.shape[2:])
    if params.alpha.shape != expected:
        raise ShapeError(f"parameter maps {params.alpha.shape} do not match image {prediction.shape}")
    if reduction not in ("mean", "sum"):
        raise ValueError(f"Unknown reduction '{reduction}'")
    params.validate()

    alpha, beta = params.alpha, params.beta
    residual = ops.clamp_min(ops.abs(ops.sub(prediction, target)), RESIDUAL_FLOOR)
    log_alpha = ops.log(alpha)
    # (r / α)^β = exp(β (log r - log α))
    exponent = ops.mul(beta, ops.sub(ops.log(residual), log_alpha))
    power = ops.exp(cap_exponent(exponent))
    log_ratio = ops.sub(ops.log(beta), log_alpha)
    one = Tensor(np.ones((1, 1, 1, 1)), dtype=beta.dtype)
    normalizer = ops.sub(ops.log_gamma(ops.div(one, beta)), log_ratio)
    per_pixel = ops.add(power, normalizer)
    return ops.mean(per_pixel) if reduction == "mean" else ops.sum(per_pixel)


def uncertainty_map(params: GGDParamMaps) -> np.ndarray:
    """
    Per-pixel variance α² Γ(3/β) / Γ(1/β).

    A pure function of the parameter maps; evaluated in log space for range.
    """
    alpha = params.alpha.data.astype(np.float64)
    beta = params.beta.data.astype(np.float64)
    log_var = 2.0 * np.log(alpha) + special.log_gamma(3.0 / beta) - special.log_gamma(1.0 / beta)
    return np.exp(log_var)


def gaussian_nll(residual: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian negative log-likelihood of ``residual`` with standard deviation sigma."""
    return 0.5 * (residual / sigma) ** 2 + math.log(sigma) + 0.5 * math.log(2.0 * math.pi)
