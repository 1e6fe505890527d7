"""Minimal differentiable-computation core."""
from diffcore import ops
from diffcore.fft import fft2_complex, is_power_of_two
from diffcore.gradcheck import gradcheck
from diffcore.ops import OPERATORS
from diffcore.special import digamma, log_gamma, trigamma
from diffcore.tensor import (
    GradTape,
    NonFiniteError,
    ShapeError,
    Tensor,
    active_tape,
    backward,
    default_dtype,
    precision,
)

__all__ = [
    "ops",
    "OPERATORS",
    "Tensor",
    "GradTape",
    "backward",
    "active_tape",
    "default_dtype",
    "precision",
    "gradcheck",
    "fft2_complex",
    "is_power_of_two",
    "log_gamma",
    "digamma",
    "trigamma",
    "ShapeError",
    "NonFiniteError",
]
