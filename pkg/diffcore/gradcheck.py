"""Central finite-difference verification of tape gradients."""
import logging
from typing import Callable, Sequence

import numpy as np

from diffcore.tensor import GradTape, Tensor, backward

logger = logging.getLogger(__name__)


def gradcheck(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    h: float = 1e-4,
    atol: float = 1e-6,
) -> float:
    """
    Compare analytic gradients of a scalar function with central differences.

    Only inputs with ``requires_grad`` are perturbed. The error for each element
    is |analytic - numeric| / max(|analytic|, |numeric|, atol), so tiny
    gradients are judged on an absolute floor.

    Args:
        fn: Callable mapping ``inputs`` to a scalar Tensor
        inputs: Tensors, ideally float64
        h: Finite-difference step
        atol: Absolute floor of the relative error denominator

    Returns:
        Maximum relative error over all checked elements
    """
    for tensor in inputs:
        tensor.zero_grad()
    with GradTape() as tape:
        loss = fn(*inputs)
    backward(loss, tape)

    worst = 0.0
    for index, tensor in enumerate(inputs):
        if not tensor.requires_grad:
            continue
        analytic = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        flat = tensor.data.reshape(-1)
        numeric = np.zeros(flat.size, dtype=np.float64)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            plus = fn(*inputs).item()
            flat[i] = original - h
            minus = fn(*inputs).item()
            flat[i] = original
            numeric[i] = (plus - minus) / (2.0 * h)

        analytic_flat = analytic.reshape(-1).astype(np.float64)
        denom = np.maximum(np.maximum(np.abs(analytic_flat), np.abs(numeric)), atol)
        error = float(np.max(np.abs(analytic_flat - numeric) / denom)) if flat.size else 0.0
        logger.debug(f"gradcheck input {index} shape={tensor.shape}: max relative error {error:.3e}")
        worst = max(worst, error)
    return worst
