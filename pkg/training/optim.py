"""Step learning-rate schedule, gradient clipping and Adam."""
import math
from typing import Sequence

import numpy as np

from blocks import ParameterStore
from diffcore import Tensor
from model import OptimizerSnapshot


def learning_rate(epoch: int, initial_lr: float = 1e-3, decay_factor: float = 0.5, decay_every: int = 50) -> float:
    """lr(e) = initial_lr * decay_factor ** floor(e / decay_every)."""
    if epoch < 0:
        raise ValueError(f"epoch must be non-negative, got {epoch}")
    return initial_lr * decay_factor ** (epoch // decay_every)


def clip_grad_norm(tensors: Sequence[Tensor], max_norm: float) -> float:
    """
    Rescale gradients in place so their global L2 norm is at most ``max_norm``.

    Returns:
        Norm before clipping
    """
    squares = [float(np.sum(np.square(t.grad, dtype=np.float64))) for t in tensors if t.grad is not None]
    total = math.sqrt(sum(squares))
    if total > max_norm:
        factor = max_norm / total
        for tensor in tensors:
            if tensor.grad is not None:
                tensor.grad *= tensor.grad.dtype.type(factor)
    return total


class Adam:
    """Adaptive moment estimation over every array of a ParameterStore."""

    def __init__(self, store: ParameterStore, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.store = store
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.first = {name: np.zeros_like(t.data) for name, t in store.items()}
        self.second = {name: np.zeros_like(t.data) for name, t in store.items()}

    def step(self, lr: float) -> None:
        """Apply one update; parameters without a gradient are left alone."""
        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count
        for name, tensor in self.store.items():
            if tensor.grad is None:
                continue
            m, v = self.first[name], self.second[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * tensor.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(tensor.grad)
            update = (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            tensor.data -= (lr * update).astype(tensor.dtype)

    def snapshot(self) -> OptimizerSnapshot:
        """State for the checkpoint optimizer section."""
        arrays: dict[str, np.ndarray] = {}
        for name in self.store:
            arrays[f"m.{name}"] = self.first[name].copy()
            arrays[f"v.{name}"] = self.second[name].copy()
        return OptimizerSnapshot(step=self.step_count, arrays=arrays)

    def restore(self, snapshot: OptimizerSnapshot) -> None:
        """
        Load moments saved by :meth:`snapshot`.

        Raises:
            ValueError: If a moment array is missing or has the wrong shape
        """
        for name, tensor in self.store.items():
            for prefix, target in (("m", self.first), ("v", self.second)):
                key = f"{prefix}.{name}"
                if key not in snapshot.arrays:
                    raise ValueError(f"Optimizer state lacks '{key}'")
                if snapshot.arrays[key].shape != tensor.shape:
                    raise ValueError(f"Optimizer state '{key}' has shape {snapshot.arrays[key].shape}, expected {tensor.shape}")
                target[name] = snapshot.arrays[key].astype(tensor.dtype)
        self.step_count = snapshot.step
