"""
Uncertainty calibration diagnostics.

A useful uncertainty map ranks pixels like their actual error: high rank
correlation with |prediction - target|, and removing the most uncertain
pixels first lowers the remaining error almost as fast as the oracle that
removes the largest errors first.
"""
import logging
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import rankdata

logger = logging.getLogger(__name__)


def _flat_pair(uncertainty: np.ndarray, abs_error: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uncertainty = np.asarray(uncertainty, dtype=np.float64)
    abs_error = np.asarray(abs_error, dtype=np.float64)
    if uncertainty.shape != abs_error.shape:
        raise ValueError(f"uncertainty {uncertainty.shape} and error {abs_error.shape} maps differ in shape")
    if uncertainty.size == 0:
        raise ValueError("empty maps")
    return uncertainty.reshape(-1), abs_error.reshape(-1)


def uncertainty_error_correlation(uncertainty: np.ndarray, abs_error: np.ndarray) -> float | None:
    """
    Spearman rank correlation over flattened pixels; ties get average ranks.

    Returns:
        Correlation in [-1, 1], or None (degenerate) when either map is constant
    """
    u, e = _flat_pair(uncertainty, abs_error)
    ranks_u = rankdata(u, method="average")
    ranks_e = rankdata(e, method="average")
    ranks_u -= ranks_u.mean()
    ranks_e -= ranks_e.mean()
    norm = np.sqrt(np.sum(ranks_u**2) * np.sum(ranks_e**2))
    if norm == 0.0:
        logger.warning("Rank correlation is undefined for a constant map")
        return None
    return float(np.clip(np.sum(ranks_u * ranks_e) / norm, -1.0, 1.0))


def _check_fractions(fractions: Sequence[float]) -> np.ndarray:
    fractions = np.asarray(fractions, dtype=np.float64)
    if fractions.size == 0:
        raise ValueError("fractions must not be empty")
    if np.any(fractions < 0.0) or np.any(fractions >= 1.0):
        raise ValueError(f"fractions must lie in [0, 1), got {fractions.tolist()}")
    return fractions


def _remaining_error(errors_in_removal_order: np.ndarray, fractions: np.ndarray) -> np.ndarray:
    n = errors_in_removal_order.size
    # suffix[k] = mean error of the pixels kept after removing the first k
    suffix_sums = np.cumsum(errors_in_removal_order[::-1])[::-1]
    curve = np.empty(fractions.size)
    for i, fraction in enumerate(fractions):
        removed = min(int(round(fraction * n)), n - 1)
        curve[i] = suffix_sums[removed] / (n - removed)
    return curve


def sparsification_curve(uncertainty: np.ndarray, abs_error: np.ndarray, fractions: Sequence[float]) -> np.ndarray:
    """
    Mean remaining error after discarding the most uncertain pixels.

    Args:
        uncertainty: Per-pixel uncertainty
        abs_error: Per-pixel absolute error, same shape
        fractions: Removed fractions in [0, 1)

    Returns:
        Remaining mean error per fraction

    Raises:
        ValueError: If ``fractions`` is empty or out of range
    """
    fractions = _check_fractions(fractions)
    u, e = _flat_pair(uncertainty, abs_error)
    order = np.argsort(-u, kind="stable")
    return _remaining_error(e[order], fractions)


def oracle_curve(abs_error: np.ndarray, fractions: Sequence[float]) -> np.ndarray:
    """Sparsification curve ranked by the error itself (the lower envelope)."""
    return sparsification_curve(abs_error, abs_error, fractions)


def random_sparsification_curve(abs_error: np.ndarray, fractions: Sequence[float], seed: int = 0) -> np.ndarray:
    """Sparsification curve for a seeded random removal order."""
    fractions = _check_fractions(fractions)
    e = np.asarray(abs_error, dtype=np.float64).reshape(-1)
    order = np.random.default_rng(seed).permutation(e.size)
    return _remaining_error(e[order], fractions)


def ause(uncertainty: np.ndarray, abs_error: np.ndarray, fractions: Sequence[float] | None = None) -> float:
    """
    Area between the sparsification curve and the oracle curve.

    Zero for a perfect ranking; larger is worse.

    Args:
        fractions: Grid for the integral (default 0.00, 0.02, ..., 0.98)
    """
    fractions = np.arange(0.0, 1.0, 0.02) if fractions is None else _check_fractions(fractions)
    if fractions.size < 2:
        raise ValueError("ause needs at least two fractions")
    gap = sparsification_curve(uncertainty, abs_error, fractions) - oracle_curve(abs_error, fractions)
    return float(trapezoid(gap, fractions))
