"""Wall-clock inference timing."""
import logging
import statistics
import time
from dataclasses import dataclass

import numpy as np

from config import settings
from model import UMFFNet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimingStats:
    median: float
    mean: float
    repeats: int


def time_inference(model: UMFFNet, image: np.ndarray, repeats: int | None = None) -> TimingStats:
    """
    Time single-image forward passes after one untimed warm-up.

    Run with one BLAS thread (the CLI pins it) for stable numbers.

    Args:
        model: Network to time
        image: One rainy image (3, H, W) or a batch of one
        repeats: Timed passes (default: settings.inference_repeats)

    Returns:
        Median and mean seconds per pass
    """
    repeats = repeats or settings.inference_repeats
    if repeats < 1:
        raise ValueError(f"repeats must be positive, got {repeats}")
    batch = image[None] if image.ndim == 3 else image
    if batch.shape[0] != 1:
        raise ValueError(f"time_inference takes a single image, got batch of {batch.shape[0]}")

    model.forward(batch)
    durations = []
    for _ in range(repeats):
        start = time.perf_counter()
        model.forward(batch)
        durations.append(time.perf_counter() - start)

    stats = TimingStats(median=statistics.median(durations), mean=statistics.fmean(durations), repeats=repeats)
    logger.debug(f"Inference {batch.shape[2]}x{batch.shape[3]}: median {stats.median * 1e3:.1f} ms over {repeats} runs")
    return stats
