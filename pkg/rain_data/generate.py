"""Write synthetic paired datasets in the rainy/ + clean/ layout."""
import csv
import logging
from pathlib import Path
from typing import Any

import numpy as np
from tqdm import tqdm

from rain_data.io import list_images, read_png, write_png
from rain_data.synthesis import PROCEDURAL_KINDS, RainSpec, procedural_image, synthesize_rain

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.csv"
MANIFEST_FIELDS = ["identifier", "source", "streak_density", "streak_length", "angle_low", "angle_high", "intensity", "seed"]


def pair_seed(seed: int, index: int) -> int:
    """Rain seed of pair ``index`` in a dataset generated with ``seed``."""
    return int(np.random.default_rng([seed, index]).integers(0, 2**31 - 1))


def _crop_clean(image: np.ndarray, size: int, rng: np.random.Generator, source: str) -> np.ndarray:
    height, width = image.shape[1:]
    if height < size or width < size:
        raise ValueError(f"Clean image {source} is {height}x{width}, smaller than requested size {size}")
    top = int(rng.integers(0, height - size + 1))
    left = int(rng.integers(0, width - size + 1))
    return image[:, top : top + size, left : left + size]


def generate_dataset(
    out_dir: str | Path,
    count: int,
    size: int,
    seed: int = 0,
    clean_dir: str | Path | None = None,
    rain: dict[str, Any] | None = None,
    show_progress: bool = True,
) -> list[dict[str, Any]]:
    """
    Synthesize ``count`` pairs of ``size`` x ``size`` images.

    Clean images are cropped from ``clean_dir`` (cycled in name order) or,
    when it is None, generated procedurally. Every pair gets its own rain
    seed derived from ``seed``.

    Args:
        out_dir: Destination; receives rainy/, clean/ and manifest.csv
        count: Number of pairs
        size: Side length, a multiple of 4
        seed: Dataset seed
        clean_dir: Optional directory of clean PNG images
        rain: RainSpec fields shared by all pairs (seed excluded)
        show_progress: Display a tqdm bar

    Returns:
        Manifest rows
    """
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if size < 4 or size % 4:
        raise ValueError(f"size must be a positive multiple of 4, got {size}")
    rain = dict(rain or {})
    rain.pop("seed", None)

    sources: list[Path] = []
    if clean_dir is not None:
        sources = list(list_images(Path(clean_dir)).values())
        if not sources:
            raise FileNotFoundError(f"No PNG images found in {clean_dir}")

    out_dir = Path(out_dir)
    rows: list[dict[str, Any]] = []
    for index in tqdm(range(count), desc="Synthesizing pairs", disable=not show_progress):
        identifier = f"{index:04d}"
        rng = np.random.default_rng([seed, index, 1])
        if sources:
            path = sources[index % len(sources)]
            clean = _crop_clean(read_png(path), size, rng, path.name)
            source = path.name
        else:
            source = PROCEDURAL_KINDS[index % len(PROCEDURAL_KINDS)]
            clean = procedural_image(source, size, rng)

        spec = RainSpec(seed=pair_seed(seed, index), **rain)
        # Quantize first so the clean file is exactly the image that was degraded
        clean = np.rint(clean * 255.0) / 255.0
        sample = synthesize_rain(clean, spec, identifier)
        write_png(out_dir / "clean" / f"{identifier}.png", sample.clean)
        write_png(out_dir / "rainy" / f"{identifier}.png", sample.rainy)
        rows.append(
            {
                "identifier": identifier,
                "source": source,
                "streak_density": spec.streak_density,
                "streak_length": spec.streak_length,
                "angle_low": spec.angle_range[0],
                "angle_high": spec.angle_range[1],
                "intensity": spec.intensity,
                "seed": spec.seed,
            }
        )

    with open(out_dir / MANIFEST_NAME, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=MANIFEST_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"Wrote {count} pairs of {size}x{size} to {out_dir}")
    return rows
