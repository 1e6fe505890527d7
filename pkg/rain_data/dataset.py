"""
Paired rainy/clean datasets, augmentation and pyramids.

Images are float arrays (3, H, W) in [0, 1]; batches stack them to
(batch, 3, H, W).
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from config import settings
from diffcore import Tensor, ops
from rain_data.io import list_images, read_png

logger = logging.getLogger(__name__)


class UnmatchedPairsError(ValueError):
    """Rainy and clean directories do not hold the same file names."""

    def __init__(self, rainy_only: Sequence[str], clean_only: Sequence[str]):
        self.rainy_only = list(rainy_only)
        self.clean_only = list(clean_only)
        super().__init__(
            f"Unmatched image pairs: only in rainy/: {self.rainy_only or 'none'}; "
            f"only in clean/: {self.clean_only or 'none'}"
        )


@dataclass(frozen=True)
class Augmentation:
    """Crop window plus horizontal flip, applied identically to both images of a pair."""

    top: int
    left: int
    size: int
    flip: bool

    def apply(self, image: np.ndarray) -> np.ndarray:
        window = image[..., self.top : self.top + self.size, self.left : self.left + self.size]
        return flip_horizontal(window) if self.flip else window


@dataclass
class PairedSample:
    rainy: np.ndarray
    clean: np.ndarray
    identifier: str = ""
    augmentation: Augmentation | None = None

    def __post_init__(self) -> None:
        if self.rainy.shape != self.clean.shape:
            raise ValueError(
                f"Pair '{self.identifier}': rainy {self.rainy.shape} and clean {self.clean.shape} differ"
            )


@dataclass
class Batch:
    rainy: np.ndarray
    clean: np.ndarray
    identifiers: list[str] = field(default_factory=list)


def flip_horizontal(image: np.ndarray) -> np.ndarray:
    """Mirror the last (width) axis."""
    return np.ascontiguousarray(image[..., ::-1])


def check_crop(crop: int) -> None:
    if crop < 4 or crop % 4:
        raise ValueError(f"crop size must be a positive multiple of 4, got {crop}")


def draw_augmentation(height: int, width: int, crop: int, rng: np.random.Generator) -> Augmentation:
    """
    Random crop position and 50% horizontal flip.

    Raises:
        ValueError: If ``crop`` is not a multiple of 4 or exceeds the image
    """
    check_crop(crop)
    if crop > height or crop > width:
        raise ValueError(f"crop size {crop} exceeds image size {height}x{width}")
    top = int(rng.integers(0, height - crop + 1))
    left = int(rng.integers(0, width - crop + 1))
    return Augmentation(top=top, left=left, size=crop, flip=bool(rng.random() < 0.5))


def augment(sample: PairedSample, rng: np.random.Generator, crop: int | None = None) -> PairedSample:
    """Crop and maybe flip both images identically; the record is kept on the result."""
    crop = crop or settings.default_crop
    height, width = sample.rainy.shape[-2:]
    augmentation = draw_augmentation(height, width, crop, rng)
    return PairedSample(
        rainy=augmentation.apply(sample.rainy),
        clean=augmentation.apply(sample.clean),
        identifier=sample.identifier,
        augmentation=augmentation,
    )


def make_pyramid(image: np.ndarray | Tensor) -> tuple[Tensor, Tensor, Tensor]:
    """
    Image at scales 1, 1/2 and 1/4 by repeated 2x2 averaging.

    Accepts (3, H, W) or (batch, 3, H, W); always returns rank-4 tensors.
    """
    if not isinstance(image, Tensor):
        array = np.asarray(image)
        if array.ndim == 3:
            array = array[None]
        image = Tensor(array)
    half = ops.downsample_avg2(image)
    return image, half, ops.downsample_avg2(half)


def load_pairs(root: str | Path) -> list[PairedSample]:
    """
    Read ``root/rainy`` and ``root/clean`` pairs matched by file name.

    Raises:
        FileNotFoundError: If either subdirectory is missing
        UnmatchedPairsError: Listing names present on one side only
    """
    root = Path(root)
    rainy_dir, clean_dir = root / "rainy", root / "clean"
    for directory in (rainy_dir, clean_dir):
        if not directory.is_dir():
            raise FileNotFoundError(f"Dataset directory not found: {directory}")

    rainy_files = list_images(rainy_dir)
    clean_files = list_images(clean_dir)
    rainy_only = sorted(set(rainy_files) - set(clean_files))
    clean_only = sorted(set(clean_files) - set(rainy_files))
    if rainy_only or clean_only:
        raise UnmatchedPairsError(rainy_only, clean_only)

    samples = [
        PairedSample(rainy=read_png(rainy_files[name]), clean=read_png(clean_files[name]), identifier=Path(name).stem)
        for name in sorted(rainy_files)
    ]
    logger.info(f"Loaded {len(samples)} pairs from {root}")
    return samples


class PairedDataset:
    """
    In-memory pairs with seeded per-epoch ordering and augmentation.

    Each delivered sample draws its augmentation from a generator seeded by
    (seed, epoch, position), so the output is the same for any worker count.
    """

    def __init__(
        self,
        samples: Sequence[PairedSample],
        crop: int | None = None,
        seed: int = 0,
        augment: bool = True,
        workers: int | None = None,
    ):
        """
        Args:
            samples: Loaded or synthesized pairs
            crop: Crop side (default: settings.default_crop); None with augment=False keeps full images
            seed: Ordering and augmentation seed
            augment: Apply crop and flip
            workers: Augmentation threads (default: settings.data_workers; 0 = calling thread)
        """
        if not samples:
            raise ValueError("PairedDataset needs at least one sample")
        self.samples = list(samples)
        self.augment = augment
        self.crop = crop if crop is not None else (settings.default_crop if augment else None)
        if self.crop is not None:
            check_crop(self.crop)
        self.seed = seed
        self.workers = settings.data_workers if workers is None else workers

    def __len__(self) -> int:
        return len(self.samples)

    def epoch_order(self, epoch: int) -> np.ndarray:
        """Sample indices for ``epoch``; a pure function of (seed, epoch)."""
        if not self.augment:
            return np.arange(len(self.samples))
        return np.random.default_rng([self.seed, epoch]).permutation(len(self.samples))

    def _prepare(self, epoch: int, position: int, index: int) -> PairedSample:
        sample = self.samples[index]
        if self.augment:
            rng = np.random.default_rng([self.seed, epoch, position])
            return augment(sample, rng, self.crop)
        if self.crop is not None:
            height, width = sample.rainy.shape[-2:]
            crop = Augmentation(top=(height - self.crop) // 2, left=(width - self.crop) // 2, size=self.crop, flip=False)
            return PairedSample(crop.apply(sample.rainy), crop.apply(sample.clean), sample.identifier, crop)
        return sample

    def batches(self, epoch: int, batch_size: int) -> Iterator[Batch]:
        """
        Yield batches in the deterministic epoch order; the last batch may be short.
        """
        if batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {batch_size}")
        order = self.epoch_order(epoch)
        executor = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 0 else None
        try:
            for start in range(0, len(order), batch_size):
                positions = range(start, min(start + batch_size, len(order)))
                jobs = [(epoch, position, int(order[position])) for position in positions]
                if executor is not None:
                    prepared = list(executor.map(lambda job: self._prepare(*job), jobs))
                else:
                    prepared = [self._prepare(*job) for job in jobs]
                yield Batch(
                    rainy=np.stack([s.rainy for s in prepared]),
                    clean=np.stack([s.clean for s in prepared]),
                    identifiers=[s.identifier for s in prepared],
                )
        finally:
            if executor is not None:
                executor.shutdown(wait=True)
