"""Lossless 8-bit RGB image files."""
from pathlib import Path

import numpy as np
from PIL import Image

IMAGE_SUFFIXES = (".png",)


def read_png(path: str | Path) -> np.ndarray:
    """
    Load an image as float64 (3, H, W) with values in [0, 1].

    Raises:
        FileNotFoundError: If the file does not exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Image not found: {path}")
    with Image.open(path) as image:
        pixels = np.asarray(image.convert("RGB"), dtype=np.uint8)
    return pixels.transpose(2, 0, 1).astype(np.float64) / 255.0


def to_uint8(image: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize to 8 bits (round half to even)."""
    return np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_png(path: str | Path, image: np.ndarray) -> Path:
    """
    Save (3, H, W) or (H, W) values in [0, 1] as an 8-bit PNG.

    Values outside [0, 1] are clamped.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = to_uint8(image)
    if pixels.ndim == 3:
        Image.fromarray(np.ascontiguousarray(pixels.transpose(1, 2, 0))).save(path, format="PNG")
    elif pixels.ndim == 2:
        Image.fromarray(pixels).save(path, format="PNG")
    else:
        raise ValueError(f"expected (3, H, W) or (H, W) image, got shape {image.shape}")
    return path


def list_images(directory: Path) -> dict[str, Path]:
    """Image files in ``directory`` keyed by file name."""
    return {p.name: p for p in sorted(directory.iterdir()) if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES}
