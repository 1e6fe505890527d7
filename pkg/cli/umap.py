"""
Float map files.

``UMAP {width} {height}\\n`` followed by width * height little-endian 32-bit
floats in row-major order. A min-max normalized 8-bit PNG preview is written
next to every map; the float file is the authoritative artifact.
"""
from pathlib import Path

import numpy as np

from rain_data import write_png

MAGIC = b"UMAP"


def write_umap(path: str | Path, values: np.ndarray) -> Path:
    """Write an (H, W) map."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError(f"map must be 2-D (H, W), got shape {values.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    height, width = values.shape
    header = MAGIC + f" {width} {height}\n".encode("ascii")
    path.write_bytes(header + np.ascontiguousarray(values, dtype="<f4").tobytes())
    return path


def read_umap(path: str | Path) -> np.ndarray:
    """
    Read a map written by :func:`write_umap`.

    Raises:
        ValueError: On a bad header or payload size
    """
    payload = Path(path).read_bytes()
    end = payload.find(b"\n")
    if end < 0 or not payload.startswith(MAGIC + b" "):
        raise ValueError(f"{path}: not a UMAP file")
    try:
        width, height = (int(v) for v in payload[len(MAGIC) : end].split())
    except ValueError as e:
        raise ValueError(f"{path}: malformed UMAP header") from e
    body = payload[end + 1 :]
    if len(body) != width * height * 4:
        raise ValueError(f"{path}: expected {width * height * 4} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<f4").reshape(height, width).astype(np.float32)


def preview(values: np.ndarray) -> np.ndarray:
    """Min-max normalize to [0, 1]; constant maps become zeros."""
    values = np.asarray(values, dtype=np.float64)
    low, high = values.min(), values.max()
    if high <= low:
        return np.zeros_like(values)
    return (values - low) / (high - low)


def export_map(prefix: str | Path, name: str, values: np.ndarray) -> tuple[Path, Path]:
    """Write ``{prefix}_{name}.umap`` and its ``.png`` preview."""
    prefix = Path(prefix)
    stem = f"{prefix.name}_{name}"
    raw = write_umap(prefix.with_name(f"{stem}.umap"), values)
    image = write_png(prefix.with_name(f"{stem}.png"), preview(values))
    return raw, image
