"""
Additive rain-streak synthesis and procedural clean images.

A streak layer is built from sparse seeded noise smeared along a line
kernel of unit sum, scaled by the intensity and added to the clean image.
"""
import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import ndimage

from rain_data.dataset import PairedSample

logger = logging.getLogger(__name__)

ProceduralKind = Literal["checkerboard", "gradient", "texture"]
PROCEDURAL_KINDS: tuple[str, ...] = ("checkerboard", "gradient", "texture")


class RainSpec(BaseModel):
    """
    Parameters of one synthetic degradation.

    Generation is a pure function of (clean image, RainSpec).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    streak_density: float = Field(default=0.02, gt=0.0, le=1.0)
    streak_length: int = 9
    angle_range: tuple[float, float] = (-20.0, 20.0)
    intensity: float = Field(default=1.0, ge=0.0, le=1.0)
    seed: int = 0

    @field_validator("streak_length")
    @classmethod
    def _check_length(cls, value: int) -> int:
        if value < 2:
            raise ValueError(f"streak_length must be >= 2 for a non-degenerate line kernel, got {value}")
        return value

    @model_validator(mode="after")
    def _check_angles(self) -> "RainSpec":
        low, high = self.angle_range
        if low > high:
            raise ValueError(f"angle_range must be ordered (low, high), got {self.angle_range}")
        if not (-90.0 <= low and high <= 90.0):
            raise ValueError(f"angle_range must lie within [-90, 90] degrees from vertical, got {self.angle_range}")
        return self


def line_kernel(length: int, angle: float) -> np.ndarray:
    """
    Unit-sum motion kernel: a line of ``length`` pixels through the centre.

    Args:
        length: Streak length in pixels (>= 2)
        angle: Degrees from vertical, positive leaning right at the bottom

    Returns:
        Square float64 kernel of odd size
    """
    if length < 2:
        raise ValueError(f"line kernel length must be >= 2, got {length}")
    size = length if length % 2 else length + 1
    centre = size // 2
    theta = math.radians(angle)
    kernel = np.zeros((size, size), dtype=np.float64)
    # Dense sampling along the segment; rounding marks every crossed pixel
    steps = np.linspace(-(length - 1) / 2.0, (length - 1) / 2.0, 4 * length)
    rows = np.clip(np.rint(centre + steps * math.cos(theta)).astype(int), 0, size - 1)
    cols = np.clip(np.rint(centre + steps * math.sin(theta)).astype(int), 0, size - 1)
    kernel[rows, cols] = 1.0
    return kernel / kernel.sum()


def rain_layer(height: int, width: int, spec: RainSpec) -> np.ndarray:
    """Single-channel streak layer with values in [0, spec.intensity]."""
    rng = np.random.default_rng(spec.seed)
    noise = rng.uniform(size=(height, width))
    angle = rng.uniform(*spec.angle_range)

    keep = max(1, int(round(spec.streak_density * height * width)))
    threshold = np.sort(noise, axis=None)[-keep]
    seeds = (noise >= threshold).astype(np.float64)

    # Seeds are 0/1 and the kernel sums to one, so streaks stay within [0, 1]
    streaks = ndimage.convolve(seeds, line_kernel(spec.streak_length, angle), mode="constant", cval=0.0)
    return spec.intensity * np.clip(streaks, 0.0, 1.0)


def synthesize_rain(clean: np.ndarray, spec: RainSpec, identifier: str = "") -> PairedSample:
    """
    Degrade a clean image with additive streaks.

    Args:
        clean: Image (channels, H, W) with values in [0, 1]
        spec: Degradation parameters
        identifier: Name carried by the returned pair

    Returns:
        PairedSample with the clipped rainy image and the untouched clean image
    """
    if clean.ndim != 3:
        raise ValueError(f"clean image must be (channels, H, W), got shape {clean.shape}")
    layer = rain_layer(clean.shape[1], clean.shape[2], spec)
    rainy = np.clip(clean + layer[None, :, :], 0.0, 1.0)
    return PairedSample(rainy=rainy, clean=clean, identifier=identifier)


def procedural_image(kind: ProceduralKind, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    Synthetic clean image for data without photographs.

    Args:
        kind: checkerboard, gradient or texture
        size: Side length
        rng: Source of colours, periods and phases

    Returns:
        Float64 image (3, size, size) in [0, 1]
    """
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64) / max(size - 1, 1)
    if kind == "checkerboard":
        cell = int(rng.integers(4, max(5, size // 4) + 1))
        first, second = rng.uniform(0.1, 0.9, size=(2, 3))
        mask = ((np.arange(size)[:, None] // cell + np.arange(size)[None, :] // cell) % 2).astype(bool)
        image = np.where(mask[None], first[:, None, None], second[:, None, None])
    elif kind == "gradient":
        angle = rng.uniform(0.0, 2.0 * math.pi)
        ramp = math.cos(angle) * xs + math.sin(angle) * ys
        ramp = (ramp - ramp.min()) / max(ramp.max() - ramp.min(), 1e-12)
        start, end = rng.uniform(0.05, 0.95, size=(2, 3))
        image = start[:, None, None] + (end - start)[:, None, None] * ramp[None]
    elif kind == "texture":
        image = np.zeros((3, size, size))
        for channel in range(3):
            for _ in range(3):
                fx, fy = rng.uniform(1.0, 6.0, size=2)
                phase = rng.uniform(0.0, 2.0 * math.pi)
                image[channel] += np.sin(2.0 * math.pi * (fx * xs + fy * ys) + phase)
        image = 0.5 + image / 8.0
    else:
        raise ValueError(f"Unknown procedural kind '{kind}', expected one of {PROCEDURAL_KINDS}")
    return np.clip(image, 0.0, 1.0)
