"""Fidelity metrics for images with values in [0, 1]."""
import math

import numpy as np
from scipy import signal

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def psnr(x: np.ndarray, y: np.ndarray) -> float:
    """
    Peak signal-to-noise ratio in dB with peak 1.0.

    Returns:
        10 log10(1 / MSE), or ``math.inf`` when the images are identical

    Raises:
        ValueError: If the shapes differ
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"psnr: shape mismatch {x.shape} vs {y.shape}")
    mse = float(np.mean(np.square(x - y)))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def to_luma(image: np.ndarray) -> np.ndarray:
    """(3, H, W) RGB to (H, W) luma; (H, W) input is returned as float64."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image
    if image.ndim == 3 and image.shape[0] == 3:
        return np.tensordot(LUMA_WEIGHTS, image, axes=([0], [0]))
    raise ValueError(f"expected (3, H, W) or (H, W) image, got shape {image.shape}")


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 2-D Gaussian window."""
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    profile = np.exp(-(offsets**2) / (2.0 * sigma**2))
    window = np.outer(profile, profile)
    return window / window.sum()


def ssim(x: np.ndarray, y: np.ndarray) -> float:
    """
    Structural similarity of the luma channels.

    11x11 Gaussian window (sigma 1.5), C1 = 0.01^2 and C2 = 0.03^2 at peak 1,
    averaged over every window position fully inside the image. Values are not
    comparable to figures computed with other SSIM settings.

    Raises:
        ValueError: If shapes differ or the image is smaller than the window
    """
    x, y = to_luma(x), to_luma(y)
    if x.shape != y.shape:
        raise ValueError(f"ssim: shape mismatch {x.shape} vs {y.shape}")
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(f"ssim: image {x.shape[0]}x{x.shape[1]} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")

    window = gaussian_window()

    def filtered(values: np.ndarray) -> np.ndarray:
        return signal.correlate2d(values, window, mode="valid")

    mu_x, mu_y = filtered(x), filtered(y)
    var_x = filtered(x * x) - mu_x**2
    var_y = filtered(y * y) - mu_y**2
    cov = filtered(x * y) - mu_x * mu_y
    numerator = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * cov + SSIM_C2)
    denominator = (mu_x**2 + mu_y**2 + SSIM_C1) * (var_x + var_y + SSIM_C2)
    return float(np.mean(numerator / denominator))
