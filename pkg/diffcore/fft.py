"""
Radix-2 Cooley-Tukey FFT along the spatial axes of a rank-4 array.

Only power-of-two lengths are supported; callers crop or pad beforehand.
"""
import numpy as np

from diffcore.tensor import ShapeError


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    indices = np.arange(n)
    reversed_indices = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        reversed_indices |= ((indices >> b) & 1) << (bits - 1 - b)
    return reversed_indices


def fft_last_axis(values: np.ndarray) -> np.ndarray:
    """
    Unnormalized forward DFT along the last axis (iterative decimation in time).

    Args:
        values: Real or complex array whose last dimension is a power of two

    Returns:
        complex128 array of the same shape
    """
    n = values.shape[-1]
    if not is_power_of_two(n):
        raise ShapeError(
            f"fft: length {n} is not a power of two; pad or crop to {1 << max(n - 1, 0).bit_length()}"
        )
    data = np.asarray(values, dtype=np.complex128)[..., _bit_reverse_permutation(n)]

    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = data.reshape(*data.shape[:-1], n // size, size)
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        data = np.concatenate([even + odd, even - odd], axis=-1).reshape(data.shape)
        size *= 2
    return data


def fft2_complex(values: np.ndarray) -> np.ndarray:
    """
    Unnormalized 2-D DFT over the last two axes.

    Raises:
        ShapeError: If either spatial length is not a power of two
    """
    height, width = values.shape[-2:]
    for label, n in (("height", height), ("width", width)):
        if not is_power_of_two(n):
            target = 1 << max(n - 1, 0).bit_length()
            raise ShapeError(f"fft2: {label} {n} is not a power of two; pad or crop to {target}")
    rows = fft_last_axis(values)
    return np.swapaxes(fft_last_axis(np.swapaxes(rows, -1, -2)), -1, -2)
