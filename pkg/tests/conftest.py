"""Pytest configuration and fixtures."""
import numpy as np
import pytest

from diffcore import precision
from model import ModelConfig, build
from rain_data import PairedSample, generate_dataset, procedural_image


@pytest.fixture
def float64():
    """Run the test in 64-bit execution mode."""
    with precision("float64"):
        yield


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    """Full-featured network small enough for finite-difference checks."""
    return ModelConfig(variant="custom", base_blocks=1, base_channels=4)


@pytest.fixture
def tiny_model(float64, tiny_config):
    """(model, store) built from tiny_config in 64-bit mode."""
    return build(tiny_config, seed=0)


@pytest.fixture
def tmp_dataset(tmp_path):
    """Directory with 3 procedural 16x16 pairs in the rainy/ + clean/ layout."""
    root = tmp_path / "data"
    generate_dataset(root, count=3, size=16, seed=0, show_progress=False)
    return root


@pytest.fixture
def sample_pairs(rng):
    """Four 32x32 in-memory pairs: procedural clean images plus uniform noise rain."""
    kinds = ("checkerboard", "gradient", "texture", "checkerboard")
    pairs = []
    for index, kind in enumerate(kinds):
        clean = procedural_image(kind, 32, rng)
        rainy = np.clip(clean + 0.3 * (rng.uniform(size=clean.shape) > 0.9), 0.0, 1.0)
        pairs.append(PairedSample(rainy=rainy, clean=clean, identifier=f"pair{index}"))
    return pairs
