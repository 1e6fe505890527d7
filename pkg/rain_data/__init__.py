"""Synthetic rain, paired datasets, augmentation and pyramids."""
from rain_data.dataset import (
    Augmentation,
    Batch,
    PairedDataset,
    PairedSample,
    UnmatchedPairsError,
    augment,
    check_crop,
    draw_augmentation,
    flip_horizontal,
    load_pairs,
    make_pyramid,
)
from rain_data.generate import MANIFEST_NAME, generate_dataset, pair_seed
from rain_data.io import read_png, to_uint8, write_png
from rain_data.synthesis import PROCEDURAL_KINDS, RainSpec, line_kernel, procedural_image, rain_layer, synthesize_rain

__all__ = [
    "RainSpec",
    "PairedSample",
    "PairedDataset",
    "Batch",
    "Augmentation",
    "UnmatchedPairsError",
    "synthesize_rain",
    "rain_layer",
    "line_kernel",
    "procedural_image",
    "PROCEDURAL_KINDS",
    "load_pairs",
    "make_pyramid",
    "augment",
    "draw_augmentation",
    "flip_horizontal",
    "check_crop",
    "generate_dataset",
    "pair_seed",
    "MANIFEST_NAME",
    "read_png",
    "write_png",
    "to_uint8",
]
