#!/usr/bin/env python3
"""Parameter counts and median inference time of T/B/L next to the published figures."""
import argparse
import logging
import sys
from pathlib import Path

import numpy as np

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import settings  # noqa: E402
from evaluation import time_inference  # noqa: E402
from model import PUBLISHED_PARAM_COUNTS, ModelConfig, build, count_params  # noqa: E402

logging.basicConfig(level=settings.log_level, format=settings.log_format)
logger = logging.getLogger(__name__)

# Published average seconds per image
PAPER_SECONDS = {"T": 0.020, "L": 0.043}


def main() -> int:
    parser = argparse.ArgumentParser(description="Compare model variants")
    parser.add_argument("--size", type=int, default=64, help="Test image side (default: 64)")
    parser.add_argument("--repeats", type=int, default=settings.inference_repeats, help="Timed passes")
    parser.add_argument("--seed", type=int, default=0, help="Seed (default: 0)")
    args = parser.parse_args()

    image = np.random.default_rng(args.seed).uniform(size=(3, args.size, args.size))

    print(f"{'variant':<8}{'params':>14}{'published':>12}{'median ms':>12}{'published ms':>14}")
    for variant in ("T", "B", "L"):
        model, _ = build(ModelConfig(variant=variant), seed=args.seed)
        stats = time_inference(model, image, args.repeats)
        published_ms = f"{PAPER_SECONDS[variant] * 1e3:.0f}" if variant in PAPER_SECONDS else "-"
        print(
            f"{variant:<8}{count_params(model):>14,}{PUBLISHED_PARAM_COUNTS[variant]:>11.2f}M"
            f"{stats.median * 1e3:>12.1f}{published_ms:>14}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
