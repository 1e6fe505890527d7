#!/usr/bin/env python3
"""
Desk-scale component ablation.

Trains each preset of the ladder (Base, V1 ... V5) briefly on one synthetic
dataset and prints PSNR/SSIM of the clamped outputs on held-out pairs. With
--uffb the full model is trained once per UFFB structure (B1, B2, B3) instead.
"""
import argparse
import logging
import sys
import tempfile
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import settings  # noqa: E402
from evaluation import evaluate  # noqa: E402
from model import ABLATION_PRESETS, UFFB_STRUCTURE_PRESETS, build, count_params  # noqa: E402
from rain_data import PairedDataset, generate_dataset, load_pairs  # noqa: E402
from training import TrainConfig, train  # noqa: E402

logging.basicConfig(level=settings.log_level, format=settings.log_format)
logger = logging.getLogger(__name__)


def main() -> int:
    parser = argparse.ArgumentParser(description="Train and score every ablation preset")
    parser.add_argument("--count", type=int, default=12, help="Training pairs (default: 12)")
    parser.add_argument("--test-count", type=int, default=4, help="Held-out pairs (default: 4)")
    parser.add_argument("--size", type=int, default=32, help="Image side (default: 32)")
    parser.add_argument("--steps", type=int, default=100, help="Training steps per preset (default: 100)")
    parser.add_argument("--seed", type=int, default=0, help="Seed (default: 0)")
    parser.add_argument("--uffb", action="store_true", help="Compare UFFB structures B1/B2/B3 instead of the ladder")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        train_dir, test_dir = Path(tmp) / "train", Path(tmp) / "test"
        generate_dataset(train_dir, args.count, args.size, seed=args.seed, show_progress=False)
        generate_dataset(test_dir, args.test_count, args.size, seed=args.seed + 1, show_progress=False)
        train_pairs = load_pairs(train_dir)
        test_pairs = load_pairs(test_dir)

    presets = UFFB_STRUCTURE_PRESETS if args.uffb else ABLATION_PRESETS
    title = "UFFB structure comparison" if args.uffb else "Component ablation"

    results = []
    for preset, toggles in presets.items():
        config = TrainConfig(epochs=10_000, max_steps=args.steps, crop=args.size, seed=args.seed, **toggles)
        model, _ = build(config.network(), seed=args.seed)
        dataset = PairedDataset(train_pairs, crop=args.size, seed=args.seed)
        logger.info(f"Training preset {preset} ({count_params(model):,} parameters)")
        train(model, dataset, config, show_progress=False)
        report = evaluate(model, test_pairs, repeats=1, show_progress=False)
        results.append((preset, count_params(model), report.mean_psnr, report.mean_ssim, report.input_psnr))

    print(f"\n{'='*60}")
    print(f"{title} (desk scale)")
    print(f"{'='*60}")
    print(f"{'preset':<8}{'params':>12}{'psnr':>10}{'ssim':>10}{'input psnr':>12}")
    for preset, params, mean_psnr, mean_ssim, input_psnr in results:
        print(f"{preset:<8}{params:>12,}{mean_psnr:>10.3f}{mean_ssim:>10.4f}{input_psnr:>12.3f}")
    print(f"{'='*60}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
