"""
Command-line interface.

Subcommands: synth, train, infer, eval, inspect.
Exit codes: 0 success, 1 usage error, 2 runtime failure, 130 interrupted.
"""
import argparse
import logging
from pathlib import Path
from typing import Sequence

from cli.umap import export_map
from config import settings
from evaluation import evaluate, write_csv_report, write_text_report
from model import build, count_params, load_model, summarize
from model.config import PUBLISHED_PARAM_COUNTS
from rain_data import PairedDataset, generate_dataset, load_pairs, read_png, write_png
from training import load_train_config, train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_INTERRUPTED = 130

EFFECTIVE_CONFIG_NAME = "effective_config.txt"


class UsageError(Exception):
    """Invalid command line; maps to exit code 1."""


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with status 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> CliParser:
    parser = CliParser(prog="umff", description="Uncertainty-driven multi-scale deraining toolkit")
    parser.add_argument("--log-level", default=None, help=f"Logging level (default: {settings.log_level})")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")

    # Dataset synthesis
    synth = subparsers.add_parser("synth", help="Synthesize a paired rainy/clean dataset")
    synth.add_argument("--clean", type=Path, help="Directory of clean PNG images")
    synth.add_argument("--procedural", action="store_true", help="Generate clean images (checkerboard/gradient/texture)")
    synth.add_argument("--out", type=Path, required=True, help="Output dataset directory")
    synth.add_argument("--count", type=int, required=True, help="Number of pairs")
    synth.add_argument("--size", type=int, default=64, help="Image side, multiple of 4 (default: 64)")
    synth.add_argument("--seed", type=int, default=0, help="Dataset seed (default: 0)")
    synth.add_argument("--density", type=float, help="Streak density fraction in (0, 1]")
    synth.add_argument("--length", type=int, help="Streak length in pixels (>= 2)")
    synth.add_argument("--angle", type=float, help="Maximum streak angle from vertical in degrees")
    synth.add_argument("--intensity", type=float, help="Streak intensity in [0, 1]")
    synth.add_argument("--force", action="store_true", help="Allow writing into a non-empty directory")

    # Training
    trainer = subparsers.add_parser("train", help="Train a model")
    trainer.add_argument("--config", type=Path, help="key=value training config file")
    trainer.add_argument("--data", type=Path, required=True, help="Training dataset directory")
    trainer.add_argument("--out", type=Path, required=True, help="Output directory for checkpoints and logs")
    trainer.add_argument("--val-data", type=Path, help="Validation dataset for best-by-PSNR checkpoints")
    trainer.add_argument("--epochs", type=int, help="Override epochs")
    trainer.add_argument("--batch-size", type=int, help="Override batch_size")
    trainer.add_argument("--seed", type=int, help="Override seed")
    trainer.add_argument("--variant", choices=["T", "B", "L", "custom"], help="Override variant")

    # Inference
    infer = subparsers.add_parser("infer", help="Derain one image")
    infer.add_argument("--model", type=Path, required=True, help="Checkpoint file")
    infer.add_argument("--input", type=Path, required=True, help="Rainy PNG image")
    infer.add_argument("--output", type=Path, required=True, help="Derained PNG image")
    infer.add_argument("--uncertainty", type=Path, help="Prefix for alpha, beta and uncertainty map exports")

    # Evaluation
    evaluator = subparsers.add_parser("eval", help="Evaluate a model on a paired dataset")
    evaluator.add_argument("--model", type=Path, required=True, help="Checkpoint file")
    evaluator.add_argument("--data", type=Path, required=True, help="Dataset directory")
    evaluator.add_argument("--report", type=Path, required=True, help="key=value report file")
    evaluator.add_argument("--csv", type=Path, help="CSV table (default: report path with .csv suffix)")
    evaluator.add_argument("--repeats", type=int, help=f"Timed passes per image (default: {settings.inference_repeats})")

    # Inspection
    inspect = subparsers.add_parser("inspect", help="Print the layer table of a checkpoint")
    inspect.add_argument("--model", type=Path, required=True, help="Checkpoint file")

    return parser


def cmd_synth(args: argparse.Namespace) -> int:
    if bool(args.clean) == bool(args.procedural):
        raise UsageError("synth: pass exactly one of --clean DIR or --procedural")
    if args.out.exists() and any(args.out.iterdir()) and not args.force:
        raise UsageError(f"synth: output directory {args.out} is not empty (use --force)")

    rain = {}
    if args.density is not None:
        rain["streak_density"] = args.density
    if args.length is not None:
        rain["streak_length"] = args.length
    if args.angle is not None:
        rain["angle_range"] = (-abs(args.angle), abs(args.angle))
    if args.intensity is not None:
        rain["intensity"] = args.intensity

    rows = generate_dataset(args.out, args.count, args.size, args.seed, clean_dir=args.clean, rain=rain)
    print(f"Wrote {len(rows)} pairs to {args.out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    overrides = {"epochs": args.epochs, "batch_size": args.batch_size, "seed": args.seed, "variant": args.variant}
    config = load_train_config(args.config, overrides)

    samples = load_pairs(args.data)
    dataset = PairedDataset(samples, crop=config.crop, seed=config.seed, augment=config.augment)
    validation = load_pairs(args.val_data) if args.val_data else None
    model, _ = build(config.network(), seed=config.seed)

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / EFFECTIVE_CONFIG_NAME).write_text(config.to_text(), encoding="utf-8")

    result = train(model, dataset, config, out_dir=args.out, validation=validation)
    final = result.metrics[-1]
    print(f"Trained {result.steps} steps; final l_total={final['l_total']:.6f}")
    if result.best_psnr is not None:
        print(f"Best validation PSNR: {result.best_psnr:.3f} dB")
    print(f"Checkpoints in {args.out}")
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    model, _ = load_model(args.model)
    image = read_png(args.input)
    output = model.forward(image[None])
    write_png(args.output, output.export()[0][0])
    logger.info(f"Wrote derained image {args.output}")

    if args.uncertainty is not None:
        if output.params is None or output.uncertainty is None:
            raise UsageError("infer: --uncertainty needs a model with uncertainty estimation enabled")
        maps = {
            "alpha": output.params.alpha.data[0, 0],
            "beta": output.params.beta.data[0, 0],
            "uncertainty": output.uncertainty[0, 0],
        }
        for name, values in maps.items():
            raw, _ = export_map(args.uncertainty, name, values)
            logger.info(f"Wrote {name} map {raw}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    model, _ = load_model(args.model)
    samples = load_pairs(args.data)
    report = evaluate(model, samples, repeats=args.repeats)
    write_text_report(report, args.report)
    write_csv_report(report, args.csv or args.report.with_suffix(".csv"))
    for key, value in report.summary().items():
        print(f"{key}={value}")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    model, checkpoint = load_model(args.model)
    print(summarize(model))
    total = count_params(model)
    published = PUBLISHED_PARAM_COUNTS.get(checkpoint.config.variant)
    suffix = f" (published {published:.2f}M)" if published is not None else ""
    print(f"total_params={total} ({total / 1e6:.3f}M){suffix}")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "infer": cmd_infer,
    "eval": cmd_eval,
    "inspect": cmd_inspect,
}


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entrypoint."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(str(e))
        parser.print_usage()
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    logging.basicConfig(level=args.log_level or settings.log_level, format=settings.log_format)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        return EXIT_RUNTIME
