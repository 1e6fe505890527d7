"""
Training loop.

Per step: forward, joint loss, backward, global-norm clip, Adam update. Per
epoch: learning-rate schedule, checkpoints and an aggregate log line.
"""
import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from tqdm import tqdm

from config import settings
from diffcore import GradTape, NonFiniteError, Tensor, backward
from evaluation import psnr
from losses import LossReport, total_loss
from model import UMFFNet, save_checkpoint
from rain_data import Batch, PairedDataset, PairedSample, make_pyramid
from training.config import TrainConfig
from training.optim import Adam, clip_grad_norm, learning_rate

logger = logging.getLogger(__name__)

METRIC_FIELDS = ("step", "epoch", "lr", "l_con", "l_fre", "l_ue", "l_total")


class TrainingDivergedError(RuntimeError):
    """A step produced a non-finite loss or activation."""

    def __init__(self, step: int, epoch: int, inputs_sha256: str, lr: float, loss_parts: dict[str, float] | None):
        self.step = step
        self.epoch = epoch
        self.inputs_sha256 = inputs_sha256
        self.lr = lr
        self.loss_parts = loss_parts or {}
        parts = " ".join(f"{k}={v!r}" for k, v in self.loss_parts.items()) or "loss parts unavailable"
        super().__init__(
            f"Training diverged at step {step} (epoch {epoch}): lr={lr!r} inputs_sha256={inputs_sha256} {parts}"
        )


@dataclass
class TrainResult:
    """Outcome of :func:`train`; ``metrics`` holds one record per step."""

    store: Any
    metrics: list[dict[str, float]] = field(default_factory=list)
    steps: int = 0
    best_psnr: float | None = None
    optimizer: Adam | None = None


def format_metrics_line(record: dict[str, float]) -> str:
    """key=value line; floats use repr so values round-trip exactly."""
    return " ".join(f"{key}={record[key]!r}" for key in METRIC_FIELDS)


def parse_metrics_line(line: str) -> dict[str, float]:
    record: dict[str, float] = {}
    for item in line.split():
        key, value = item.split("=", 1)
        record[key] = int(value) if key in ("step", "epoch") else float(value)
    return record


def batch_digest(batch: Batch) -> str:
    """sha256 of a batch's pixel data, for divergence diagnostics."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(batch.rainy).tobytes())
    digest.update(np.ascontiguousarray(batch.clean).tobytes())
    return digest.hexdigest()


def train_step(
    model: UMFFNet,
    optimizer: Adam,
    batch: Batch,
    config: TrainConfig,
    lr: float,
    step: int = 0,
    epoch: int = 0,
) -> LossReport:
    """
    One optimization step on a batch.

    Raises:
        TrainingDivergedError: If the loss or an intermediate value is not finite
    """
    store = model.store
    rainy = Tensor(batch.rainy, dtype=store.dtype)
    targets = make_pyramid(Tensor(batch.clean, dtype=store.dtype))

    store.zero_grad()
    try:
        with GradTape() as tape:
            output = model.forward(rainy)
            report = total_loss(output, targets, config.loss_weights)
    except NonFiniteError as e:
        raise TrainingDivergedError(step, epoch, batch_digest(batch), lr, None) from e
    if not math.isfinite(report.l_total):
        raise TrainingDivergedError(step, epoch, batch_digest(batch), lr, report.as_record())

    backward(report.objective, tape)
    if config.grad_clip is not None:
        norm = clip_grad_norm(store.tensors(), config.grad_clip)
        logger.debug(f"step {step}: gradient norm {norm:.4g}")
    optimizer.step(lr)
    return report


def validation_psnr(model: UMFFNet, samples: Sequence[PairedSample]) -> float:
    """Mean PSNR of clamped full-scale outputs."""
    scores = [psnr(model.forward(s.rainy[None]).export()[0][0], s.clean) for s in samples]
    return float(np.mean(scores))


def train(
    model: UMFFNet,
    dataset: PairedDataset,
    config: TrainConfig,
    out_dir: str | Path | None = None,
    validation: Sequence[PairedSample] | None = None,
    show_progress: bool = True,
) -> TrainResult:
    """
    Train ``model`` in place.

    Args:
        model: Network built from ``config.network()``
        dataset: Training pairs
        config: Schedule, optimizer and loss settings
        out_dir: Receives the metrics log and checkpoints (epoch_XXXX.ckpt,
            last.ckpt, best.ckpt); nothing is written when None
        validation: Optional full-size pairs for best-by-PSNR checkpoints
        show_progress: Display tqdm bars

    Returns:
        TrainResult with the trained store and per-step metric records

    Raises:
        TrainingDivergedError: On a non-finite loss
    """
    if len(dataset) == 0:
        raise ValueError("Training dataset is empty")
    if model.config != config.network():
        raise ValueError("Model was built from a different network configuration than the training config")

    optimizer = Adam(model.store, config.adam_beta1, config.adam_beta2, config.adam_eps)
    result = TrainResult(store=model.store, optimizer=optimizer)

    metrics_handle = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_handle = open(out_dir / settings.metrics_log_name, "w", encoding="utf-8")

    step = 0
    try:
        for epoch in range(config.epochs):
            lr = learning_rate(epoch, config.initial_lr, config.lr_decay_factor, config.lr_decay_every)
            logger.info(f"Epoch {epoch + 1}/{config.epochs} lr={lr:g}")
            epoch_records = []
            batches = dataset.batches(epoch, config.batch_size)
            for batch in tqdm(batches, desc=f"epoch {epoch + 1}", disable=not show_progress, leave=False):
                step += 1
                report = train_step(model, optimizer, batch, config, lr, step, epoch)
                record = {"step": step, "epoch": epoch, "lr": lr, **report.as_record()}
                epoch_records.append(record)
                if metrics_handle is not None:
                    metrics_handle.write(format_metrics_line(record) + "\n")
                if config.max_steps is not None and step >= config.max_steps:
                    break
            result.metrics.extend(epoch_records)

            mean_total = float(np.mean([r["l_total"] for r in epoch_records]))
            logger.info(f"Epoch {epoch + 1} done: {len(epoch_records)} steps, mean l_total={mean_total:.5f}")

            if out_dir is not None:
                snapshot = optimizer.snapshot()
                save_checkpoint(out_dir / f"epoch_{epoch:04d}.ckpt", model.config, model.store, snapshot)
                save_checkpoint(out_dir / settings.checkpoint_name, model.config, model.store, snapshot)

            if validation:
                score = validation_psnr(model, validation)
                logger.info(f"Validation PSNR {score:.3f} dB")
                if result.best_psnr is None or score > result.best_psnr:
                    result.best_psnr = score
                    if out_dir is not None:
                        save_checkpoint(out_dir / "best.ckpt", model.config, model.store, optimizer.snapshot())

            if config.max_steps is not None and step >= config.max_steps:
                logger.info(f"Reached max_steps={config.max_steps}")
                break
    finally:
        if metrics_handle is not None:
            metrics_handle.close()

    result.steps = step
    return result
