"""Desk-scale training: config, schedule, optimizer and loop."""
from training.config import TrainConfig, load_train_config, parse_config_text
from training.optim import Adam, clip_grad_norm, learning_rate
from training.trainer import (
    METRIC_FIELDS,
    TrainingDivergedError,
    TrainResult,
    format_metrics_line,
    parse_metrics_line,
    train,
    train_step,
    validation_psnr,
)

__all__ = [
    "TrainConfig",
    "load_train_config",
    "parse_config_text",
    "learning_rate",
    "clip_grad_norm",
    "Adam",
    "train",
    "train_step",
    "validation_psnr",
    "TrainResult",
    "TrainingDivergedError",
    "METRIC_FIELDS",
    "format_metrics_line",
    "parse_metrics_line",
]
