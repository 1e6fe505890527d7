"""
Training configuration.

Config files are flat ``key=value`` UTF-8 text. ``#`` starts a comment,
blank lines are ignored, and every key must be a TrainConfig field.
"""
import logging
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator

from blocks import UFFBVariant
from losses import LossWeights
from model import ModelConfig
from model.config import VariantName

logger = logging.getLogger(__name__)

# Keys forwarded to ModelConfig
NETWORK_KEYS = (
    "variant",
    "base_blocks",
    "base_channels",
    "enable_uncertainty",
    "enable_uffb",
    "enable_sffb",
    "enable_mfb",
    "use_rab",
    "uffb_variant",
)


class TrainConfig(BaseModel):
    """
    Desk-scale training run.

    Schedule defaults are the desk values (30 epochs, batch 4, halve the rate
    every 10 epochs); the long schedule is 300 epochs, batch 8, every 50.
    """

    model_config = ConfigDict(extra="forbid")

    # Schedule
    epochs: int = Field(default=30, ge=1)
    batch_size: int = Field(default=4, ge=1)
    max_steps: int | None = Field(default=None, ge=1)
    initial_lr: float = Field(default=1e-3, ge=0.0)
    lr_decay_factor: float = Field(default=0.5, gt=0.0, le=1.0)
    lr_decay_every: int = Field(default=10, ge=1)

    # Data
    crop: int = Field(default=64, ge=4)
    seed: int = 0
    augment: bool = True

    # Loss weights
    lambda_fre: float = Field(default=0.1, ge=0.0)
    lambda_ue: float = Field(default=0.1, ge=0.0)

    # Optimizer
    adam_beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    grad_clip: float | None = Field(default=1.0, gt=0.0)

    # Network
    variant: VariantName = "T"
    base_blocks: int | None = Field(default=None, ge=1)
    base_channels: int | None = Field(default=None, ge=1)
    enable_uncertainty: bool = True
    enable_uffb: bool = True
    enable_sffb: bool = True
    enable_mfb: bool = True
    use_rab: bool = True
    uffb_variant: UFFBVariant = "B3"

    @field_validator("crop")
    @classmethod
    def _crop_multiple_of_four(cls, value: int) -> int:
        if value % 4:
            raise ValueError(f"crop must be a multiple of 4, got {value}")
        return value

    @property
    def loss_weights(self) -> LossWeights:
        return LossWeights(lambda_fre=self.lambda_fre, lambda_ue=self.lambda_ue)

    def network(self) -> ModelConfig:
        """ModelConfig described by the network keys."""
        values = {key: getattr(self, key) for key in NETWORK_KEYS if getattr(self, key) is not None}
        return ModelConfig(**values)

    def to_text(self) -> str:
        """Effective configuration in the same key=value format it is read from."""
        lines = []
        for key, value in self.model_dump().items():
            if value is None:
                continue
            lines.append(f"{key}={str(value).lower() if isinstance(value, bool) else value}")
        return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> dict[str, str]:
    """
    Split ``key=value`` lines into a mapping of raw strings.

    Raises:
        ValueError: On malformed lines, duplicate or unknown keys
    """
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"Config line {number} is not key=value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in TrainConfig.model_fields:
            raise ValueError(f"Unknown config key '{key}' on line {number}")
        if key in values:
            raise ValueError(f"Duplicate config key '{key}' on line {number}")
        values[key] = value
    return values


def load_train_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> TrainConfig:
    """
    Build a TrainConfig from an optional file plus overrides.

    Overrides (e.g. command-line flags) win over file values; None values in
    ``overrides`` are ignored.

    Raises:
        FileNotFoundError: If ``path`` does not exist
        ValueError: On unknown keys or invalid values
    """
    values: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        values.update(parse_config_text(path.read_text(encoding="utf-8")))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in TrainConfig.model_fields:
            raise ValueError(f"Unknown config key '{key}'")
        values[key] = value
    config = TrainConfig(**values)
    logger.debug(f"Effective training config: {config.model_dump()}")
    return config
