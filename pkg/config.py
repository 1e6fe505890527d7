"""
Central configuration management using pydantic-settings.
Loads configuration from environment variables (prefix UMFF_) and .env file.
"""
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit configuration settings."""

    model_config = SettingsConfigDict(
        env_prefix="UMFF_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Numerics
    precision: Literal["float32", "float64"] = "float32"  # float64 = gradient-check mode

    # Data
    data_workers: int = Field(default=0, ge=0)  # 0 = load in the calling thread
    default_crop: int = 64

    # Training artifacts
    metrics_log_name: str = "metrics.log"
    checkpoint_name: str = "last.ckpt"

    # Evaluation
    inference_repeats: int = Field(default=5, ge=1)

    # Logging
    log_level: str = "INFO"

    @property
    def log_format(self) -> str:
        """Format string shared by every entrypoint."""
        return "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


# Global settings instance
settings = Settings()
