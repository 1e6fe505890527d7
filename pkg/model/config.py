"""Model variant descriptors."""
import json
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from blocks import UFFB_VARIANTS, UFFBVariant

VariantName = Literal["T", "B", "L", "custom"]

# Base block count per named variant; every named variant uses 32 base channels
VARIANT_BLOCKS: dict[str, int] = {"T": 1, "B": 10, "L": 20}
VARIANT_CHANNELS = 32

# Published parameter counts (millions) for the named variants
PUBLISHED_PARAM_COUNTS: dict[str, float] = {"T": 1.52, "B": 8.88, "L": 17.07}

# Component ablation ladder: each step adds one component to the previous one
ABLATION_PRESETS: dict[str, dict[str, bool]] = {
    "Base": dict(enable_uncertainty=False, enable_uffb=False, enable_sffb=False, enable_mfb=False, use_rab=False),
    "V1": dict(enable_uncertainty=True, enable_uffb=False, enable_sffb=False, enable_mfb=False, use_rab=False),
    "V2": dict(enable_uncertainty=True, enable_uffb=True, enable_sffb=False, enable_mfb=False, use_rab=False),
    "V3": dict(enable_uncertainty=True, enable_uffb=True, enable_sffb=True, enable_mfb=False, use_rab=False),
    "V4": dict(enable_uncertainty=True, enable_uffb=True, enable_sffb=True, enable_mfb=True, use_rab=False),
    "V5": dict(enable_uncertainty=True, enable_uffb=True, enable_sffb=True, enable_mfb=True, use_rab=True),
}

# UFFB structure comparison on top of the full ladder
UFFB_STRUCTURE_PRESETS: dict[str, dict[str, bool | str]] = {
    variant: {**ABLATION_PRESETS["V5"], "uffb_variant": variant} for variant in UFFB_VARIANTS
}


class ModelConfig(BaseModel):
    """
    Variant descriptor for UMFFNet.

    Named variants fix the depth (T: N=1, B: N=10, L: N=20) and the width
    (C=32); only ``custom`` may choose both freely.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    variant: VariantName = "T"
    base_blocks: int = Field(default=1, ge=1)
    base_channels: int = Field(default=VARIANT_CHANNELS, ge=1)
    enable_uncertainty: bool = True
    enable_uffb: bool = True
    enable_sffb: bool = True
    enable_mfb: bool = True
    use_rab: bool = True
    uffb_variant: UFFBVariant = "B3"

    @model_validator(mode="before")
    @classmethod
    def _fill_variant_depth(cls, values: Any) -> Any:
        if isinstance(values, dict):
            variant = values.get("variant", "T")
            if variant in VARIANT_BLOCKS and "base_blocks" not in values:
                values = {**values, "base_blocks": VARIANT_BLOCKS[variant]}
        return values

    @model_validator(mode="after")
    def _check_variant(self) -> "ModelConfig":
        if self.variant in VARIANT_BLOCKS:
            if self.base_blocks != VARIANT_BLOCKS[self.variant]:
                raise ValueError(
                    f"variant {self.variant} requires base_blocks={VARIANT_BLOCKS[self.variant]}, "
                    f"got {self.base_blocks}; use variant=custom to override"
                )
            if self.base_channels != VARIANT_CHANNELS:
                raise ValueError(
                    f"variant {self.variant} requires base_channels={VARIANT_CHANNELS}, "
                    f"got {self.base_channels}; use variant=custom to override"
                )
        if self.enable_uffb and not self.enable_uncertainty:
            raise ValueError("enable_uffb requires enable_uncertainty (UFFB consumes the uncertainty heads)")
        return self

    @classmethod
    def from_variant(cls, variant: VariantName, **overrides: Any) -> "ModelConfig":
        """Config for a named variant with optional toggle overrides."""
        return cls(variant=variant, **overrides)

    @classmethod
    def ablation(cls, preset: str, variant: VariantName = "T", **overrides: Any) -> "ModelConfig":
        """
        Config for one step of the component ablation ladder.

        Args:
            preset: One of Base, V1, V2, V3, V4, V5 (V5 is the full model)
            variant: Depth/width variant
        """
        if preset not in ABLATION_PRESETS:
            raise ValueError(f"Unknown ablation preset '{preset}', expected one of {list(ABLATION_PRESETS)}")
        return cls(variant=variant, **{**ABLATION_PRESETS[preset], **overrides})

    def record(self) -> str:
        """Canonical JSON record (sorted keys) stored in checkpoints."""
        return json.dumps(self.model_dump(), sort_keys=True)
