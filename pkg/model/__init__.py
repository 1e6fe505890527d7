"""UMFFNet assembly, variants, parameter accounting and checkpoints."""
from model.checkpoint import (
    Checkpoint,
    CheckpointError,
    OptimizerSnapshot,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    load_model,
    restore_into,
    save_checkpoint,
)
from model.config import (
    ABLATION_PRESETS,
    PUBLISHED_PARAM_COUNTS,
    UFFB_STRUCTURE_PRESETS,
    VARIANT_BLOCKS,
    ModelConfig,
)
from model.network import ModelOutput, Pyramid, UMFFNet, build, check_input, input_pyramid
from model.summary import LayerRow, count_params, summarize, summary_rows

__all__ = [
    "ModelConfig",
    "ABLATION_PRESETS",
    "UFFB_STRUCTURE_PRESETS",
    "PUBLISHED_PARAM_COUNTS",
    "VARIANT_BLOCKS",
    "UMFFNet",
    "ModelOutput",
    "Pyramid",
    "build",
    "check_input",
    "input_pyramid",
    "count_params",
    "summarize",
    "summary_rows",
    "LayerRow",
    "Checkpoint",
    "CheckpointError",
    "OptimizerSnapshot",
    "encode_checkpoint",
    "decode_checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "restore_into",
    "load_model",
]
