"""Network building blocks: RAB, SFFB, MFB, UFFB and the uncertainty head."""
from blocks.fusion import MFB, SFFB, UFFB, UFFB_VARIANTS, UFFBVariant, resize_to
from blocks.layers import Conv2d
from blocks.residual import RAB, BlockStack, ResBlock
from blocks.store import BRANCH_GAIN, LINEAR_GAIN, RELU_GAIN, ParameterStore
from blocks.uncertainty import UncertaintyHead

__all__ = [
    "ParameterStore",
    "RELU_GAIN",
    "LINEAR_GAIN",
    "BRANCH_GAIN",
    "Conv2d",
    "RAB",
    "ResBlock",
    "BlockStack",
    "SFFB",
    "MFB",
    "UFFB",
    "UFFB_VARIANTS",
    "UFFBVariant",
    "UncertaintyHead",
    "resize_to",
]
