"""
Feature fusion blocks.

SFFB injects shallow features of the downsampled rainy image into the
encoder, MFB merges encoder features of all three scales for one decoder
scale, and UFFB folds the uncertainty-head features back into the decoder.
"""
import logging
from typing import Literal, Sequence

from diffcore import Tensor, ops
from diffcore.tensor import ShapeError

from blocks.layers import Conv2d
from blocks.store import BRANCH_GAIN, ParameterStore

logger = logging.getLogger(__name__)

UFFBVariant = Literal["B1", "B2", "B3"]
UFFB_VARIANTS: tuple[str, ...] = ("B1", "B2", "B3")


class SFFB:
    """
    Supervised feature fusion block.

    S = Conv3x3(image); G = Conv1x1(f_in); M = Conv1x1(S)
    out = G * M + Conv1x1(f_in)

    M starts near one, so a fresh block is close to G + Conv1x1(f_in).
    """

    def __init__(self, store: ParameterStore, name: str, channels: int, image_channels: int = 3):
        self.channels = channels
        self.image_conv = Conv2d(store, f"{name}.image_conv", image_channels, channels, 3)
        self.feature_gate = Conv2d(store, f"{name}.feature_gate", channels, channels, 1)
        self.image_gate = Conv2d(store, f"{name}.image_gate", channels, channels, 1, gain=BRANCH_GAIN, bias=1.0)
        self.skip = Conv2d(store, f"{name}.skip", channels, channels, 1)

    def __call__(self, f_in: Tensor, rain_image: Tensor) -> Tensor:
        if f_in.shape[0] != rain_image.shape[0] or f_in.shape[2:] != rain_image.shape[2:]:
            raise ShapeError(f"SFFB: features {f_in.shape} and image {rain_image.shape} do not match spatially")
        shallow = self.image_conv(rain_image)
        gated = ops.mul(self.feature_gate(f_in), self.image_gate(shallow))
        return ops.add(gated, self.skip(f_in))


def resize_to(x: Tensor, source_level: int, target_level: int) -> Tensor:
    """Move a feature map between pyramid levels (0 = full, 1 = 1/2, 2 = 1/4)."""
    while source_level < target_level:
        x = ops.downsample_avg2(x)
        source_level += 1
    while source_level > target_level:
        x = ops.upsample_bilinear2(x)
        source_level -= 1
    return x


class MFB:
    """
    Multi-stage fusion block for one decoder level.

    Every encoder feature is resized to the target level, the results are
    concatenated, then refined by Conv1x1 followed by Conv3x3.
    """

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        encoder_channels: Sequence[int],
        target_level: int,
        out_channels: int,
    ):
        if not 0 <= target_level < len(encoder_channels):
            raise ValueError(f"MFB target level {target_level} outside 0..{len(encoder_channels) - 1}")
        self.encoder_channels = tuple(encoder_channels)
        self.target_level = target_level
        self.reduce = Conv2d(store, f"{name}.reduce", sum(encoder_channels), out_channels, 1)
        self.refine = Conv2d(store, f"{name}.refine", out_channels, out_channels, 3)

    def __call__(self, encoder_features: Sequence[Tensor]) -> Tensor:
        if len(encoder_features) != len(self.encoder_channels):
            raise ShapeError(f"MFB: expected {len(self.encoder_channels)} encoder features, got {len(encoder_features)}")
        batch = encoder_features[0].shape[0]
        for level, feature in enumerate(encoder_features):
            if feature.shape[0] != batch:
                raise ShapeError(f"MFB: batch size {feature.shape[0]} at level {level} differs from {batch}")
        resized = [resize_to(f, level, self.target_level) for level, f in enumerate(encoder_features)]
        return self.refine(self.reduce(ops.concat_channels(resized)))


class UFFB:
    """
    Uncertainty feature fusion block.

    B3 (default): out = f + Fuse(P_f(f) + P_a(alpha_tap) + P_b(beta_tap))
    B2: out = f + Fuse(concat(P_f(f), P_a(alpha_tap), P_b(beta_tap)))
    B1: out = f + Fuse(concat(f, alpha_tap, beta_tap))
    where every P_* and Fuse is a 1x1 convolution.
    """

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        channels: int,
        tap_channels: int,
        variant: UFFBVariant = "B3",
    ):
        if variant not in UFFB_VARIANTS:
            raise ValueError(f"Unknown UFFB variant '{variant}', expected one of {UFFB_VARIANTS}")
        self.variant = variant
        self.channels = channels
        self.tap_channels = tap_channels

        if variant == "B1":
            self.projections: tuple[Conv2d, ...] = ()
            fuse_in = channels + 2 * tap_channels
        else:
            self.projections = (
                Conv2d(store, f"{name}.project_features", channels, channels, 1),
                Conv2d(store, f"{name}.project_alpha", tap_channels, channels, 1),
                Conv2d(store, f"{name}.project_beta", tap_channels, channels, 1),
            )
            fuse_in = channels if variant == "B3" else 3 * channels
        self.fuse = Conv2d(store, f"{name}.fuse", fuse_in, channels, 1, gain=BRANCH_GAIN)

    def __call__(self, f: Tensor, alpha_tap: Tensor, beta_tap: Tensor) -> Tensor:
        for label, tensor in (("alpha_tap", alpha_tap), ("beta_tap", beta_tap)):
            if tensor.shape[0] != f.shape[0] or tensor.shape[2:] != f.shape[2:]:
                raise ShapeError(f"UFFB: {label} {tensor.shape} does not match features {f.shape}")

        inputs = (f, alpha_tap, beta_tap)
        if self.variant == "B1":
            fused = ops.concat_channels(inputs)
        else:
            projected = [conv(x) for conv, x in zip(self.projections, inputs)]
            if self.variant == "B3":
                fused = ops.add(ops.add(projected[0], projected[1]), projected[2])
            else:
                fused = ops.concat_channels(projected)
        return ops.add(f, self.fuse(fused))
