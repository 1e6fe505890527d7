"""
UMFFNet assembly.

Three-scale encoder-decoder with multi-scale inputs and outputs. Widths are
{C, 2C, 4C} at scales {1, 1/2, 1/4}; the 1/4 scale holds 2N blocks split
evenly around the MFB fusion, the other scales N blocks on each path.
"""
import logging
from dataclasses import dataclass

import numpy as np

from blocks import BRANCH_GAIN, MFB, SFFB, UFFB, BlockStack, Conv2d, ParameterStore, UncertaintyHead
from diffcore import Tensor, ops
from diffcore.tensor import ShapeError
from ggd import GGDParamMaps, initial_beta_bias, param_transform, uncertainty_map
from model.config import ModelConfig

logger = logging.getLogger(__name__)

Pyramid = tuple[Tensor, Tensor, Tensor]

SCALES = 3


@dataclass
class ModelOutput:
    """
    Result of one forward pass.

    Attributes:
        derained: Predictions at scales 1, 1/2, 1/4 (unclamped)
        params: GGD maps at full scale, None without uncertainty estimation
        uncertainty: Per-pixel variance at full scale (batch, 1, H, W), or None
    """

    derained: Pyramid
    params: GGDParamMaps | None
    uncertainty: np.ndarray | None

    def export(self) -> list[np.ndarray]:
        """Derained pyramid clamped to [0, 1] for saving or scoring."""
        return [np.clip(image.data, 0.0, 1.0) for image in self.derained]


def input_pyramid(image: Tensor) -> Pyramid:
    """Rainy image at scales 1, 1/2 and 1/4 via 2x2 averaging."""
    half = ops.downsample_avg2(image)
    return image, half, ops.downsample_avg2(half)


def check_input(shape: tuple[int, ...]) -> None:
    """Reject batches the three-scale network cannot process."""
    if len(shape) != 4 or shape[1] != 3:
        raise ShapeError(f"expected RGB batch (batch, 3, H, W), got shape {shape}")
    height, width = shape[2], shape[3]
    if height % 4 or width % 4 or height < 4 or width < 4:
        raise ShapeError(
            f"input height and width must be positive multiples of 4, got {height}x{width}; "
            f"crop to {height - height % 4}x{width - width % 4}"
        )


class UMFFNet:
    """
    Uncertainty-driven multi-scale feature fusion network.

    Construct through :func:`build`. The instance holds no mutable state
    besides the parameters in its store, so concurrent inference is safe.
    """

    def __init__(self, config: ModelConfig, store: ParameterStore):
        self.config = config
        self.store = store
        c = config.base_channels
        n = config.base_blocks
        widths = (c, 2 * c, 4 * c)
        self.widths = widths
        rab = config.use_rab

        # Encoder, registered in dataflow order
        self.stem = Conv2d(store, "stem", 3, c, 3)
        self.encoders: list[BlockStack] = []
        self.downs: list[Conv2d] = []
        self.sffbs: list[SFFB] = []
        for level in range(SCALES):
            if level > 0:
                self.downs.append(
                    Conv2d(store, f"down{level}", widths[level - 1], widths[level], 3, stride=2, padding=1)
                )
                if config.enable_sffb:
                    self.sffbs.append(SFFB(store, f"sffb{level + 1}", widths[level]))
            self.encoders.append(BlockStack(store, f"enc{level + 1}", widths[level], n, attention=rab))

        self.mfbs: list[MFB] = []
        if config.enable_mfb:
            self.mfbs = [MFB(store, f"mfb{level + 1}", widths, level, widths[level]) for level in range(SCALES)]

        # Decoder ascends 1/4 -> 1/2 -> 1
        self.decoders: dict[int, BlockStack] = {}
        self.ups: dict[int, Conv2d] = {}
        self.heads: dict[int, Conv2d] = {}
        for level in reversed(range(SCALES)):
            if level < SCALES - 1:
                self.ups[level] = Conv2d(store, f"up{level + 1}", widths[level + 1], widths[level], 1)
            self.decoders[level] = BlockStack(store, f"dec{level + 1}", widths[level], n, attention=rab)
            if level > 0:
                self.heads[level] = Conv2d(store, f"out{level + 1}", widths[level], 3, 3, gain=BRANCH_GAIN)

        self.alpha_head: UncertaintyHead | None = None
        self.beta_head: UncertaintyHead | None = None
        self.uffb: UFFB | None = None
        if config.enable_uncertainty:
            self.alpha_head = UncertaintyHead(store, "alpha_head", c)
            self.beta_head = UncertaintyHead(store, "beta_head", c, output_bias=initial_beta_bias())
            if config.enable_uffb:
                self.uffb = UFFB(store, "uffb", c, self.alpha_head.tap_channels, config.uffb_variant)
        self.heads[0] = Conv2d(store, "out1", c, 3, 3, gain=BRANCH_GAIN)

        logger.info(
            f"Built UMFFNet variant={config.variant} N={n} C={c} "
            f"with {store.count():,} parameters in {len(store)} arrays"
        )

    def __call__(self, image: Tensor | np.ndarray) -> ModelOutput:
        return self.forward(image)

    def forward(self, image: Tensor | np.ndarray) -> ModelOutput:
        """
        Derain a full-scale batch.

        Args:
            image: Rainy RGB batch (batch, 3, H, W); H and W multiples of 4

        Returns:
            ModelOutput with the derained pyramid and, when enabled, GGD maps

        Raises:
            ShapeError: If the spatial size is not a multiple of 4
        """
        if not isinstance(image, Tensor):
            image = Tensor(image, dtype=self.store.dtype)
        check_input(image.shape)
        if image.dtype != self.store.dtype:
            image = Tensor(image.data, dtype=self.store.dtype)

        inputs = input_pyramid(image)

        encoded: list[Tensor] = []
        features = self.stem(inputs[0])
        for level in range(SCALES):
            if level > 0:
                features = self.downs[level - 1](features)
                if self.sffbs:
                    features = self.sffbs[level - 1](features, inputs[level])
            features = self.encoders[level](features)
            encoded.append(features)

        fused = [mfb(encoded) for mfb in self.mfbs] if self.mfbs else encoded

        outputs: dict[int, Tensor] = {}
        decoded: Tensor | None = None
        for level in reversed(range(SCALES)):
            features = fused[level]
            if decoded is not None:
                features = ops.add(features, self.ups[level](ops.upsample_bilinear2(decoded)))
            decoded = self.decoders[level](features)
            if level > 0:
                outputs[level] = ops.add(inputs[level], self.heads[level](decoded))

        params = None
        uncertainty = None
        if self.alpha_head is not None and self.beta_head is not None:
            raw_alpha, alpha_tap = self.alpha_head(decoded)
            raw_beta, beta_tap = self.beta_head(decoded)
            params = param_transform(raw_alpha, raw_beta)
            uncertainty = uncertainty_map(params)
            if self.uffb is not None:
                decoded = self.uffb(decoded, alpha_tap, beta_tap)
        outputs[0] = ops.add(inputs[0], self.heads[0](decoded))

        return ModelOutput(
            derained=(outputs[0], outputs[1], outputs[2]),
            params=params,
            uncertainty=uncertainty,
        )

    def output_heads(self) -> list[Conv2d]:
        """Output heads for scales 1, 1/2, 1/4."""
        return [self.heads[level] for level in range(SCALES)]


def build(config: ModelConfig, seed: int = 0) -> tuple[UMFFNet, ParameterStore]:
    """
    Construct a model with deterministic initial weights.

    Args:
        config: Variant descriptor
        seed: Initialization seed

    Returns:
        (model, store); the store is also reachable as ``model.store``
    """
    store = ParameterStore(seed=seed)
    return UMFFNet(config, store), store
