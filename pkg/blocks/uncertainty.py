"""Uncertainty estimation head."""
from diffcore import Tensor, ops

from blocks.layers import Conv2d
from blocks.store import BRANCH_GAIN, RELU_GAIN, ParameterStore


class UncertaintyHead:
    """
    Three 3x3 convolution stages predicting one raw GGD parameter map.

    Stages one and two are followed by ReLU; the activation after stage two is
    exposed as ``tap`` for UFFB. Stage three emits the unconstrained 1-channel
    map consumed by ggd.param_transform.
    """

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        channels: int,
        tap_channels: int | None = None,
        output_bias: float = 0.0,
    ):
        tap_channels = tap_channels or channels
        self.tap_channels = tap_channels
        self.conv1 = Conv2d(store, f"{name}.conv1", channels, tap_channels, 3, gain=RELU_GAIN)
        self.conv2 = Conv2d(store, f"{name}.conv2", tap_channels, tap_channels, 3, gain=RELU_GAIN)
        self.conv3 = Conv2d(store, f"{name}.conv3", tap_channels, 1, 3, gain=BRANCH_GAIN, bias=output_bias)

    def __call__(self, features: Tensor) -> tuple[Tensor, Tensor]:
        """
        Returns:
            (raw_map, tap_features)
        """
        tap = ops.relu(self.conv2(ops.relu(self.conv1(features))))
        # No ReLU after stage three; param_transform expects a signed raw map
        return self.conv3(tap), tap
