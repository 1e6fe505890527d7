"""Residual blocks: with simplified channel attention (RAB) and without."""
from diffcore import Tensor, ops
from diffcore.tensor import ShapeError

from blocks.layers import Conv2d
from blocks.store import BRANCH_GAIN, RELU_GAIN, ParameterStore


class RAB:
    """
    Residual attention block.

    x1 = Conv3x3(ReLU(Conv3x3(x)))
    out = x + x1 * Conv1x1(GlobalAvgPool(x1))

    The 1x1 gate is a per-channel multiplier broadcast over space; no sigmoid.
    It starts near one and the branch near zero, so a fresh block is close to
    the identity.
    """

    def __init__(self, store: ParameterStore, name: str, channels: int):
        self.channels = channels
        self.conv1 = Conv2d(store, f"{name}.conv1", channels, channels, 3, gain=RELU_GAIN)
        self.conv2 = Conv2d(store, f"{name}.conv2", channels, channels, 3, gain=BRANCH_GAIN)
        self.attention = Conv2d(store, f"{name}.attention", channels, channels, 1, gain=BRANCH_GAIN, bias=1.0)

    def __call__(self, x: Tensor) -> Tensor:
        _check_channels(x, self.channels, "RAB")
        x1 = self.conv2(ops.relu(self.conv1(x)))
        gate = self.attention(ops.global_avg_pool(x1))
        return ops.add(x, ops.mul(x1, gate))


class ResBlock:
    """Plain residual block: out = x + Conv3x3(ReLU(Conv3x3(x)))."""

    def __init__(self, store: ParameterStore, name: str, channels: int):
        self.channels = channels
        self.conv1 = Conv2d(store, f"{name}.conv1", channels, channels, 3, gain=RELU_GAIN)
        self.conv2 = Conv2d(store, f"{name}.conv2", channels, channels, 3, gain=BRANCH_GAIN)

    def __call__(self, x: Tensor) -> Tensor:
        _check_channels(x, self.channels, "ResBlock")
        return ops.add(x, self.conv2(ops.relu(self.conv1(x))))


class BlockStack:
    """Sequence of residual blocks of one width."""

    def __init__(self, store: ParameterStore, name: str, channels: int, count: int, attention: bool = True):
        block_cls = RAB if attention else ResBlock
        prefix = "rab" if attention else "res"
        self.blocks = [block_cls(store, f"{name}.{prefix}{i}", channels) for i in range(count)]

    def __len__(self) -> int:
        return len(self.blocks)

    def __call__(self, x: Tensor) -> Tensor:
        for block in self.blocks:
            x = block(x)
        return x


def _check_channels(x: Tensor, expected: int, block: str) -> None:
    if x.data.ndim != 4 or x.shape[1] != expected:
        raise ShapeError(f"{block}: expected {expected} input channels, got shape {x.shape}")
