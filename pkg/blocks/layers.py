"""Convolution layer bound to a ParameterStore."""
from diffcore import Tensor, ops

from blocks.store import LINEAR_GAIN, ParameterStore


class Conv2d:
    """Cross-correlation with a learned kernel and bias."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        in_channels: int,
        out_channels: int,
        kernel_size: int = 3,
        stride: int = 1,
        padding: int | None = None,
        gain: float = LINEAR_GAIN,
        bias: float = 0.0,
    ):
        """
        Register ``{name}.weight`` and ``{name}.bias``.

        Args:
            store: Parameter store receiving the arrays
            name: Hierarchical prefix
            in_channels: Input channel count
            out_channels: Output channel count
            kernel_size: Square kernel size
            stride: Window step
            padding: Zero padding (default: kernel_size // 2, size-preserving)
            gain: Fan-in initialization gain (RELU_GAIN before a ReLU)
            bias: Initial value of every bias entry
        """
        self.name = name
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = kernel_size // 2 if padding is None else padding
        self.weight = store.fan_in_normal(
            f"{name}.weight", (out_channels, in_channels, kernel_size, kernel_size), gain
        )
        self.bias = store.zeros(f"{name}.bias", (out_channels,))
        if bias:
            self.bias.data[...] = bias

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.weight, self.bias, stride=self.stride, padding=self.padding)
