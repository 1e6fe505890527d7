"""Named, ordered storage of trainable arrays."""
import logging
import math
from typing import Iterator

import numpy as np

from diffcore import Tensor, default_dtype

logger = logging.getLogger(__name__)

# Standard deviation multipliers for fan-in initialization
RELU_GAIN = math.sqrt(2.0)
LINEAR_GAIN = 1.0
# Last layer of a residual branch or output head starts near zero
BRANCH_GAIN = 0.1


class ParameterStore:
    """
    Ordered mapping of hierarchical names (``enc1.rab0.conv1.weight``) to
    trainable tensors.

    Initial values are drawn from a single seeded generator in registration
    order, so a fixed model configuration and seed always produce the same
    arrays.
    """

    def __init__(self, seed: int = 0, dtype: type[np.floating] | None = None):
        """
        Initialize store.

        Args:
            seed: Seed of the initialization generator
            dtype: Storage type (default: current diffcore precision)
        """
        self.seed = seed
        self.dtype = dtype or default_dtype()
        self._rng = np.random.default_rng(seed)
        self._params: dict[str, Tensor] = {}

    def add(self, name: str, values: np.ndarray) -> Tensor:
        """Register a new parameter; names must be unique."""
        if name in self._params:
            raise ValueError(f"Duplicate parameter name: {name}")
        tensor = Tensor(values, requires_grad=True, name=name, dtype=self.dtype)
        self._params[name] = tensor
        return tensor

    def fan_in_normal(self, name: str, shape: tuple[int, int, int, int], gain: float = RELU_GAIN) -> Tensor:
        """
        Convolution kernel drawn from N(0, gain² / (in_ch * kh * kw)).

        RELU_GAIN is He initialization for kernels feeding a ReLU; LINEAR_GAIN
        keeps the second moment of a linear path.
        """
        fan_in = shape[1] * shape[2] * shape[3]
        values = self._rng.normal(0.0, gain / np.sqrt(fan_in), size=shape)
        return self.add(name, values)

    def zeros(self, name: str, shape: tuple[int, ...]) -> Tensor:
        return self.add(name, np.zeros(shape))

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self._params.items())

    def names(self) -> list[str]:
        return list(self._params)

    def tensors(self) -> list[Tensor]:
        return list(self._params.values())

    def count(self) -> int:
        """Total number of scalar parameters."""
        return int(sum(t.size for t in self._params.values()))

    def zero_grad(self) -> None:
        for tensor in self._params.values():
            tensor.zero_grad()

    def state(self) -> dict[str, np.ndarray]:
        """Copy of every array, keyed by name in registration order."""
        return {name: tensor.data.copy() for name, tensor in self._params.items()}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        """
        Overwrite parameter values in place.

        Raises:
            ValueError: Naming the first parameter whose name or shape differs
        """
        expected = list(self._params)
        given = list(state)
        for index, name in enumerate(expected):
            if index >= len(given) or given[index] != name:
                found = given[index] if index < len(given) else "<missing>"
                raise ValueError(f"Parameter mismatch at position {index}: expected '{name}', found '{found}'")
            if state[name].shape != self._params[name].shape:
                raise ValueError(
                    f"Parameter mismatch for '{name}': expected shape {self._params[name].shape}, "
                    f"found {state[name].shape}"
                )
        if len(given) > len(expected):
            raise ValueError(f"Unexpected extra parameter '{given[len(expected)]}'")

        for name, values in state.items():
            self._params[name].data[...] = values.astype(self.dtype)
