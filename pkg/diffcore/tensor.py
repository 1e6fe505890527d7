"""
Tensors and the gradient tape.

A Tensor wraps a contiguous numpy array. Operations executed while a GradTape
is active append a record (output, inputs, backward function) to that tape;
``backward`` replays the records in reverse to accumulate gradients.
"""
import contextlib
import logging
import threading
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from config import settings

logger = logging.getLogger(__name__)

_DTYPES = {"float32": np.float32, "float64": np.float64}


class ShapeError(ValueError):
    """Raised when operand shapes violate an operator contract."""


class NonFiniteError(FloatingPointError):
    """Raised when NaN or Inf reaches an operation boundary."""


_state = threading.local()


def default_dtype() -> type[np.floating]:
    """Floating-point type used for new tensors in the current thread."""
    return getattr(_state, "dtype", _DTYPES[settings.precision])


@contextlib.contextmanager
def precision(name: str) -> Iterator[None]:
    """
    Temporarily switch the execution precision.

    Args:
        name: "float32" (training) or "float64" (gradient checks)
    """
    if name not in _DTYPES:
        raise ValueError(f"Unknown precision '{name}', expected one of {sorted(_DTYPES)}")
    previous = getattr(_state, "dtype", None)
    _state.dtype = _DTYPES[name]
    try:
        yield
    finally:
        if previous is None:
            del _state.dtype
        else:
            _state.dtype = previous


class Tensor:
    """
    Dense array with optional gradient.

    Activations are rank-4 (batch, channels, height, width); convolution biases
    are rank-1; reductions produce a (1, 1, 1, 1) scalar.
    """

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(
        self,
        data: np.ndarray | Sequence | float,
        requires_grad: bool = False,
        name: str | None = None,
        dtype: type[np.floating] | None = None,
    ):
        array = np.ascontiguousarray(data, dtype=dtype or default_dtype())
        check_finite(array, name or "tensor")
        self.data = array
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        """Return the underlying array (no copy)."""
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, dtype=self.data.dtype)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"

    # Operator sugar; the functional forms live in diffcore.ops
    def __add__(self, other: "Tensor") -> "Tensor":
        from diffcore.ops import add

        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        from diffcore.ops import sub

        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        from diffcore.ops import mul

        return mul(self, other)

    def __truediv__(self, other: "Tensor") -> "Tensor":
        from diffcore.ops import div

        return div(self, other)


def check_finite(array: np.ndarray, label: str) -> None:
    """Reject NaN/Inf values."""
    if not np.isfinite(array).all():
        bad = int(np.size(array) - np.count_nonzero(np.isfinite(array)))
        raise NonFiniteError(f"{label}: {bad} non-finite value(s) in array of shape {array.shape}")


BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


@dataclass
class TapeRecord:
    """One executed operation."""

    op: str
    output: Tensor
    inputs: tuple[Tensor, ...]
    backward: BackwardFn


class GradTape:
    """
    Ordered record of executed operations.

    Example:
        >>> with GradTape() as tape:
        ...     loss = ops.sum(ops.mul(x, x))
        >>> backward(loss, tape)
    """

    def __init__(self) -> None:
        self.records: list[TapeRecord] = []
        self._previous: GradTape | None = None

    def __enter__(self) -> "GradTape":
        self._previous = active_tape()
        _state.tape = self
        return self

    def __exit__(self, *exc_info) -> None:
        _state.tape = self._previous
        self._previous = None

    def __len__(self) -> int:
        return len(self.records)

    def record(self, op: str, output: Tensor, inputs: tuple[Tensor, ...], backward: BackwardFn) -> None:
        self.records.append(TapeRecord(op, output, inputs, backward))


def active_tape() -> GradTape | None:
    """Tape receiving records in the current thread, if any."""
    return getattr(_state, "tape", None)


def make_result(op: str, data: np.ndarray, inputs: tuple[Tensor, ...], backward: BackwardFn) -> Tensor:
    """
    Wrap an operator result and record it on the active tape.

    The output requires a gradient when any input does; nothing is recorded
    outside a tape.
    """
    check_finite(data, op)
    needs_grad = any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=needs_grad, dtype=data.dtype)
    tape = active_tape()
    if needs_grad and tape is not None:
        tape.record(op, out, inputs, backward)
    return out


def backward(loss: Tensor, tape: GradTape) -> None:
    """
    Populate ``grad`` of every tensor reachable from ``loss`` on ``tape``.

    Gradients accumulate into existing ``grad`` arrays so parameters shared by
    several records receive the sum of their contributions.

    Raises:
        ShapeError: If loss is not a single-element tensor
    """
    if loss.size != 1:
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")

    loss.grad = np.ones_like(loss.data)
    logger.debug(f"Replaying {len(tape)} tape records")

    for record in reversed(tape.records):
        if record.output.grad is None:
            continue
        grads = record.backward(record.output.grad)
        for tensor, grad in zip(record.inputs, grads):
            if grad is None or not tensor.requires_grad:
                continue
            if grad.shape != tensor.shape:
                raise ShapeError(
                    f"{record.op}: gradient shape {grad.shape} does not match input shape {tensor.shape}"
                )
            if tensor.grad is None:
                tensor.grad = np.array(grad, dtype=tensor.dtype, copy=True)
            else:
                tensor.grad += grad
