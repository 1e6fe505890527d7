"""
Binary checkpoint format.

Layout (all integers little-endian u32 unless stated):

    b"UMFF" | version | config length | config JSON (UTF-8) | entry count | entries
    [optimizer flag | step (u64) | entry count | entries]

Each entry: name length | UTF-8 name | rank | dims... | dtype tag | raw values.
Dtype tag 0 is 32-bit float, 1 is 64-bit float (written in 64-bit mode).
"""
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from blocks import ParameterStore
from model.config import ModelConfig
from model.network import UMFFNet, build

logger = logging.getLogger(__name__)

MAGIC = b"UMFF"
FORMAT_VERSION = 1

_DTYPE_TAGS: dict[np.dtype, int] = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
_TAG_DTYPES: dict[int, np.dtype] = {tag: dtype.newbyteorder("<") for dtype, tag in _DTYPE_TAGS.items()}


class CheckpointError(ValueError):
    """Malformed or incompatible checkpoint."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at byte {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


@dataclass
class OptimizerSnapshot:
    """Optimizer step counter plus named moment arrays."""

    step: int
    arrays: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class Checkpoint:
    config: ModelConfig
    params: dict[str, np.ndarray]
    optimizer: OptimizerSnapshot | None = None


class _Reader:
    """Sequential reader that reports the byte offset of any shortfall."""

    def __init__(self, payload: bytes):
        self.payload = payload
        self.position = 0

    def take(self, size: int, what: str) -> bytes:
        end = self.position + size
        if end > len(self.payload):
            raise CheckpointError(f"truncated while reading {what}", self.position)
        chunk = self.payload[self.position : end]
        self.position = end
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]


def _encode_entries(arrays: dict[str, np.ndarray]) -> bytes:
    parts = [struct.pack("<I", len(arrays))]
    for name, array in arrays.items():
        if array.dtype not in _DTYPE_TAGS:
            raise CheckpointError(f"unsupported dtype {array.dtype} for '{name}'")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack(f"<I{array.ndim}I", array.ndim, *array.shape))
        parts.append(struct.pack("<I", _DTYPE_TAGS[array.dtype]))
        parts.append(np.ascontiguousarray(array, dtype=_TAG_DTYPES[_DTYPE_TAGS[array.dtype]]).tobytes())
    return b"".join(parts)


def _decode_entries(reader: _Reader) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    count = reader.u32("entry count")
    for _ in range(count):
        start = reader.position
        name_length = reader.u32("name length")
        try:
            name = reader.take(name_length, "name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointError("parameter name is not valid UTF-8", start) from e
        rank = reader.u32(f"rank of '{name}'")
        shape = tuple(reader.u32(f"dimension of '{name}'") for _ in range(rank))
        tag_position = reader.position
        tag = reader.u32(f"dtype tag of '{name}'")
        if tag not in _TAG_DTYPES:
            raise CheckpointError(f"unknown dtype tag {tag} for '{name}'", tag_position)
        dtype = _TAG_DTYPES[tag]
        size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        values = np.frombuffer(reader.take(size, f"values of '{name}'"), dtype=dtype).reshape(shape)
        if name in arrays:
            raise CheckpointError(f"duplicate parameter '{name}'", start)
        arrays[name] = values.astype(dtype.newbyteorder("="))
    return arrays


def encode_checkpoint(
    config: ModelConfig,
    store: ParameterStore,
    optimizer: OptimizerSnapshot | None = None,
) -> bytes:
    """Serialize a store (and optionally optimizer state) to bytes."""
    record = config.record().encode("utf-8")
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(record)), record, _encode_entries(store.state())]
    if optimizer is not None:
        parts.append(struct.pack("<IQ", 1, optimizer.step))
        parts.append(_encode_entries(optimizer.arrays))
    else:
        parts.append(struct.pack("<I", 0))
    return b"".join(parts)


def decode_checkpoint(payload: bytes) -> Checkpoint:
    """
    Parse checkpoint bytes.

    Raises:
        CheckpointError: On bad magic, unsupported version, truncation or
            trailing bytes, with the byte offset of the problem
    """
    reader = _Reader(payload)
    if reader.take(4, "magic") != MAGIC:
        raise CheckpointError("bad magic, not a UMFF checkpoint", 0)
    version = reader.u32("format version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported format version {version} (expected {FORMAT_VERSION})", 4)

    record_start = reader.position
    record = reader.take(reader.u32("config length"), "config record")
    try:
        config = ModelConfig(**json.loads(record.decode("utf-8")))
    except (UnicodeDecodeError, json.JSONDecodeError, ValidationError, TypeError) as e:
        raise CheckpointError(f"invalid config record: {e}", record_start) from e

    params = _decode_entries(reader)

    optimizer = None
    if reader.u32("optimizer flag"):
        step = reader.u64("optimizer step")
        optimizer = OptimizerSnapshot(step=step, arrays=_decode_entries(reader))

    if reader.position != len(payload):
        raise CheckpointError(f"{len(payload) - reader.position} unexpected trailing bytes", reader.position)
    return Checkpoint(config=config, params=params, optimizer=optimizer)


def save_checkpoint(
    path: str | Path,
    config: ModelConfig,
    store: ParameterStore,
    optimizer: OptimizerSnapshot | None = None,
) -> Path:
    """Write a checkpoint file, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(config, store, optimizer))
    logger.info(f"Wrote checkpoint {path} ({len(store)} arrays, {store.count():,} parameters)")
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """
    Read a checkpoint file.

    Raises:
        FileNotFoundError: If the file does not exist
        CheckpointError: If the file is malformed
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    checkpoint = decode_checkpoint(path.read_bytes())
    logger.debug(f"Read checkpoint {path}: variant={checkpoint.config.variant}, {len(checkpoint.params)} arrays")
    return checkpoint


def restore_into(checkpoint: Checkpoint, model: UMFFNet) -> None:
    """
    Copy checkpoint parameters into an existing model.

    Raises:
        CheckpointError: Naming the first parameter that does not match
    """
    try:
        model.store.load_state(checkpoint.params)
    except ValueError as e:
        raise CheckpointError(f"checkpoint does not fit model: {e}") from e


def load_model(path: str | Path) -> tuple[UMFFNet, Checkpoint]:
    """Rebuild the model described by a checkpoint and load its weights."""
    checkpoint = load_checkpoint(path)
    model, _ = build(checkpoint.config)
    restore_into(checkpoint, model)
    return model, checkpoint
