"""Binary checkpoint files.

Layout (little-endian):

    b"CCTK"  u32 version
    u16 name length, UTF-8 model name
    u32 epoch
    u32 metadata length, UTF-8 JSON metadata (sorted keys)
    u32 tensor count
    per tensor: u16 name length, UTF-8 name, u8 dtype code, u8 ndim,
                u32 per dimension, raw scalars

Tensors keep their insertion order, so loading and saving again yields a
byte-identical file. Writes go to a temporary file that is then renamed
over the target.
"""

import json
import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..core.errors import CheckpointError

logger = logging.getLogger(__name__)

MAGIC = b"CCTK"
VERSION = 1

DTYPE_CODES: dict[int, np.dtype] = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<i8"),
    3: np.dtype("u1"),
}
_CODE_FOR = {dtype: code for code, dtype in DTYPE_CODES.items()}


@dataclass
class Checkpoint:
    """In-memory checkpoint.

    Attributes:
        model_name: Canonical model name
        epoch: Number of completed epochs
        tensors: Named arrays (parameters, optimizer moments, step counter)
        metadata: JSON-serializable run details (configs, seed, best accuracy)
    """
    model_name: str
    epoch: int
    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)


def _dtype_code(name: str, array: np.ndarray) -> int:
    code = _CODE_FOR.get(array.dtype.newbyteorder("<") if array.dtype.byteorder == ">" else array.dtype)
    if code is None:
        raise CheckpointError(f"tensor {name} has unsupported dtype {array.dtype}")
    return code


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    """Serialize a checkpoint to bytes."""
    name = checkpoint.model_name.encode("utf-8")
    meta = json.dumps(checkpoint.metadata, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<H", len(name)), name,
        struct.pack("<I", checkpoint.epoch),
        struct.pack("<I", len(meta)), meta,
        struct.pack("<I", len(checkpoint.tensors)),
    ]
    for key, array in checkpoint.tensors.items():
        array = np.asarray(array)
        code = _dtype_code(key, array)
        encoded = key.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<BB", code, array.ndim))
        parts.append(struct.pack(f"<{array.ndim}I", *array.shape))
        parts.append(np.ascontiguousarray(array, dtype=DTYPE_CODES[code]).tobytes())
    return b"".join(parts)


class _Reader:
    """Bounds-checked cursor over a checkpoint buffer."""

    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.raw):
            raise CheckpointError(f"truncated checkpoint while reading {what} at byte {self.pos}")
        chunk = self.raw[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode_checkpoint(raw: bytes) -> Checkpoint:
    """Parse checkpoint bytes.

    Raises:
        CheckpointError: Bad magic, unsupported version, unknown dtype or truncation
    """
    reader = _Reader(raw)
    if reader.take(4, "magic") != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (version,) = reader.unpack("<I", "version")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (name_len,) = reader.unpack("<H", "model name length")
    model_name = reader.take(name_len, "model name").decode("utf-8")
    (epoch,) = reader.unpack("<I", "epoch")
    (meta_len,) = reader.unpack("<I", "metadata length")
    try:
        metadata = json.loads(reader.take(meta_len, "metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt checkpoint metadata: {e}") from e
    (count,) = reader.unpack("<I", "tensor count")

    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (key_len,) = reader.unpack("<H", "tensor name length")
        key = reader.take(key_len, "tensor name").decode("utf-8")
        code, ndim = reader.unpack("<BB", f"header of {key}")
        if code not in DTYPE_CODES:
            raise CheckpointError(f"tensor {key} has unknown dtype code {code}")
        shape = reader.unpack(f"<{ndim}I", f"shape of {key}")
        dtype = DTYPE_CODES[code]
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        data = reader.take(nbytes, f"data of {key}")
        tensors[key] = np.frombuffer(data, dtype=dtype).reshape(shape).copy()

    if reader.pos != len(raw):
        raise CheckpointError(f"{len(raw) - reader.pos} trailing bytes after checkpoint")
    return Checkpoint(model_name, epoch, tensors, metadata)


def save_checkpoint(path: str | Path, checkpoint: Checkpoint) -> int:
    """Atomically write a checkpoint file; returns its size in bytes."""
    path = Path(path)
    payload = encode_checkpoint(checkpoint)
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(payload)
        os.replace(tmp, path)
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}", cause=e) from e
    logger.info(f"Saved checkpoint {path} (epoch {checkpoint.epoch}, {len(payload):,} bytes)")
    return len(payload)


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint file.

    Raises:
        CheckpointError: Missing, unreadable or malformed file
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}", cause=e) from e
    checkpoint = decode_checkpoint(raw)
    logger.info(f"Loaded checkpoint {path} ({checkpoint.model_name}, epoch {checkpoint.epoch})")
    return checkpoint
