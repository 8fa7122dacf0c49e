"""Binary dataset formats: IDX (MNIST, Fashion-MNIST) and CIFAR batch files.

IDX: 2 zero bytes, a type byte (0x08 = unsigned byte), a dimension count,
one big-endian u32 per dimension, then the raw values. Image files carry
magic 2051 (3 dimensions), label files 2049 (1 dimension). Files ending
in ``.gz`` or starting with the gzip signature are decompressed first.

CIFAR: fixed-size records of label byte(s) followed by 3072 pixel bytes
(1024 red, 1024 green, 1024 blue, each row-major 32x32). CIFAR-10 records
have one label byte; CIFAR-100 records have a coarse and a fine label.
"""

import gzip
import logging
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..core.errors import DataFormatError, DataIOError

logger = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049
_IDX_UBYTE = 0x08
_GZIP_SIGNATURE = b"\x1f\x8b"

CIFAR_PIXELS = 3 * 32 * 32
CIFAR_LABEL_BYTES = {"cifar10": 1, "cifar100": 2}


class CifarRecords(NamedTuple):
    """Decoded CIFAR batch file."""
    images: np.ndarray                 # uint8 [N, 3, 32, 32]
    labels: np.ndarray                 # int64 [N] (fine labels for cifar100)
    coarse_labels: np.ndarray | None   # int64 [N] for cifar100, else None


def read_bytes(path: str | Path) -> bytes:
    """Read a file, transparently decompressing gzip.

    Raises:
        DataIOError: If the file is missing or unreadable
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError as e:
        raise DataIOError(f"dataset file not found: {path}", cause=e) from e
    except OSError as e:
        raise DataIOError(f"cannot read {path}: {e}", cause=e) from e
    if path.suffix == ".gz" or raw[:2] == _GZIP_SIGNATURE:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise DataFormatError(f"corrupt gzip stream: {e}", path=str(path)) from e
    return raw


def decode_idx(raw: bytes, expected_magic: int | None = None, path: str | None = None) -> np.ndarray:
    """Decode an unsigned-byte IDX buffer into an array of its declared shape."""
    if len(raw) < 4:
        raise DataFormatError("file too short for an IDX header", path=path, offset=len(raw))
    if raw[0] != 0 or raw[1] != 0 or raw[2] != _IDX_UBYTE:
        raise DataFormatError(f"bad IDX magic 0x{raw[:4].hex()}", path=path, offset=0)
    magic = int.from_bytes(raw[:4], "big")
    if expected_magic is not None and magic != expected_magic:
        raise DataFormatError(f"IDX magic {magic}, expected {expected_magic}", path=path, offset=0)

    ndim = raw[3]
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise DataFormatError("truncated IDX dimension header", path=path, offset=len(raw))
    dims = tuple(int.from_bytes(raw[4 + 4 * i:8 + 4 * i], "big") for i in range(ndim))
    count = int(np.prod(dims)) if dims else 0
    end = header + count
    if len(raw) < end:
        raise DataFormatError(
            f"truncated IDX payload: expected {end} bytes, found {len(raw)}",
            path=path, offset=len(raw)
        )
    if len(raw) > end:
        raise DataFormatError(f"{len(raw) - end} trailing bytes after IDX payload", path=path, offset=end)
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=header).reshape(dims).copy()


def read_idx(path: str | Path, expected_magic: int | None = None) -> np.ndarray:
    """Read an IDX file (optionally gzip-compressed).

    Raises:
        DataIOError: Missing file
        DataFormatError: Bad magic, truncated header or payload, trailing bytes
    """
    return decode_idx(read_bytes(path), expected_magic=expected_magic, path=str(path))


def encode_idx(array: np.ndarray) -> bytes:
    """Encode a uint8 array as an IDX buffer."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    header = bytes([0, 0, _IDX_UBYTE, array.ndim])
    header += b"".join(int(n).to_bytes(4, "big") for n in array.shape)
    return header + array.tobytes()


def write_idx(path: str | Path, array: np.ndarray) -> None:
    """Write a uint8 array as an IDX file; ``.gz`` paths are compressed."""
    path = Path(path)
    payload = encode_idx(array)
    if path.suffix == ".gz":
        payload = gzip.compress(payload, mtime=0)
    path.write_bytes(payload)


def record_size(variant: str) -> int:
    if variant not in CIFAR_LABEL_BYTES:
        raise DataFormatError(f"unknown CIFAR variant '{variant}'")
    return CIFAR_LABEL_BYTES[variant] + CIFAR_PIXELS


def decode_cifar(raw: bytes, variant: str, path: str | None = None) -> CifarRecords:
    """Decode a CIFAR batch buffer.

    Raises:
        DataFormatError: If the buffer is not a whole number of records
    """
    size = record_size(variant)
    if len(raw) == 0 or len(raw) % size:
        whole = len(raw) // size
        raise DataFormatError(
            f"{len(raw)} bytes is not a whole number of {size}-byte {variant} records",
            path=path, offset=whole * size
        )
    records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, size)
    label_bytes = CIFAR_LABEL_BYTES[variant]
    images = records[:, label_bytes:].reshape(-1, 3, 32, 32).copy()
    labels = records[:, label_bytes - 1].astype(np.int64)
    coarse = records[:, 0].astype(np.int64) if variant == "cifar100" else None
    return CifarRecords(images, labels, coarse)


def read_cifar(path: str | Path, variant: str) -> CifarRecords:
    """Read one CIFAR batch file."""
    records = decode_cifar(read_bytes(path), variant, path=str(path))
    logger.debug(f"Decoded {len(records.labels)} {variant} records from {path}")
    return records


def encode_cifar(
    images: np.ndarray,
    labels: np.ndarray,
    variant: str,
    coarse_labels: np.ndarray | None = None
) -> bytes:
    """Encode uint8 images [N, 3, 32, 32] and labels as CIFAR records."""
    images = np.ascontiguousarray(images, dtype=np.uint8).reshape(len(labels), CIFAR_PIXELS)
    columns = [np.asarray(labels, dtype=np.uint8)[:, None]]
    if variant == "cifar100":
        coarse = np.zeros(len(labels), dtype=np.uint8) if coarse_labels is None else coarse_labels
        columns.insert(0, np.asarray(coarse, dtype=np.uint8)[:, None])
    elif variant != "cifar10":
        raise DataFormatError(f"unknown CIFAR variant '{variant}'")
    return np.concatenate(columns + [images], axis=1).tobytes()
