"""Data: IDX/CIFAR decoding, dataset splits, subsampling, resizing, batch streams."""

from .dataset import (
    NORMALIZATION,
    DatasetSplit,
    load_cifar,
    load_dataset,
    load_idx,
    resize,
    subsample_per_class,
)
from .formats import decode_cifar, encode_cifar, read_cifar, read_idx, write_idx
from .stream import AugmentPolicy, BatchStream, batches

__all__ = [
    "DatasetSplit",
    "NORMALIZATION",
    "load_idx",
    "load_cifar",
    "load_dataset",
    "subsample_per_class",
    "resize",
    "read_idx",
    "write_idx",
    "read_cifar",
    "decode_cifar",
    "encode_cifar",
    "AugmentPolicy",
    "BatchStream",
    "batches",
]
