"""Decoded dataset splits, loaders, per-class subsampling and resizing."""

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..core.errors import ConfigError, DataFormatError, DataIOError
from ..core.types import DatasetName
from ..utils.rng import Domain, stream
from .formats import IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC, read_cifar, read_idx

logger = logging.getLogger(__name__)

# Published per-channel statistics (mean, std)
NORMALIZATION: dict[DatasetName, tuple[tuple[float, ...], tuple[float, ...]]] = {
    DatasetName.MNIST: ((0.1307,), (0.3081,)),
    DatasetName.FASHION_MNIST: ((0.2860,), (0.3530,)),
    DatasetName.CIFAR10: ((0.4914, 0.4822, 0.4465), (0.2470, 0.2435, 0.2616)),
    DatasetName.CIFAR100: ((0.5071, 0.4865, 0.4409), (0.2673, 0.2564, 0.2762)),
}

CLASS_COUNTS = {
    DatasetName.MNIST: 10,
    DatasetName.FASHION_MNIST: 10,
    DatasetName.CIFAR10: 10,
    DatasetName.CIFAR100: 100,
}

IDX_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}

CIFAR_FILES = {
    DatasetName.CIFAR10: (
        "cifar-10-batches-bin",
        [f"data_batch_{i}.bin" for i in range(1, 6)],
        ["test_batch.bin"],
    ),
    DatasetName.CIFAR100: ("cifar-100-binary", ["train.bin"], ["test.bin"]),
}

MIN_RESIZE, MAX_RESIZE = 8, 128


@dataclass
class DatasetSplit:
    """Decoded images and labels of one split.

    Attributes:
        name: Dataset name
        images: float32 [N, C, H, W] with values in [0, 1]
        labels: int64 [N]
        class_count: Number of classes
        mean: Per-channel normalization mean
        std: Per-channel normalization std
    """
    name: DatasetName
    images: np.ndarray
    labels: np.ndarray
    class_count: int
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def __post_init__(self):
        self.name = DatasetName(self.name)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 4:
            raise DataFormatError(f"images must be [N, C, H, W], got shape {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise DataFormatError(f"{len(self.images)} images but {len(self.labels)} labels")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise DataFormatError(f"labels outside [0, {self.class_count})")
        channels = self.images.shape[1]
        if len(self.mean) != channels or len(self.std) != channels:
            raise ConfigError(f"normalization stats must have {channels} entries")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def channels(self) -> int:
        return self.images.shape[1]

    @property
    def image_size(self) -> tuple[int, int]:
        return self.images.shape[2], self.images.shape[3]

    def subset(self, indices: np.ndarray) -> "DatasetSplit":
        return replace(self, images=self.images[indices], labels=self.labels[indices])

    def class_histogram(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)


def _to_unit(pixels: np.ndarray) -> np.ndarray:
    return pixels.astype(np.float32) / np.float32(255.0)


def load_idx(images_path: str | Path, labels_path: str | Path, name: DatasetName | str = DatasetName.MNIST) -> DatasetSplit:
    """Decode an IDX image/label file pair into a single-channel split.

    Raises:
        DataIOError: Missing file
        DataFormatError: Bad magic, truncation, or image/label count mismatch
    """
    name = DatasetName(name)
    images = read_idx(images_path, expected_magic=IDX_IMAGES_MAGIC)
    labels = read_idx(labels_path, expected_magic=IDX_LABELS_MAGIC)
    if len(images) != len(labels):
        raise DataFormatError(
            f"{len(images)} images but {len(labels)} labels", path=str(labels_path)
        )
    mean, std = NORMALIZATION[name]
    split = DatasetSplit(name, _to_unit(images)[:, None], labels, CLASS_COUNTS[name], mean, std)
    logger.info(f"Loaded {len(split)} {name.value} samples from {images_path}")
    return split


def _find(data_dir: Path, candidates: list[Path]) -> Path:
    for path in candidates:
        if path.exists():
            return path
    raise DataIOError(f"none of {[str(p) for p in candidates]} exist under {data_dir}")


def _idx_path(data_dir: Path, name: DatasetName, filename: str) -> Path:
    folders = [data_dir / name.value, data_dir / name.value / "raw", data_dir]
    return _find(data_dir, [f / n for f in folders for n in (filename, filename + ".gz")])


def _cifar_paths(data_dir: Path, name: DatasetName, files: list[str]) -> list[Path]:
    subfolder = CIFAR_FILES[name][0]
    folders = [data_dir / subfolder, data_dir / name.value, data_dir]
    return [_find(data_dir, [f / fn for f in folders]) for fn in files]


def load_cifar(data_dir: str | Path, variant: DatasetName | str) -> tuple[DatasetSplit, DatasetSplit]:
    """Load CIFAR-10 or CIFAR-100 (fine labels) train and test splits.

    Batch files are looked up in ``data_dir``, its standard extraction
    folder (cifar-10-batches-bin / cifar-100-binary) or ``data_dir/<variant>``.
    """
    variant = DatasetName(variant)
    if variant not in CIFAR_FILES:
        raise ConfigError(f"{variant.value} is not a CIFAR variant")
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataIOError(f"data directory not found: {data_dir}")
    _, train_files, test_files = CIFAR_FILES[variant]
    mean, std = NORMALIZATION[variant]

    splits = []
    for files in (train_files, test_files):
        parts = [read_cifar(p, variant.value) for p in _cifar_paths(data_dir, variant, files)]
        images = np.concatenate([p.images for p in parts])
        labels = np.concatenate([p.labels for p in parts])
        splits.append(DatasetSplit(variant, _to_unit(images), labels, CLASS_COUNTS[variant], mean, std))
    logger.info(f"Loaded {variant.value}: {len(splits[0])} train, {len(splits[1])} test samples")
    return splits[0], splits[1]


def load_dataset(name: DatasetName | str, data_dir: str | Path) -> tuple[DatasetSplit, DatasetSplit]:
    """Load (train, test) for any supported dataset."""
    name = DatasetName(name)
    if name in CIFAR_FILES:
        return load_cifar(data_dir, name)
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataIOError(f"data directory not found: {data_dir}")
    splits = []
    for key in ("train", "test"):
        images_file, labels_file = IDX_FILES[key]
        splits.append(load_idx(
            _idx_path(data_dir, name, images_file), _idx_path(data_dir, name, labels_file), name
        ))
    return splits[0], splits[1]


def subsample_per_class(split: DatasetSplit, k: int, seed: int) -> DatasetSplit:
    """Keep exactly k samples of every class, drawn uniformly without replacement.

    When every class has exactly k samples the split itself is returned,
    in its stored order: it is not reshuffled and the seed is ignored.
    Otherwise the kept samples come back in a seeded random order.

    Raises:
        ConfigError: If k exceeds the smallest class
    """
    counts = split.class_histogram()
    if k < 1 or k > counts.min():
        raise ConfigError(f"samples per class must be in [1, {counts.min()}], got {k}")
    if np.all(counts == k):
        # every sample kept; the stored order is preserved
        return split
    rng = stream(seed, Domain.SUBSAMPLE)
    chosen = [
        rng.choice(np.flatnonzero(split.labels == c), size=k, replace=False)
        for c in range(split.class_count)
    ]
    order = rng.permutation(np.concatenate(chosen))
    logger.info(f"Subsampled {split.name.value} to {k} per class ({len(order)} samples)")
    return split.subset(order)


def _bilinear_matrix(src: int, dst: int) -> np.ndarray:
    """[dst, src] interpolation weights, half-pixel centres, edges clamped."""
    coords = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    coords = np.clip(coords, 0.0, src - 1)
    lo = np.floor(coords).astype(np.int64)
    hi = np.minimum(lo + 1, src - 1)
    frac = coords - lo
    matrix = np.zeros((dst, src), dtype=np.float64)
    rows = np.arange(dst)
    np.add.at(matrix, (rows, lo), 1.0 - frac)
    np.add.at(matrix, (rows, hi), frac)
    return matrix


def resize_images(images: np.ndarray, size: int) -> np.ndarray:
    """Bilinear resize of [N, C, H, W] images to size x size."""
    if not MIN_RESIZE <= size <= MAX_RESIZE:
        raise ConfigError(f"image size must be in [{MIN_RESIZE}, {MAX_RESIZE}], got {size}")
    _, _, h, w = images.shape
    if (h, w) == (size, size):
        return images.copy()
    rows = _bilinear_matrix(h, size)
    cols = _bilinear_matrix(w, size)
    out = np.matmul(np.matmul(rows, images.astype(np.float64)), cols.T)
    return out.astype(images.dtype)


def resize(split: DatasetSplit, size: int) -> DatasetSplit:
    """Resize every image of a split; labels and statistics are unchanged."""
    if split.image_size != (size, size):
        logger.info(f"Resizing {split.name.value} from {split.image_size} to {size}x{size}")
    return replace(split, images=resize_images(split.images, size))
