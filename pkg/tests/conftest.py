"""Shared pytest fixtures and Hypothesis strategies for CCT Engine tests."""

import os
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from src.core.types import DatasetName
from src.data.dataset import CLASS_COUNTS, NORMALIZATION, DatasetSplit
from src.data.formats import encode_cifar, write_idx

# ============================================================================
# Hypothesis Strategies for Property-Based Testing
# ============================================================================

# Finite, moderately sized scalars
value_strategy = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)

# Learning-rate strategies
lr_strategy = st.floats(min_value=1e-6, max_value=1e-2, allow_nan=False, allow_infinity=False)

# Label-smoothing strategies ([0, 1))
smoothing_strategy = st.floats(min_value=0.0, max_value=0.9, allow_nan=False, allow_infinity=False)

# Seed strategies
seed_strategy = st.integers(min_value=0, max_value=2**31 - 1)

# Positional embedding kinds
pe_kind_strategy = st.sampled_from(["learnable", "sinusoidal", "none"])

# Model names of every family
model_name_strategy = st.sampled_from([
    "vit-lite-7/4", "vit-lite-6/4", "cvt-7/4", "cvt-6/4",
    "cct-2/3x2", "cct-4/3x2", "cct-7/3x1", "cct-7/7x1",
])


@st.composite
def shape_strategy(draw, min_dims: int = 1, max_dims: int = 3, max_side: int = 5):
    """Generate small array shapes."""
    dims = draw(st.integers(min_value=min_dims, max_value=max_dims))
    return tuple(draw(st.integers(min_value=1, max_value=max_side)) for _ in range(dims))


@st.composite
def array_strategy(draw, min_dims: int = 1, max_dims: int = 3, max_side: int = 5):
    """Generate float64 arrays with bounded values."""
    shape = draw(shape_strategy(min_dims, max_dims, max_side))
    seed = draw(seed_strategy)
    return np.random.default_rng(seed).uniform(-3.0, 3.0, size=shape)


@st.composite
def logits_strategy(draw, max_batch: int = 6, max_classes: int = 12):
    """Generate (logits, labels) pairs."""
    b = draw(st.integers(min_value=1, max_value=max_batch))
    k = draw(st.integers(min_value=2, max_value=max_classes))
    rng = np.random.default_rng(draw(seed_strategy))
    return rng.normal(scale=3.0, size=(b, k)), rng.integers(0, k, size=b)


# ============================================================================
# Synthetic datasets
# ============================================================================

def synthetic_images(labels: np.ndarray, channels: int, size: int, seed: int = 0) -> np.ndarray:
    """uint8 images whose bright row band encodes the label, plus noise."""
    rng = np.random.default_rng(seed)
    images = rng.integers(0, 40, size=(len(labels), channels, size, size)).astype(np.uint8)
    band = max(1, size // 10)
    for i, label in enumerate(labels):
        row = (int(label) * size) // 10
        images[i, :, row:row + band, :] = 220
    return images


def synthetic_split(
    name: DatasetName = DatasetName.MNIST,
    per_class: int = 4,
    size: int = 12,
    seed: int = 0
) -> DatasetSplit:
    """Balanced in-memory split (10 classes) with learnable structure."""
    labels = np.repeat(np.arange(10), per_class)
    labels = np.random.default_rng(seed).permutation(labels)
    mean, std = NORMALIZATION[name]
    images = synthetic_images(labels, len(mean), size, seed).astype(np.float32) / 255.0
    return DatasetSplit(name, images, labels, CLASS_COUNTS[name], mean, std)


def write_mnist(data_dir: Path, train_per_class: int = 3, test_per_class: int = 2, gz: bool = False) -> Path:
    """Write a tiny MNIST in IDX format under data_dir/mnist."""
    folder = Path(data_dir) / "mnist"
    folder.mkdir(parents=True, exist_ok=True)
    suffix = ".gz" if gz else ""
    for prefix, per_class, seed in (("train", train_per_class, 1), ("t10k", test_per_class, 2)):
        labels = np.repeat(np.arange(10), per_class).astype(np.uint8)
        images = synthetic_images(labels, 1, 28, seed)[:, 0]
        write_idx(folder / f"{prefix}-images-idx3-ubyte{suffix}", images)
        write_idx(folder / f"{prefix}-labels-idx1-ubyte{suffix}", labels)
    return folder


def write_cifar10(data_dir: Path, per_batch: int = 10, test: int = 10) -> Path:
    """Write a tiny CIFAR-10 binary set under data_dir/cifar-10-batches-bin."""
    folder = Path(data_dir) / "cifar-10-batches-bin"
    folder.mkdir(parents=True, exist_ok=True)
    for i in range(1, 6):
        labels = np.arange(per_batch) % 10
        images = synthetic_images(labels, 3, 32, seed=i)
        (folder / f"data_batch_{i}.bin").write_bytes(encode_cifar(images, labels, "cifar10"))
    labels = np.arange(test) % 10
    (folder / "test_batch.bin").write_bytes(encode_cifar(synthetic_images(labels, 3, 32, 9), labels, "cifar10"))
    return folder


# ============================================================================
# Pytest configuration
# ============================================================================

def pytest_configure(config):
    config.addinivalue_line("markers", "slow: dataset-backed runs (need CCT_DATA_DIR)")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("CCT_DATA_DIR"):
        return
    skip = pytest.mark.skip(reason="set CCT_DATA_DIR to run dataset-backed tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


# ============================================================================
# Pytest Fixtures
# ============================================================================

@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield tmpdir


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def mnist_dir(temp_dir):
    """Directory holding a tiny MNIST in the real IDX format."""
    write_mnist(Path(temp_dir))
    return Path(temp_dir)


@pytest.fixture
def cifar_dir(temp_dir):
    """Directory holding a tiny CIFAR-10 in the real binary format."""
    write_cifar10(Path(temp_dir))
    return Path(temp_dir)


@pytest.fixture
def tiny_splits():
    """(train, test) 12x12 single-channel splits, small enough to train in seconds."""
    return synthetic_split(per_class=4, seed=0), synthetic_split(per_class=2, seed=1)


@pytest.fixture
def data_dir():
    """Real dataset directory for slow tests."""
    return Path(os.environ["CCT_DATA_DIR"])
