"""Mini-batch streams with augmentation and one-batch prefetch.

Each epoch's order comes from a generator keyed by (seed, epoch); each
image's crop offset and flip come from a generator keyed by
(seed, epoch, sample index). A background thread assembles the next batch
while the consumer works on the current one; since no random state is
shared, the prefetch thread cannot change what the consumer receives.
"""

import logging
import queue
import threading
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..core.errors import ConfigError
from ..core.tensor import Tensor, default_dtype
from ..core.types import DatasetName
from ..utils.rng import Domain, stream
from .dataset import DatasetSplit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AugmentPolicy:
    """Random crop after zero padding, then horizontal flip.

    Attributes:
        pad: Zero padding (pixels) before cropping back to H x W
        hflip_prob: Probability of a horizontal flip
        enabled: Whether augmentation runs at all
    """
    pad: int = 4
    hflip_prob: float = 0.5
    enabled: bool = True

    def __post_init__(self):
        if self.pad < 0:
            raise ConfigError(f"augmentation pad must be >= 0, got {self.pad}")
        if not 0.0 <= self.hflip_prob <= 1.0:
            raise ConfigError(f"hflip_prob must be in [0, 1], got {self.hflip_prob}")

    @classmethod
    def for_dataset(cls, name: DatasetName | str, enabled: bool = True) -> "AugmentPolicy":
        """Default policy: pad-4 crop everywhere, no flips for handwritten digits."""
        flip = 0.0 if DatasetName(name) == DatasetName.MNIST else 0.5
        return cls(pad=4, hflip_prob=flip, enabled=enabled)

    @classmethod
    def disabled(cls) -> "AugmentPolicy":
        return cls(enabled=False)


def augment_image(image: np.ndarray, policy: AugmentPolicy, rng: np.random.Generator) -> np.ndarray:
    """Crop and flip one [C, H, W] image."""
    _, h, w = image.shape
    p = policy.pad
    dy, dx = rng.integers(0, 2 * p + 1, size=2)
    flip = rng.random() < policy.hflip_prob
    if p:
        padded = np.pad(image, ((0, 0), (p, p), (p, p)))
        image = padded[:, dy:dy + h, dx:dx + w]
    if flip:
        image = image[:, :, ::-1]
    return image


def normalize(images: np.ndarray, mean: tuple[float, ...], std: tuple[float, ...]) -> np.ndarray:
    mean = np.asarray(mean, dtype=images.dtype).reshape(1, -1, 1, 1)
    std = np.asarray(std, dtype=images.dtype).reshape(1, -1, 1, 1)
    return (images - mean) / std


def epoch_order(num_samples: int, seed: int, epoch: int, shuffle: bool = True) -> np.ndarray:
    if not shuffle:
        return np.arange(num_samples)
    return stream(seed, Domain.SHUFFLE, epoch).permutation(num_samples)


def make_batch(
    split: DatasetSplit,
    indices: np.ndarray,
    seed: int,
    epoch: int,
    policy: AugmentPolicy,
    dtype: type
) -> tuple[Tensor, np.ndarray]:
    """Assemble, augment and normalize the samples at ``indices``."""
    images = split.images[indices]
    if policy.enabled:
        images = np.stack([
            augment_image(img, policy, stream(seed, Domain.AUGMENT, epoch, int(idx)))
            for img, idx in zip(images, indices)
        ])
    images = normalize(images.astype(dtype, copy=False), split.mean, split.std)
    return Tensor(images, dtype=dtype), split.labels[indices].copy()


class BatchStream:
    """Iterator over one epoch of batches, prefetching one batch ahead.

    Example:
        for images, labels in BatchStream(train, 128, seed=0, policy=policy, epoch=3):
            logits = model(images, train=True, rng=rng)
    """

    _DONE = object()

    def __init__(
        self,
        split: DatasetSplit,
        batch_size: int,
        seed: int = 0,
        policy: AugmentPolicy | None = None,
        epoch: int = 0,
        shuffle: bool = True,
        prefetch: bool = True
    ):
        if batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
        self.split = split
        self.batch_size = batch_size
        self.seed = seed
        self.policy = policy or AugmentPolicy.disabled()
        self.epoch = epoch
        self.order = epoch_order(len(split), seed, epoch, shuffle)
        self.prefetch = prefetch
        self.dtype = default_dtype()

    def __len__(self) -> int:
        return -(-len(self.order) // self.batch_size)

    def _generate(self) -> Iterator[tuple[Tensor, np.ndarray]]:
        for start in range(0, len(self.order), self.batch_size):
            indices = self.order[start:start + self.batch_size]
            yield make_batch(self.split, indices, self.seed, self.epoch, self.policy, self.dtype)

    def __iter__(self) -> Iterator[tuple[Tensor, np.ndarray]]:
        if not self.prefetch:
            yield from self._generate()
            return

        slots: queue.Queue = queue.Queue(maxsize=1)
        stop = threading.Event()

        def producer():
            try:
                for batch in self._generate():
                    while not stop.is_set():
                        try:
                            slots.put(batch, timeout=0.1)
                            break
                        except queue.Full:
                            continue
                    if stop.is_set():
                        return
                slots.put(self._DONE)
            except Exception as e:  # surfaced in the consumer thread
                slots.put(e)

        worker = threading.Thread(target=producer, name="batch-prefetch", daemon=True)
        worker.start()
        try:
            while True:
                item = slots.get()
                if item is self._DONE:
                    break
                if isinstance(item, Exception):
                    raise item
                yield item
        finally:
            stop.set()
            worker.join(timeout=1.0)


def batches(
    split: DatasetSplit,
    batch_size: int,
    seed: int = 0,
    policy: AugmentPolicy | None = None,
    epoch: int = 0,
    shuffle: bool = True
) -> BatchStream:
    """Shuffled (or ordered) mini-batches of one epoch; the last partial batch is kept."""
    return BatchStream(split, batch_size, seed=seed, policy=policy, epoch=epoch, shuffle=shuffle)
