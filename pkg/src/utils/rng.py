"""Seeded random streams.

Every consumer of randomness draws from its own generator keyed by the
run seed, a domain tag and the consumer's position (epoch, step, sample
index). Generators are never shared between domains, so prefetch depth,
thread count and resume points cannot change what any consumer sees.
"""

from enum import IntEnum

import numpy as np


class Domain(IntEnum):
    """Domain tags separating independent random streams."""
    SHUFFLE = 0     # keyed by epoch
    AUGMENT = 1     # keyed by epoch, sample index
    DROPOUT = 2     # keyed by global step
    INIT = 3        # parameter initialization
    SUBSAMPLE = 4   # per-class subsampling


def stream(seed: int, domain: Domain, *keys: int) -> np.random.Generator:
    """Return a fresh generator for (seed, domain, keys...).

    Example:
        rng = stream(0, Domain.SHUFFLE, epoch)
        order = rng.permutation(num_samples)
    """
    return np.random.default_rng([int(seed), int(domain), *(int(k) for k in keys)])
