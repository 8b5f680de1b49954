"""Deterministic sub-seed derivation.

All randomness in a run flows from one user-facing seed. Components derive
their own independent streams with :func:`derive_seed`, so results do not
depend on call order or on how work is split across workers.
"""

import numpy as np

# Stream tags. Distinct integers keep derived streams disjoint by purpose.
TAG_MEASUREMENT = 1
TAG_SPLIT = 2
TAG_NOISE_TRAIN = 3
TAG_NOISE_TEST = 4
TAG_SVM = 5
TAG_RANDOM_FILTERS = 6


def derive_seed(seed: int, *tags: int) -> int:
    """Derive a child seed from ``seed`` and a tuple of integer tags.

    Uses numpy's SeedSequence entropy pooling, so children with different
    tags are statistically independent and reproducible everywhere.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, tags)])
    return int(ss.generate_state(1, np.uint64)[0])


def rng_for(seed: int, *tags: int) -> np.random.Generator:
    """Generator seeded by ``derive_seed(seed, *tags)``."""
    return np.random.default_rng(derive_seed(seed, *tags))
