#src/core/utils/rng.py
"""
Labeled, splittable random streams.

Every stream is a Philox counter-based generator keyed by the run seed and a
tuple of labels, so a stream depends only on (seed, labels) and never on the
order in which streams are created or on the worker process that uses them.
"""

import zlib
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence]


def _label_key(label: Union[str, int]) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode("utf-8"))


def substream(seed: int, *labels: Union[str, int]) -> np.random.Generator:
    """Generator for the stream named by ``labels`` under ``seed``."""
    spawn_key = tuple(_label_key(label) for label in labels)
    sequence = np.random.SeedSequence(int(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(sequence))


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Accept a seed, SeedSequence or Generator and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return substream(int(seed))
