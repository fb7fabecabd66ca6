"""Seeded synthetic labelled code sets.

Class centers are placed by greedy max-min distance over a candidate pool,
then each class draws codes uniformly from the Hamming ball of radius
``intra_radius`` around its center.

Seed splitting: ``SeedSequence(seed).spawn(2)`` gives a center stream and a
sample stream; the sample stream spawns one child per class, in class order.
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .core import MAX_WIDTH, LabeledCodeSet, UsageError, _int_to_words, n_words

POOL_LIMIT_BITS = 16
POOL_SAMPLES = 4096


def _random_code(rng: np.random.Generator, k: int) -> int:
    bits = rng.integers(0, 2, size=k)
    return int(sum(1 << i for i in range(k) if bits[i]))


def place_centers(k: int, n_classes: int, rng: np.random.Generator) -> list[int]:
    """Greedy max-min placement; ties go to the earliest candidate in a shuffled pool."""
    if k <= POOL_LIMIT_BITS:
        pool = [int(v) for v in rng.permutation(1 << k)]
    else:
        pool = list(dict.fromkeys(_random_code(rng, k) for _ in range(POOL_SAMPLES)))
    if n_classes > len(pool):
        raise UsageError(f"cannot place {n_classes} distinct centers in a {k}-bit space")
    nw = n_words(k)
    words = np.stack([_int_to_words(v, nw) for v in pool])
    mind = np.full(len(pool), k + 1, dtype=np.int64)
    centers = []
    pick = 0
    for _ in range(n_classes):
        centers.append(pool[pick])
        mind = np.minimum(mind, kernels.hamming_to_query(words, words[pick]))
        pick = int(np.argmax(mind))
    return centers


def sample_ball(center: int, k: int, radius: int, count: int, rng: np.random.Generator) -> list[int]:
    """``count`` codes drawn uniformly from the radius ball around ``center``."""
    weights = np.array([math.comb(k, i) for i in range(radius + 1)], dtype=np.float64)
    dists = rng.choice(radius + 1, size=count, p=weights / weights.sum())
    out = []
    for d in dists:
        v = center
        for b in rng.choice(k, size=int(d), replace=False):
            v ^= 1 << int(b)
        out.append(v)
    return out


def synthesize(k: int, n_classes: int, per_class: int, intra_radius: int, seed: int
               ) -> tuple[LabeledCodeSet, list[int]]:
    """Return the dataset (entries grouped by class) and the class center values."""
    if not 1 <= k <= MAX_WIDTH:
        raise UsageError(f"k must be in [1, {MAX_WIDTH}], got {k}")
    if n_classes < 1 or per_class < 1:
        raise UsageError("n_classes and per_class must be >= 1")
    if n_classes > 2**k:
        raise UsageError(f"{n_classes} classes cannot have distinct centers in 2^{k} codes")
    if not 0 <= intra_radius <= k:
        raise UsageError(f"intra_radius must be in [0, {k}], got {intra_radius}")
    center_seq, sample_seq = np.random.SeedSequence(seed).spawn(2)
    centers = place_centers(k, n_classes, np.random.default_rng(center_seq))
    values, labels = [], []
    for c, (center, child) in enumerate(zip(centers, sample_seq.spawn(n_classes))):
        values += sample_ball(center, k, intra_radius, per_class, np.random.default_rng(child))
        labels += [c] * per_class
    return LabeledCodeSet.from_values(k, values, labels), centers
