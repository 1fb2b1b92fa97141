"""Synthetic dataset generators so the full pipeline runs offline.

binary_planted: sparse 0/1 features where the label is the strict majority
vote of the first `planted` columns, plus label noise. The remaining columns
are low-density distractors, which gives additive attacks room to flip zeros.

continuous_blobs: one Gaussian blob per class on a small block of active
dimensions, clipped to [0, 1], over a quiet background band that stays below
the noise attack's default threshold.
"""

import numpy as np

from .dataset import FeatureKind, LabeledDataset
from .errors import InvalidConfig
from .rng import rng_for


def binary_planted(
    n: int,
    d: int,
    seed: int = 0,
    planted: int = None,
    label_noise: float = 0.05,
    background_density: float = 0.05,
    planted_density: float = 0.5,
) -> LabeledDataset:
    if n < 1 or d < 1:
        raise InvalidConfig("need n >= 1 and d >= 1")
    if planted is None:
        planted = min(8, d)
    if planted < 1 or planted > d:
        raise InvalidConfig(f"planted must be in [1, {d}]")
    rng = rng_for(seed, 0)
    X = (rng.random((n, d)) < background_density).astype(np.float64)
    X[:, :planted] = (rng.random((n, planted)) < planted_density).astype(np.float64)
    votes = X[:, :planted].sum(axis=1)
    y = (votes > planted / 2.0).astype(np.int64)
    flip = rng.random(n) < label_noise
    y[flip] = 1 - y[flip]
    bounds = np.zeros((d, 2))
    bounds[:, 1] = 1.0
    return LabeledDataset(
        features=X,
        labels=y,
        ids=np.arange(n, dtype=np.int64),
        k=2,
        feature_kind=FeatureKind.BINARY,
        feature_bounds=bounds,
    )


def continuous_blobs(
    n: int,
    d: int,
    seed: int = 0,
    k: int = 3,
    active_frac: float = 0.25,
    background_level: float = 0.02,
    blob_std: float = 0.08,
) -> LabeledDataset:
    if n < k or d < k:
        raise InvalidConfig("need n >= k and d >= k")
    rng = rng_for(seed, 1)
    block = max(1, int(active_frac * d) // 1)
    centers = np.full((k, d), background_level)
    for c in range(k):
        lo = (c * block) % d
        idx = (lo + np.arange(block)) % d
        # moderate active levels keep the classes separable while leaving the
        # background-noise attack a realistic path across the boundary
        centers[c, idx] = rng.uniform(0.3, 0.7, size=block)
    counts = [n // k + (1 if c < n % k else 0) for c in range(k)]
    X = np.empty((n, d))
    y = np.empty(n, dtype=np.int64)
    row = 0
    for c in range(k):
        m = counts[c]
        X[row : row + m] = centers[c] + rng.normal(0.0, blob_std, size=(m, d))
        y[row : row + m] = c
        row += m
    X = np.clip(X, 0.0, 1.0)
    bounds = np.zeros((d, 2))
    bounds[:, 1] = 1.0
    return LabeledDataset(
        features=X,
        labels=y,
        ids=np.arange(n, dtype=np.int64),
        k=k,
        feature_kind=FeatureKind.CONTINUOUS,
        feature_bounds=bounds,
    )
