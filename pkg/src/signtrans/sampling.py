"""Random frame-skip sampling and dataset augmentation.

A video of l frames is reduced to n frames by adding uniform random offsets
to an evenly spaced baseline index sequence.  Starting from the baseline
(rather than drawing n arbitrary indices) keeps every draw spread across the
whole video, so key moments of a sign are unlikely to be skipped.  Videos
shorter than n fall back to a deterministic stretched index sequence.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import TooFewFrames


@dataclass(frozen=True)
class SamplerConfig:
    """Target frame count and master seed for reproducible augmentation."""

    n: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")


def baseline_sequence(l: int, n: int) -> tuple[int, int, np.ndarray]:
    """Evenly spaced anchor indices for sampling n of l frames.

    Returns (z, y, Y): the average gap z = floor(l/(n-1)), the centering
    offset y = floor((l - z*(n-1))/2), and the anchor sequence
    Y = (y, y+z, ..., y+(n-1)z).  Random offsets in [1, z] are added to Y to
    obtain 1-based frame indices, so min(Y) may be 0.
    """
    if n < 2:
        raise ValueError("baseline_sequence requires n >= 2")
    if l < 1:
        raise ValueError("l must be >= 1")
    if l < n:
        raise TooFewFrames(f"cannot sample {n} frames from {l}")
    z = l // (n - 1)
    y = (l - z * (n - 1)) // 2
    Y = y + z * np.arange(n, dtype=np.int64)
    return z, y, Y


def sample_indices(l: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one random frame-skip sample of n 1-based indices from [1, l].

    Each index is baseline anchor plus a uniform draw from [1, z]; indices
    are strictly increasing before clipping to l (only the last anchor can
    overshoot) and non-decreasing after.
    """
    z, _, Y = baseline_sequence(l, n)
    r = rng.integers(1, z + 1, size=n)
    return np.minimum(Y + r, l)


def stretch_indices(l: int, n: int) -> np.ndarray:
    """Deterministic 1-based indices covering [1, l] when l < n is allowed.

    Uses round-half-to-even linear spacing; repeats appear whenever l < n.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if n == 1:
        return np.array([(l + 1) // 2], dtype=np.int64)
    pos = 1.0 + np.arange(n, dtype=np.float64) * (l - 1) / (n - 1)
    return np.rint(pos).astype(np.int64)


def choose_indices(l: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample randomly when possible, otherwise stretch deterministically."""
    if n >= 2 and l >= n:
        return sample_indices(l, n, rng)
    return stretch_indices(l, n)


def derived_rng(master_seed: int, video_id: str, draw: int) -> np.random.Generator:
    """Counter-based generator for draw number ``draw`` of one video.

    Seeding depends only on (master_seed, video_id, draw), so augmentation is
    reproducible regardless of the order in which samples are produced.
    """
    digest = hashlib.sha256(video_id.encode("utf-8")).digest()
    video_key = int.from_bytes(digest[:8], "little")
    ss = np.random.SeedSequence([master_seed, video_key, draw])
    return np.random.Generator(np.random.PCG64(ss))


def augment_indices(
    l: int, n: int, video_id: str, factor: int, master_seed: int
) -> list[np.ndarray]:
    """Index sequences for ``factor`` independent draws from one video."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    return [
        choose_indices(l, n, derived_rng(master_seed, video_id, k))
        for k in range(factor)
    ]


def augment(video, factor: int, n: int, master_seed: int, video_id: str = ""):
    """Materialize ``factor`` sampled copies of a feature sequence.

    ``video`` is a FeatureSequence whose rows are per-frame features; each
    returned copy selects n rows via an independent frame-skip draw.
    """
    from .keypoints import FeatureSequence

    out = []
    for idx in augment_indices(len(video), n, video_id, factor, master_seed):
        out.append(FeatureSequence(video.frames[idx - 1], video.mask, video.mode))
    return out
