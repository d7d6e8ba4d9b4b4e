"""Descriptive statistics and entropy primitives.

Moments are population moments (divide by n). Kurtosis is Fisher excess
kurtosis, so a normal sample scores about 0. A zero-variance input reports
skewness = kurtosis = 0 rather than NaN, which keeps feature vectors finite
for flat images. Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from artforensics.errors import InvalidInput

# Relative variance below which a sample counts as constant.
_ZERO_VARIANCE = 1e-24


@dataclass(frozen=True)
class DescriptiveStats:
    mean: float
    variance: float
    skewness: float
    kurtosis: float


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray
    bin_count: int
    value_range: tuple[float, float]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def describe(values) -> DescriptiveStats:
    """Population mean, variance, skewness and excess kurtosis of ``values``."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise InvalidInput("describe() needs at least one value")
    if np.all(x == x[0]):
        return DescriptiveStats(float(x[0]), 0.0, 0.0, 0.0)
    mean = x.mean()
    d = x - mean
    m2 = np.mean(d * d)
    scale = max(mean * mean, 1.0)
    if m2 <= _ZERO_VARIANCE * scale:
        return DescriptiveStats(float(mean), float(max(m2, 0.0)), 0.0, 0.0)
    m3 = np.mean(d**3)
    m4 = np.mean(d**4)
    return DescriptiveStats(
        mean=float(mean),
        variance=float(m2),
        skewness=float(m3 / m2**1.5),
        kurtosis=float(m4 / (m2 * m2) - 3.0),
    )


def build_histogram(values, bin_count: int, value_range: tuple[float, float]) -> Histogram:
    """Equal-width histogram over ``value_range``.

    Values equal to the upper edge land in the last bin and values outside
    the range are clamped into the nearest end bin.
    """
    low, high = float(value_range[0]), float(value_range[1])
    if not high > low:
        raise InvalidInput(f"histogram range must satisfy high > low, got ({low}, {high})")
    if bin_count < 1:
        raise InvalidInput(f"bin_count must be positive, got {bin_count}")
    x = np.asarray(values, dtype=np.float64).ravel()
    idx = np.floor((x - low) * (bin_count / (high - low)))
    idx = np.clip(idx, 0, bin_count - 1).astype(np.int64)
    counts = np.bincount(idx, minlength=bin_count).astype(np.int64)
    return Histogram(counts=counts, bin_count=int(bin_count), value_range=(low, high))


def shannon_entropy(h: Histogram | np.ndarray) -> float:
    """Shannon entropy in bits of a histogram (or raw count array)."""
    counts = np.asarray(h.counts if isinstance(h, Histogram) else h, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise InvalidInput("entropy of an empty histogram is undefined")
    p = counts[counts > 0] / total
    return float(max(0.0, -np.sum(p * np.log2(p))))
