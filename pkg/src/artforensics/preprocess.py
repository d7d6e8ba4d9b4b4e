"""Column standardisation fitted on training rows only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from artforensics.errors import InvalidInput, ShapeError

# Relative to max(1, |mean|), so rounding noise in a constant column counts as zero.
MIN_STD = 1e-10


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-column population mean and standard deviation.

    Columns whose std is below ``MIN_STD * max(1, |mean|)`` store std = 1, so they map to
    all zeros instead of blowing up.
    """

    means: np.ndarray
    stds: np.ndarray

    @property
    def width(self) -> int:
        return len(self.means)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.width:
            raise ShapeError(f"expected rows of width {self.width}, got shape {X.shape}")
        return X

    def transform(self, X) -> np.ndarray:
        return (self._check(X) - self.means) / self.stds

    def inverse_transform(self, X) -> np.ndarray:
        return self._check(X) * self.stds + self.means

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(np.array(d["means"], dtype=np.float64), np.array(d["stds"], dtype=np.float64))


def fit(train_rows) -> Scaler:
    X = np.asarray(train_rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidInput("fitting a scaler needs at least 2 rows")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds < MIN_STD * np.maximum(1.0, np.abs(means)), 1.0, stds)
    return Scaler(means, stds)


def transform(s: Scaler, rows) -> np.ndarray:
    return s.transform(rows)
