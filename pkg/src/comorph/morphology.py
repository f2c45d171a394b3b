"""Morphology vectors: the upper-level decision variable.

A morphology is a bounded real vector (leg segment scale factors and the
like). Bounds are per-dimension (low, high) pairs; most search code works in
the unit cube and denormalizes at the edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Morphology:
    values: np.ndarray
    bounds: np.ndarray  # shape (d, 2), low < high per row

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.bounds = np.asarray(self.bounds, dtype=np.float64)
        if self.bounds.shape != (self.values.size, 2):
            raise ValueError(f"bounds shape {self.bounds.shape} does not match "
                             f"{self.values.size} values")
        if np.any(self.bounds[:, 0] >= self.bounds[:, 1]):
            raise ValueError("each bound must satisfy low < high")
        if np.any(self.values < self.bounds[:, 0]) or np.any(self.values > self.bounds[:, 1]):
            raise ValueError("morphology values outside bounds")

    @property
    def dim(self) -> int:
        return self.values.size

    def normalized(self) -> np.ndarray:
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return (self.values - lo) / (hi - lo)


def from_normalized(z, bounds) -> Morphology:
    bounds = np.asarray(bounds, dtype=np.float64)
    z = np.clip(np.asarray(z, dtype=np.float64), 0.0, 1.0)
    lo, hi = bounds[:, 0], bounds[:, 1]
    return Morphology(lo + z * (hi - lo), bounds)


def random_morphology(bounds, rng) -> Morphology:
    bounds = np.asarray(bounds, dtype=np.float64)
    return from_normalized(rng.uniform(0.0, 1.0, size=bounds.shape[0]), bounds)
