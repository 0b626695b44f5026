"""Pooled OR outcomes and binary symmetric test noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import TestMatrix


@dataclass(frozen=True)
class NoiseParams:
    flip_prob: float

    def __post_init__(self):
        if not 0.0 <= self.flip_prob <= 0.5:
            raise ValueError(f"flip_prob must lie in [0, 0.5], got {self.flip_prob}")


def noiseless_outcomes(matrix: TestMatrix, x1) -> np.ndarray:
    """OR of the pooled statuses per test; an empty pool reads 0."""
    x1 = np.asarray(x1)
    if x1.shape != (matrix.n_individuals,):
        raise ValueError(f"status vector has shape {x1.shape}, expected ({matrix.n_individuals},)")
    hits = np.bincount(matrix.edge_test, weights=x1[matrix.edge_item], minlength=matrix.n_tests)
    return (hits > 0).astype(np.uint8)


def apply_noise(y, noise: NoiseParams | float, rng: np.random.Generator) -> np.ndarray:
    """XOR every outcome with an independent Bernoulli(flip_prob) bit.

    A bare float in [0, 1] is accepted so tests can probe flip rates above 0.5.
    """
    rho = noise.flip_prob if isinstance(noise, NoiseParams) else float(noise)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"flip probability must lie in [0, 1], got {rho}")
    y = np.asarray(y, dtype=np.uint8)
    flips = rng.random(y.shape) < rho
    return y ^ flips.astype(np.uint8)
