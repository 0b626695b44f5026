"""Success, false-negative and false-positive rates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .population import GroundTruth


@dataclass(frozen=True)
class TrialMetrics:
    success: bool
    fnr: float | None  # None when nobody is infected
    fpr: float | None  # None when nobody is healthy

    @property
    def total_error(self) -> float | None:
        if self.fnr is None or self.fpr is None:
            return None
        return self.fnr + self.fpr


def _truth_vector(truth) -> np.ndarray:
    return np.asarray(truth.x1 if isinstance(truth, GroundTruth) else truth)


def evaluate(decision, truth) -> TrialMetrics:
    """Compare calls against the time-1 statuses (a ``GroundTruth`` or a vector)."""
    decision = np.asarray(decision)
    x1 = _truth_vector(truth)
    if decision.shape != x1.shape:
        raise ValueError(f"decision shape {decision.shape} does not match truth shape {x1.shape}")
    infected = x1 == 1
    called = decision == 1
    n_inf = int(infected.sum())
    n_healthy = x1.size - n_inf
    fn = int(np.sum(infected & ~called))
    fp = int(np.sum(~infected & called))
    return TrialMetrics(
        success=fn == 0 and fp == 0,
        fnr=fn / n_inf if n_inf else None,
        fpr=fp / n_healthy if n_healthy else None,
    )


@dataclass(frozen=True)
class ThresholdSweep:
    """Per-threshold counts for one LLR vector; arrays are aligned with ``taus``."""

    taus: np.ndarray
    success: np.ndarray
    false_negatives: np.ndarray
    false_positives: np.ndarray
    n_infected: int
    n_healthy: int

    @property
    def fnr(self) -> np.ndarray | None:
        return self.false_negatives / self.n_infected if self.n_infected else None

    @property
    def fpr(self) -> np.ndarray | None:
        return self.false_positives / self.n_healthy if self.n_healthy else None


def sweep_thresholds(llr, truth, taus) -> ThresholdSweep:
    """Evaluate ``llr >= tau`` for every tau at once via sorted LLRs."""
    llr = np.asarray(llr, dtype=float)
    x1 = _truth_vector(truth)
    taus = np.asarray(taus, dtype=float)
    inf_llr = np.sort(llr[x1 == 1])
    healthy_llr = np.sort(llr[x1 == 0])
    fn = np.searchsorted(inf_llr, taus, side="left")
    fp = healthy_llr.size - np.searchsorted(healthy_llr, taus, side="left")
    return ThresholdSweep(
        taus=taus,
        success=(fn == 0) & (fp == 0),
        false_negatives=fn,
        false_positives=fp,
        n_infected=int(inf_llr.size),
        n_healthy=int(healthy_llr.size),
    )
