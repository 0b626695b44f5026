"""Interaction model: contact graphs, two-stage infection ground truth and priors."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class PopulationParams:
    n_individuals: int
    prevalence: float
    contagion: float
    interaction_prob: float = 0.0

    def __post_init__(self):
        if self.n_individuals < 1:
            raise ValueError(f"n_individuals must be >= 1, got {self.n_individuals}")
        _check_prob("prevalence", self.prevalence)
        _check_prob("contagion", self.contagion)
        _check_prob("interaction_prob", self.interaction_prob)


class InteractionGraph:
    """Undirected contact graph without self-loops.

    ``edges`` holds each unordered pair once as ``(i, j)`` with ``i < j``;
    ``neighbors[i]`` is the sorted array of contacts of ``i``.
    """

    def __init__(self, n_individuals: int, edges=()):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n_individuals:
                raise ValueError("contact index out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValueError("self-contacts are not allowed")
            edges = np.sort(edges, axis=1)
            edges = np.unique(edges, axis=0)
        self.n_individuals = int(n_individuals)
        self.edges = edges
        self.edges.setflags(write=False)

    @classmethod
    def _from_canonical(cls, n_individuals: int, edges: np.ndarray) -> "InteractionGraph":
        """Skip validation for edges already unique with ``i < j`` in sorted order."""
        g = cls.__new__(cls)
        g.n_individuals = int(n_individuals)
        g.edges = edges
        g.edges.setflags(write=False)
        return g

    @cached_property
    def neighbors(self) -> tuple[np.ndarray, ...]:
        nbrs = [[] for _ in range(self.n_individuals)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(np.array(sorted(n), dtype=np.int64) for n in nbrs)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges.ravel(), minlength=self.n_individuals)
        deg.setflags(write=False)
        return deg

    def __eq__(self, other):
        if not isinstance(other, InteractionGraph):
            return NotImplemented
        return self.n_individuals == other.n_individuals and np.array_equal(self.edges, other.edges)

    def __repr__(self):
        return f"InteractionGraph(n_individuals={self.n_individuals}, n_edges={len(self.edges)})"


@dataclass(frozen=True)
class GroundTruth:
    x0: np.ndarray
    x1: np.ndarray

    def __post_init__(self):
        if self.x0.shape != self.x1.shape:
            raise ValueError("x0 and x1 must have the same length")
        if np.any(self.x0 > self.x1):
            raise ValueError("individuals infected at time 0 must stay infected at time 1")


@lru_cache(maxsize=8)
def _pairs(n: int):
    iu, ju = np.triu_indices(n, k=1)
    iu.setflags(write=False)
    ju.setflags(write=False)
    return iu, ju


def sample_interaction_graph(params: PopulationParams, rng: np.random.Generator) -> InteractionGraph:
    """Each unordered pair becomes a contact independently with ``interaction_prob``."""
    n = params.n_individuals
    iu, ju = _pairs(n)
    keep = rng.random(iu.size) < params.interaction_prob
    # triu order is already lexicographic and free of duplicates
    return InteractionGraph._from_canonical(n, np.column_stack([iu[keep], ju[keep]]))


def sample_ground_truth(
    params: PopulationParams, graph: InteractionGraph, rng: np.random.Generator
) -> GroundTruth:
    if graph.n_individuals != params.n_individuals:
        raise ValueError("graph size does not match params")
    n = params.n_individuals
    x0 = (rng.random(n) < params.prevalence).astype(np.uint8)
    # One independent transmission draw per direction of every contact.
    a, b = graph.edges[:, 0], graph.edges[:, 1]
    draws = rng.random((2, len(a))) < params.contagion
    hit_b = b[(x0[a] == 1) & draws[0]]
    hit_a = a[(x0[b] == 1) & draws[1]]
    x1 = x0.copy()
    x1[hit_b] = 1
    x1[hit_a] = 1
    return GroundTruth(x0=x0, x1=x1)


def _one_minus_power(base_deficit: float, exponent):
    """``1 - (1 - base_deficit) ** exponent`` without cancellation; exact 0 at exponent 0."""
    exponent = np.asarray(exponent, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.expm1(exponent * np.log1p(-base_deficit))
    return np.where(exponent == 0, 0.0, out)


def updated_priors(params: PopulationParams, graph: InteractionGraph) -> np.ndarray:
    """Probability of being infected at time 1 given only the contact count.

    Evaluates ``1 - (1-p)(1-pq)^d`` as ``p + (1-p)(1 - (1-pq)^d)`` so that
    isolated individuals get exactly ``p``.
    """
    p, q = params.prevalence, params.contagion
    return p + (1.0 - p) * _one_minus_power(p * q, graph.degrees)


def expected_infected(params: PopulationParams) -> float:
    """Mean number infected at time 1 when contacts are Bernoulli(theta) over all pairs."""
    n, p, q, theta = (
        params.n_individuals,
        params.prevalence,
        params.contagion,
        params.interaction_prob,
    )
    return float(n * (p + (1.0 - p) * _one_minus_power(p * q * theta, n - 1)))
