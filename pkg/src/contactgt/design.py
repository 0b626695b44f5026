"""Pooling designs: sparse M x N testing matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


class TestMatrix:
    """Sparse binary testing matrix stored as row and column adjacency.

    ``rows[t]`` is the sorted array of individuals pooled in test ``t`` and
    ``cols[i]`` the sorted array of tests containing individual ``i``.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    def __init__(self, n_individuals: int, rows):
        if n_individuals < 1:
            raise ValueError("n_individuals must be >= 1")
        checked = []
        for t, row in enumerate(rows):
            row = np.asarray(sorted(int(i) for i in row), dtype=np.int64)
            if row.size and (row[0] < 0 or row[-1] >= n_individuals):
                raise ValueError(f"test {t}: individual index out of range [0, {n_individuals})")
            if np.any(np.diff(row) == 0):
                raise ValueError(f"test {t}: duplicate individual index")
            row.setflags(write=False)
            checked.append(row)
        self.n_individuals = int(n_individuals)
        self.rows = tuple(checked)

    @property
    def n_tests(self) -> int:
        return len(self.rows)

    @cached_property
    def edge_test(self) -> np.ndarray:
        """Test index of every nonzero entry, in row-major order."""
        sizes = [len(r) for r in self.rows]
        return np.repeat(np.arange(self.n_tests, dtype=np.int64), sizes)

    @cached_property
    def edge_item(self) -> np.ndarray:
        """Individual index of every nonzero entry, aligned with ``edge_test``."""
        if not self.rows:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(self.rows).astype(np.int64)

    @cached_property
    def cols(self) -> tuple[np.ndarray, ...]:
        order = np.argsort(self.edge_item, kind="stable")
        items, tests = self.edge_item[order], self.edge_test[order]
        bounds = np.searchsorted(items, np.arange(self.n_individuals + 1))
        return tuple(tests[bounds[i] : bounds[i + 1]] for i in range(self.n_individuals))

    @property
    def n_edges(self) -> int:
        return int(self.edge_item.size)

    def to_dense(self) -> np.ndarray:
        """Dense 0/1 array; for debugging output only."""
        a = np.zeros((self.n_tests, self.n_individuals), dtype=np.uint8)
        a[self.edge_test, self.edge_item] = 1
        return a

    def __eq__(self, other):
        if not isinstance(other, TestMatrix):
            return NotImplemented
        return (
            self.n_individuals == other.n_individuals
            and self.n_tests == other.n_tests
            and all(np.array_equal(a, b) for a, b in zip(self.rows, other.rows))
        )

    def __repr__(self):
        return f"TestMatrix(n_tests={self.n_tests}, n_individuals={self.n_individuals}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class DesignParams:
    nu: float
    k_expected: float

    def __post_init__(self):
        if self.nu <= 0 or self.k_expected <= 0:
            raise ValueError("nu and k_expected must be positive")
        if self.nu / self.k_expected > 1:
            raise ValueError(f"inclusion probability nu/K = {self.nu / self.k_expected:.4g} exceeds 1")

    @property
    def inclusion_prob(self) -> float:
        return self.nu / self.k_expected


def from_rows(n_individuals: int, rows) -> TestMatrix:
    return TestMatrix(n_individuals, rows)


def identity_design(n_individuals: int) -> TestMatrix:
    return TestMatrix(n_individuals, [[i] for i in range(n_individuals)])


def bernoulli_design(
    n_individuals: int, n_tests: int, design: DesignParams, rng: np.random.Generator
) -> TestMatrix:
    """Each individual joins each test independently with probability nu/K."""
    if n_tests < 0:
        raise ValueError("n_tests must be non-negative")
    mask = rng.random((n_tests, n_individuals)) < design.inclusion_prob
    return TestMatrix(n_individuals, [np.flatnonzero(r) for r in mask])


def ln2_design(k_expected: float) -> DesignParams:
    return DesignParams(nu=math.log(2.0), k_expected=k_expected)


def format_design(matrix: TestMatrix) -> str:
    """Text form: header ``M N`` then one line of 0-based indices per test."""
    lines = [f"{matrix.n_tests} {matrix.n_individuals}"]
    lines += [" ".join(str(i) for i in row) for row in matrix.rows]
    return "\n".join(lines) + "\n"


def parse_design(text: str) -> TestMatrix:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValueError("empty design file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("design header must be 'M N'")
    m, n = int(header[0]), int(header[1])
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"header declares {m} tests but {len(body)} lines follow")
    return TestMatrix(n, [[int(tok) for tok in line.split()] for line in body])


def save_design(matrix: TestMatrix, path) -> None:
    Path(path).write_text(format_design(matrix), encoding="utf-8", newline="\n")


def load_design(path) -> TestMatrix:
    return parse_design(Path(path).read_text(encoding="utf-8"))
