"""Exhaustive exact inference for small instances.

Used as the reference the BP decoders are checked against. Configurations
are enumerated as integers whose most significant bit is individual 0, so
integer order is lexicographic order and ``argmax`` picks the
lexicographically smallest maximiser. Outcomes that have probability zero
under the model (possible only without noise) yield log-odds 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .bp import LLR_CLAMP
from .channel import NoiseParams
from .design import TestMatrix
from .population import InteractionGraph, PopulationParams

MAX_TANNER_N = 20
MAX_COMBINED_N = 10


@dataclass(frozen=True)
class OracleResult:
    map_estimate: np.ndarray
    posterior_log_odds: np.ndarray
    log_evidence: float


def _configs(n: int) -> np.ndarray:
    codes = np.arange(2**n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.uint8)


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _rho(noise) -> float:
    return noise.flip_prob if isinstance(noise, NoiseParams) else float(noise)


def _test_loglik(matrix: TestMatrix, y, X1: np.ndarray, rho: float) -> np.ndarray:
    """log P(y | x1) for every row of ``X1``."""
    y = np.asarray(y, dtype=np.uint8)
    if y.shape != (matrix.n_tests,):
        raise ValueError("outcome length does not match the matrix")
    out = np.zeros(X1.shape[0])
    log_keep, log_flip = _log(1.0 - rho), _log(rho)
    for t, row in enumerate(matrix.rows):
        pooled = X1[:, row].any(axis=1) if row.size else np.zeros(X1.shape[0], dtype=bool)
        out += np.where(pooled == bool(y[t]), log_keep, log_flip)
    return out


def _log_odds(log_joint: np.ndarray, X: np.ndarray) -> np.ndarray:
    odds = np.empty(X.shape[1])
    with np.errstate(invalid="ignore"):  # impossible evidence gives -inf - -inf
        for i in range(X.shape[1]):
            on = X[:, i] == 1
            odds[i] = logsumexp(log_joint[on]) - logsumexp(log_joint[~on])
    return np.clip(np.nan_to_num(odds, posinf=LLR_CLAMP, neginf=-LLR_CLAMP), -LLR_CLAMP, LLR_CLAMP)


def _argmax_first(log_joint: np.ndarray) -> int:
    best = np.max(log_joint)
    tol = 1e-12 * max(1.0, abs(best)) if np.isfinite(best) else 0.0
    return int(np.flatnonzero(log_joint >= best - tol)[0])


def exact_tanner(matrix: TestMatrix, y, priors, noise) -> OracleResult:
    """Exact posterior over time-1 statuses with independent priors."""
    n = matrix.n_individuals
    if n > MAX_TANNER_N:
        raise ValueError(f"exhaustive search limited to N <= {MAX_TANNER_N}, got {n}")
    priors = np.asarray(priors, dtype=float)
    X = _configs(n)
    log_prior = np.where(X == 1, _log(priors), _log(1.0 - priors)).sum(axis=1)
    log_joint = log_prior + _test_loglik(matrix, y, X, _rho(noise))
    best = _argmax_first(log_joint)
    return OracleResult(
        map_estimate=X[best].copy(),
        posterior_log_odds=_log_odds(log_joint, X),
        log_evidence=float(logsumexp(log_joint)),
    )


def contagion_conditional(self_infected0, infected_contacts0, q):
    """P(x_i^(1) = 0 | time-0 statuses of i and its contacts).

    Zero if ``i`` was already infected, otherwise ``(1 - q)`` per infected
    contact. Works elementwise on arrays and on symbolic ``q``.
    """
    healthy = (1 - q) ** infected_contacts0
    if isinstance(self_infected0, np.ndarray):
        return np.where(self_infected0 == 1, 0.0, healthy)
    return 0 if self_infected0 else healthy


def exact_combined(
    matrix: TestMatrix,
    y,
    graph: InteractionGraph,
    params: PopulationParams,
    noise,
) -> OracleResult:
    """Exact posterior of the two-layer model, enumerating (x0, x1) jointly.

    ``map_estimate`` is the time-1 slice of the joint MAP configuration;
    ties are broken lexicographically on (x0, x1).
    """
    n = matrix.n_individuals
    if n > MAX_COMBINED_N:
        raise ValueError(f"exhaustive search limited to N <= {MAX_COMBINED_N}, got {n}")
    if graph.n_individuals != n or params.n_individuals != n:
        raise ValueError("matrix, graph and params disagree on the number of individuals")
    p, q = params.prevalence, params.contagion
    X = _configs(n)
    adj = np.zeros((n, n), dtype=np.int64)
    adj[graph.edges[:, 0], graph.edges[:, 1]] = 1
    adj[graph.edges[:, 1], graph.edges[:, 0]] = 1

    log_prior0 = np.where(X == 1, _log(p), _log(1.0 - p)).sum(axis=1)
    infected_contacts = X.astype(np.int64) @ adj  # rows: x0 configs
    p_healthy = contagion_conditional(X, infected_contacts, q)
    log_h0, log_h1 = _log(p_healthy), _log(1.0 - p_healthy)
    log_tests = _test_loglik(matrix, y, X, _rho(noise))

    # log_joint[a, b] for x0 = X[a], x1 = X[b]
    on = X == 1
    log_joint = np.empty((X.shape[0], X.shape[0]))
    for a in range(X.shape[0]):
        log_cond = np.where(on, log_h1[a], log_h0[a]).sum(axis=1)
        log_joint[a] = log_prior0[a] + log_cond + log_tests

    flat_best = _argmax_first(log_joint.ravel())
    b_best = flat_best % X.shape[0]
    marg1 = logsumexp(log_joint, axis=0)
    return OracleResult(
        map_estimate=X[b_best].copy(),
        posterior_log_odds=_log_odds(marg1, X),
        log_evidence=float(logsumexp(marg1)),
    )
