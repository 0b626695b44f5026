"""Loopy belief propagation decoders for noisy group testing.

Three decoders share one message-passing engine:

* ``bpip`` -- sum-product on the Tanner graph with the prevalence ``p`` as
  every individual's prior,
* ``bpup`` -- the same decoder with the contact-count priors from
  :func:`contactgt.population.updated_priors`,
* ``bpcg`` -- sum-product on the combined graph (time-0 statuses, interaction
  nodes, time-1 statuses, tests).

Messages are normalized pairs ``(m(0), m(1))`` kept as two flat float arrays
indexed by edge. Products over "all neighbours but one" are taken as
log-domain group sums minus the own term, with zero factors counted
separately so an exact zero never turns into ``0/0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import NoiseParams
from .design import TestMatrix
from .population import InteractionGraph, PopulationParams, updated_priors

LLR_CLAMP = 700.0
DEFAULT_EPS = 1e-12

PRIOR_MODES = ("initial", "updated")


@dataclass(frozen=True)
class DecoderConfig:
    iterations: int = 15
    threshold: float = 0.0
    prior_mode: str = "initial"
    epsilon_clamp: float = DEFAULT_EPS

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.prior_mode not in PRIOR_MODES:
            raise ValueError(f"prior_mode must be one of {PRIOR_MODES}")
        if not 0.0 < self.epsilon_clamp <= 1e-6:
            raise ValueError("epsilon_clamp must lie in (0, 1e-6]")


# ---------------------------------------------------------------------------
# array helpers


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _group_logsum(logs, groups, n_groups):
    neg = np.isneginf(logs)
    finite = np.where(neg, 0.0, logs)
    total = np.bincount(groups, weights=finite, minlength=n_groups)
    zeros = np.bincount(groups, weights=neg, minlength=n_groups)
    return neg, finite, total, zeros


def _logprod(logs, groups, n_groups):
    """Per-group sum of log factors (``-inf`` if any factor is zero)."""
    # factors are probabilities, so a -inf total can only come from a zero
    return np.bincount(groups, weights=logs, minlength=n_groups)


def _logprod_excluding(logs, groups, n_groups):
    """For every entry, the sum of log factors of its group without itself."""
    total = np.bincount(groups, weights=logs, minlength=n_groups)
    if np.isfinite(total).all():
        return total[groups] - logs
    neg, finite, total, zeros = _group_logsum(logs, groups, n_groups)
    out = total[groups] - finite
    return np.where(zeros[groups] - neg > 0, -np.inf, out)


def _normalize(a0, a1, eps):
    """Scale so the larger component is 1, floor both at ``eps``, renormalize."""
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    mx = np.maximum(a0, a1)
    mx = np.where(mx > 0, mx, 1.0)
    b0 = np.maximum(a0 / mx, eps)
    b1 = np.maximum(a1 / mx, eps)
    s = b0 + b1
    b0 /= s
    b1 /= s
    return b0, b1


def _normalize_log(l0, l1, eps):
    mx = np.maximum(l0, l1)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    return _normalize(np.exp(l0 - mx), np.exp(l1 - mx), eps)


def _clamp_llr(llr):
    return np.clip(np.nan_to_num(llr, nan=0.0, posinf=LLR_CLAMP, neginf=-LLR_CLAMP), -LLR_CLAMP, LLR_CLAMP)


# ---------------------------------------------------------------------------
# per-node update formulas (unnormalized); shared by the scalar helpers and
# the vectorized engines


def _test_to_item_pair(y, rho, prod, rest):
    """Test message given ``prod`` = product of the other members' ``m(0)``
    and ``rest`` = 1 - prod."""
    negative = np.asarray(y) == 0
    a0 = np.where(negative, rho + (1.0 - 2.0 * rho) * prod, rho + (1.0 - 2.0 * rho) * rest)
    a1 = np.where(negative, rho, 1.0 - rho)
    return a0, a1


def _interaction_to_item1_pair(g0, g1, prod, rest):
    # prod = prod over other members of (1 - q*gamma(1)); rest = 1 - prod
    return g0 * prod, g1 + g0 * rest


def _interaction_to_self0_pair(d0, d1, prod, rest):
    return d0 * prod + d1 * rest, d1


def _interaction_to_other0_pair(g0, g1, d0, d1, prod, rest, q):
    # prod/rest range over the members other than the target and the owner
    both = g1 * d1
    a0 = both + g0 * (d0 * prod + d1 * rest)
    a1 = both + g0 * ((1.0 - q) * d0 * prod + d1 * (q + (1.0 - q) * rest))
    return a0, a1


# ---------------------------------------------------------------------------
# scalar helpers


def signed_subset_sum(gamma_ones, q: float) -> float:
    r"""Closed form of ``sum_{S != {}} (-q)^{|S|} prod_{i in S} gamma_i``.

    Equals ``prod_i (1 - q gamma_i) - 1``; evaluated through ``log1p``/``expm1``
    to keep precision when the product is close to one.
    """
    g = np.asarray(gamma_ones, dtype=float)
    with np.errstate(divide="ignore"):
        return float(np.expm1(np.sum(np.log1p(-q * g))))


def test_to_item_update(y_t: int, rho: float, incoming_zero_probs, eps: float = DEFAULT_EPS):
    """Message from a test to one member given the other members' ``m(0)``."""
    prod = float(np.prod(np.asarray(incoming_zero_probs, dtype=float)))
    a0, a1 = _test_to_item_pair(y_t, rho, prod, 1.0 - prod)
    m0, m1 = _normalize(a0, a1, eps)
    return np.array([float(m0), float(m1)])


test_to_item_update.__test__ = False  # not a pytest test despite the name


def interaction_to_item1_update(gamma_self, other_gamma_ones, q: float, eps: float = DEFAULT_EPS):
    """Message from interaction node ``I_j`` to individual ``j`` at time 1.

    ``gamma_self`` is the pair sent by ``j`` at time 0; ``other_gamma_ones``
    lists ``gamma(1)`` sent by the contacts of ``j``.
    """
    s = signed_subset_sum(other_gamma_ones, q)
    a0, a1 = _interaction_to_item1_pair(gamma_self[0], gamma_self[1], 1.0 + s, -s)
    m0, m1 = _normalize(a0, a1, eps)
    return np.array([float(m0), float(m1)])


def interaction_to_item0_update(j_msgs, other_gamma_ones, q: float, target_is_self: bool, eps: float = DEFAULT_EPS):
    """Message from interaction node ``I_j`` to a time-0 individual.

    ``j_msgs = (gamma_{j->I_j}, delta_{j->I_j})``. For the owner ``j`` itself
    (``target_is_self``) ``other_gamma_ones`` covers all contacts of ``j``;
    for a contact ``i`` it covers the contacts other than ``i``.
    """
    gamma_j, delta_j = j_msgs
    s = signed_subset_sum(other_gamma_ones, q)
    if target_is_self:
        a0, a1 = _interaction_to_self0_pair(delta_j[0], delta_j[1], 1.0 + s, -s)
    else:
        a0, a1 = _interaction_to_other0_pair(
            gamma_j[0], gamma_j[1], delta_j[0], delta_j[1], 1.0 + s, -s, q
        )
    m0, m1 = _normalize(a0, a1, eps)
    return np.array([float(m0), float(m1)])


def threshold(llr, tau: float) -> np.ndarray:
    """Call individual ``i`` infected when ``llr[i] >= tau``."""
    return (np.asarray(llr) >= tau).astype(np.uint8)


def tanner_priors(params: PopulationParams, graph: InteractionGraph | None, mode: str) -> np.ndarray:
    if mode == "initial":
        return np.full(params.n_individuals, params.prevalence)
    if mode == "updated":
        if graph is None:
            raise ValueError("updated priors need the interaction graph")
        return updated_priors(params, graph)
    raise ValueError(f"unknown prior mode {mode!r}")


# ---------------------------------------------------------------------------
# engines


def _validate(matrix: TestMatrix, y, noise: NoiseParams):
    y = np.asarray(y, dtype=np.uint8)
    if y.shape != (matrix.n_tests,):
        raise ValueError(f"outcomes have shape {y.shape}, expected ({matrix.n_tests},)")
    if np.any(y > 1):
        raise ValueError("outcomes must be binary")
    if not isinstance(noise, NoiseParams):
        noise = NoiseParams(float(noise))
    if noise.flip_prob == 0.5:
        raise ValueError("flip_prob = 0.5 makes every test uninformative")
    return y, noise.flip_prob


class _TannerLayer:
    """Tests <-> time-1 individuals; the half shared by both engines."""

    def __init__(self, matrix: TestMatrix, y, rho: float, eps: float):
        self.n_items = matrix.n_individuals
        self.n_tests = matrix.n_tests
        self.edge_test = matrix.edge_test
        self.edge_item = matrix.edge_item
        self.y_edge = y[self.edge_test]
        self.rho = rho
        self.eps = eps
        n_e = self.edge_item.size
        self.mu_ti = (np.full(n_e, 0.5), np.full(n_e, 0.5))
        self.mu_it = (np.full(n_e, 0.5), np.full(n_e, 0.5))

    def tests_to_items(self):
        L = _logprod_excluding(_log(self.mu_it[0]), self.edge_test, self.n_tests)
        a0, a1 = _test_to_item_pair(self.y_edge, self.rho, np.exp(L), -np.expm1(L))
        self.mu_ti = _normalize(a0, a1, self.eps)

    def items_to_tests(self, log_b0, log_b1):
        """``log_b*`` are per-individual log local factors (prior or delta)."""
        e = self.edge_item
        l0 = log_b0[e] + _logprod_excluding(_log(self.mu_ti[0]), e, self.n_items)
        l1 = log_b1[e] + _logprod_excluding(_log(self.mu_ti[1]), e, self.n_items)
        self.mu_it = _normalize_log(l0, l1, self.eps)

    def test_evidence(self):
        """Per-individual log products of all incoming test messages."""
        e = self.edge_item
        return (
            _logprod(_log(self.mu_ti[0]), e, self.n_items),
            _logprod(_log(self.mu_ti[1]), e, self.n_items),
        )

    def llr(self, log_b0, log_b1):
        ev0, ev1 = self.test_evidence()
        with np.errstate(invalid="ignore"):
            return _clamp_llr((log_b1 + ev1) - (log_b0 + ev0))


class TannerBP:
    """Sum-product on the Tanner graph with fixed per-individual priors."""

    def __init__(self, matrix: TestMatrix, y, priors, noise: NoiseParams, epsilon_clamp: float = DEFAULT_EPS):
        y, rho = _validate(matrix, y, noise)
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (matrix.n_individuals,):
            raise ValueError(f"priors have shape {priors.shape}, expected ({matrix.n_individuals},)")
        if np.any((priors < 0) | (priors > 1)):
            raise ValueError("priors must lie in [0, 1]")
        self.layer = _TannerLayer(matrix, y, rho, epsilon_clamp)
        self.log_prior0 = _log(1.0 - priors)
        self.log_prior1 = _log(priors)
        pe = priors[self.layer.edge_item]
        self.layer.mu_it = (1.0 - pe, pe)
        self.iteration = 0

    def step(self):
        self.layer.tests_to_items()
        self.layer.items_to_tests(self.log_prior0, self.log_prior1)
        self.iteration += 1

    def llr(self) -> np.ndarray:
        return self.layer.llr(self.log_prior0, self.log_prior1)

    def messages(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        return {"item_to_test": self.layer.mu_it, "test_to_item": self.layer.mu_ti}


class CombinedBP:
    """Sum-product on the combined interaction + Tanner graph.

    Interaction edges are laid out as ``N`` self edges ``(I_j, j)`` followed by
    both orientations of every contact, so ``[:N]`` indexes the owners.
    """

    def __init__(
        self,
        matrix: TestMatrix,
        y,
        graph: InteractionGraph,
        params: PopulationParams,
        noise: NoiseParams,
        epsilon_clamp: float = DEFAULT_EPS,
    ):
        y, rho = _validate(matrix, y, noise)
        n = matrix.n_individuals
        if graph.n_individuals != n or params.n_individuals != n:
            raise ValueError("matrix, graph and params disagree on the number of individuals")
        self.n = n
        self.q = params.contagion
        self.eps = epsilon_clamp
        self.layer = _TannerLayer(matrix, y, rho, epsilon_clamp)
        a, b = graph.edges[:, 0], graph.edges[:, 1]
        self.cross_fac = np.concatenate([a, b])
        self.cross_var = np.concatenate([b, a])
        self.ie_var = np.concatenate([np.arange(n), self.cross_var])
        n_ie = self.ie_var.size
        p = params.prevalence
        self.log_p0 = np.full(n, float(_log(1.0 - p)))
        self.log_p1 = np.full(n, float(_log(p)))
        self.gamma_up = (np.full(n_ie, 1.0 - p), np.full(n_ie, p))
        self.gamma_down = (np.full(n_ie, 0.5), np.full(n_ie, 0.5))
        self.delta_down = (np.full(n, 1.0 - p), np.full(n, p))
        self.delta_up = (np.full(n, 0.5), np.full(n, 0.5))
        self.iteration = 0

    def step(self):
        n, q, eps = self.n, self.q, self.eps
        g0, g1 = self.gamma_up
        gs0, gs1 = g0[:n], g1[:n]
        with np.errstate(divide="ignore"):
            logs_c = np.log1p(-q * g1[n:])
        L = _logprod(logs_c, self.cross_fac, n)
        prod, rest = np.exp(L), -np.expm1(L)

        # interaction -> time-1 individual
        self.delta_down = _normalize(*_interaction_to_item1_pair(gs0, gs1, prod, rest), eps)
        # time-1 individual -> tests, tests -> time-1 individual
        self.layer.items_to_tests(_log(self.delta_down[0]), _log(self.delta_down[1]))
        self.layer.tests_to_items()
        # time-1 individual -> own interaction node
        self.delta_up = _normalize_log(*self.layer.test_evidence(), eps)

        # interaction -> time-0 individuals (gamma_up unchanged since the top)
        d0, d1 = self.delta_up
        self_down = _normalize(*_interaction_to_self0_pair(d0, d1, prod, rest), eps)
        Lx = _logprod_excluding(logs_c, self.cross_fac, n)
        j = self.cross_fac
        cross_down = _normalize(
            *_interaction_to_other0_pair(gs0[j], gs1[j], d0[j], d1[j], np.exp(Lx), -np.expm1(Lx), q),
            eps,
        )
        self.gamma_down = (
            np.concatenate([self_down[0], cross_down[0]]),
            np.concatenate([self_down[1], cross_down[1]]),
        )

        # time-0 individual -> interaction nodes
        v = self.ie_var
        l0 = self.log_p0[v] + _logprod_excluding(_log(self.gamma_down[0]), v, n)
        l1 = self.log_p1[v] + _logprod_excluding(_log(self.gamma_down[1]), v, n)
        self.gamma_up = _normalize_log(l0, l1, eps)
        self.iteration += 1

    def llr(self) -> np.ndarray:
        return self.layer.llr(_log(self.delta_down[0]), _log(self.delta_down[1]))

    def messages(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        return {
            "item_to_test": self.layer.mu_it,
            "test_to_item": self.layer.mu_ti,
            "item0_to_interaction": self.gamma_up,
            "interaction_to_item0": self.gamma_down,
            "interaction_to_item1": self.delta_down,
            "item1_to_interaction": self.delta_up,
        }


def bp_decode(matrix: TestMatrix, y, priors, noise: NoiseParams, config: DecoderConfig) -> np.ndarray:
    dec = TannerBP(matrix, y, priors, noise, config.epsilon_clamp)
    for _ in range(config.iterations):
        dec.step()
    return dec.llr()


def bpcg_decode(
    matrix: TestMatrix,
    y,
    graph: InteractionGraph,
    params: PopulationParams,
    noise: NoiseParams,
    config: DecoderConfig,
) -> np.ndarray:
    dec = CombinedBP(matrix, y, graph, params, noise, config.epsilon_clamp)
    for _ in range(config.iterations):
        dec.step()
    return dec.llr()
