"""Random small instances and brute-force references shared by the tests."""

import itertools

import networkx as nx
import numpy as np

from contactgt.design import from_rows
from contactgt.oracle import contagion_conditional


def random_tanner_forest(rng, n_max=10, m_max=6):
    """Random acyclic Tanner graph: each new node attaches to at most one earlier node of the other kind."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    rows = [[] for _ in range(m)]
    # grow a forest over individuals (0..n-1) and tests (n..n+m-1) in random order
    order = rng.permutation(n + m)
    placed_items, placed_tests = [], []
    for node in order:
        if node < n:
            if placed_tests and rng.random() < 0.85:
                rows[placed_tests[rng.integers(len(placed_tests))]].append(int(node))
            placed_items.append(int(node))
        else:
            t = int(node - n)
            if placed_items and rng.random() < 0.85:
                rows[t].append(placed_items[rng.integers(len(placed_items))])
            placed_tests.append(t)
    return from_rows(n, rows)


def factor_graph(matrix):
    g = nx.Graph()
    g.add_nodes_from(("x", i) for i in range(matrix.n_individuals))
    g.add_nodes_from(("t", t) for t in range(matrix.n_tests))
    g.add_edges_from((("t", int(t)), ("x", int(i))) for t, i in zip(matrix.edge_test, matrix.edge_item))
    return g


def tanner_diameter(matrix):
    g = factor_graph(matrix)
    return max(nx.diameter(g.subgraph(c)) for c in nx.connected_components(g))


def sample_outcomes(matrix, priors, rho, rng):
    x = (rng.random(matrix.n_individuals) < priors).astype(np.uint8)
    y = np.array([int(x[row].any()) if row.size else 0 for row in matrix.rows], dtype=np.uint8)
    return y ^ (rng.random(y.size) < rho).astype(np.uint8)


def pool_likelihood(y_t, pooled, rho):
    return 1.0 - rho if bool(pooled) == bool(y_t) else rho


def brute_tanner_posterior(matrix, y, priors, rho):
    """P(x_i = 1 | y) by a plain loop over all configurations."""
    n = matrix.n_individuals
    on = np.zeros(n)
    total = 0.0
    for x in itertools.product((0, 1), repeat=n):
        w = 1.0
        for i in range(n):
            w *= priors[i] if x[i] else 1.0 - priors[i]
        for t, row in enumerate(matrix.rows):
            w *= pool_likelihood(y[t], any(x[i] for i in row), rho)
        total += w
        on += w * np.array(x)
    return on / total


def brute_interaction_messages(gamma, delta_j, q, owner):
    """Sum-product messages out of interaction node I_owner by direct marginalisation.

    ``gamma`` maps each member of N(I_owner) (owner included) to its incoming
    pair; ``delta_j`` is the incoming pair from the owner's time-1 variable.
    Returns (to time-1 owner, {member: to time-0 member}).
    """
    members = sorted(gamma)
    down1 = np.zeros(2)
    down0 = {k: np.zeros(2) for k in members}
    for x0 in itertools.product((0, 1), repeat=len(members)):
        status = dict(zip(members, x0))
        contacts = sum(status[k] for k in members if k != owner)
        p_healthy = contagion_conditional(status[owner], contacts, q)
        weight0 = np.prod([gamma[k][status[k]] for k in members])
        for x1, f in ((0, p_healthy), (1, 1.0 - p_healthy)):
            down1[x1] += f * weight0
            for k in members:
                rest = weight0 / gamma[k][status[k]] if gamma[k][status[k]] else np.prod(
                    [gamma[o][status[o]] for o in members if o != k]
                )
                down0[k][status[k]] += f * rest * delta_j[x1]
    return down1 / down1.sum(), {k: v / v.sum() for k, v in down0.items()}
