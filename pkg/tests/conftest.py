"""Shared helpers: independent reference implementations used as oracles.

These deliberately avoid the library's optimized code paths (fancy CSR
sweeps, golden-section refinement) so that agreement is evidence, not
tautology.
"""

import numpy as np
import pytest

from treebellman import BellmanQuery, TreeFunction, omega_p


def oracle_bellman3(p: float, f: float, F: float, k: float, n: int = 1_000_000):
    """Brute-force restricted Bellman value: dense grid over the split mass.

    Independent of the library optimizer: no feasibility preprocessing, no
    golden refinement, just the objective maximized over a uniform grid.
    The only shortcut is an exact prune: omega_p <= p/(p-1) pointwise, so
    grid points with A (p/(p-1))^p below an already-evaluated objective
    value can never attain the maximum and are skipped unevaluated.
    """
    if k >= 1.0:
        return float(F * omega_p(min(f**p / F, 1.0), p) ** p), f  # B = f forced
    B = np.linspace(0.0, f, n)
    A = F - (f - B) ** p / (1.0 - k) ** (p - 1.0)
    x = np.full(n, np.inf)
    pos = A > 0.0
    x[pos] = B[pos] ** p / (k ** (p - 1.0) * A[pos])
    feasible = np.flatnonzero(x <= 1.0 + 1e-12)  # ratio > 1: floor exceeds F
    if feasible.size == 0:
        return 0.0, 0.0

    def objective(idx):
        return A[idx] * omega_p(np.minimum(x[idx], 1.0), p) ** p

    probe = feasible[:: max(1, feasible.size // 2048)]
    best0 = float(objective(probe).max())
    doob = (p / (p - 1.0)) ** p
    cand = feasible[A[feasible] * doob >= best0]
    val = objective(cand)
    i = int(np.argmax(val))
    return float(val[i]), float(B[cand[i]])


def brute_force_maximal(tf: TreeFunction) -> np.ndarray:
    """Reference maximal function: per-leaf loop over all ancestors."""
    tree = tf.tree
    mu = tree.measures
    total = np.zeros(tree.n_nodes)
    np.add.at(total, tree.leaves, tf.values * tree.leaf_measures)
    # accumulate leaf mass upward one node at a time (slow, obviously right)
    for i in range(tree.n_nodes - 1, 0, -1):
        total[tree.parents[i]] += total[i]
    out = np.empty(tf.values.shape)
    for j, leaf in enumerate(tree.leaves):
        best = -np.inf
        node = int(leaf)
        while node != -1:
            best = max(best, total[node] / mu[node])
            node = int(tree.parents[node])
        out[j] = best
    return out


def random_admissible_query(rng: np.random.Generator, with_k: bool = True) -> BellmanQuery:
    p = float(rng.uniform(1.2, 5.0))
    f = float(rng.uniform(0.2, 3.0))
    F = f**p / float(rng.uniform(0.05, 1.0))
    k = float(rng.uniform(0.05, 0.999)) if with_k else None
    return BellmanQuery(p, f, F, k)


def random_step_function(rng: np.random.Generator, max_pieces: int = 10, high: float = 5.0):
    from treebellman import StepFunction1D

    m = int(rng.integers(2, max_pieces + 1))
    inner = np.sort(rng.uniform(0.0, 1.0, m - 1))
    bp = np.concatenate(([0.0], inner, [1.0]))
    vals = np.sort(rng.uniform(0.0, high, m))[::-1].copy()  # nonincreasing
    return StepFunction1D(bp, vals)


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
