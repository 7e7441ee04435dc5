"""Seeded randomized verification batteries.

One battery instance draws a tree from one of three branching-profile
families (binary, ternary, mixed 2/3 children; Dirichlet measure
fractions per level), i.i.d. uniform leaf values, an exponent p (mostly
non-integer, periodically exactly 2 or 3 so both moment-integration
paths run), and then checks, with exact arithmetic on the tree side:

  * the weak-type (1,1) inequality at a random level,
  * pointwise Hardy domination of the rearranged maximal function,
  * the global p-moment domination,
  * the restricted moment bound on random leaf unions,
  * the Hoelder feasibility of the rearrangement data at those measures,
  * consistency of the exact p-moment of M phi with the Bellman value
    of the observed moment pair.

Everything is driven by one numpy Generator, so a battery is replayable
from its seed; the summary keeps per-check counts, worst margins, and
every failing report.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bellman import BellmanQuery, bellman_two_var
from .rearrange import (
    check_hardy_domination,
    check_holder_feasibility,
    check_moment_domination,
    check_subset_moment_bound,
)
from .report import VerificationReport
from .trees import TreeFunction, build_tree, check_weak_type, maximal_operator

__all__ = ["BatterySummary", "random_profile", "random_tree_function", "run_battery"]

_PROFILE_KINDS = ("binary", "ternary", "mixed")


def random_profile(rng: np.random.Generator, kind: str, max_depth: int = 12):
    """Per-level branching fractions for one of the three profile families.

    Depths are capped so leaf counts stay near 4096; fractions are
    Dirichlet(4,...) draws, so splits are uneven but bounded away from
    degenerate.
    """
    if kind == "binary":
        depth = int(rng.integers(6, max_depth + 1))
        counts = [2] * depth
    elif kind == "ternary":
        depth = int(rng.integers(4, min(7, max_depth) + 1))
        counts = [3] * depth
    elif kind == "mixed":
        depth = int(rng.integers(5, min(9, max_depth) + 1))
        counts = [int(c) for c in rng.integers(2, 4, size=depth)]
        while int(np.prod(counts)) > 8192:
            counts[int(rng.integers(0, depth))] = 2
    else:
        raise ValueError(f"unknown profile kind {kind!r}")
    return [tuple(rng.dirichlet(np.full(c, 4.0))) for c in counts]


def random_tree_function(
    rng: np.random.Generator, kind: str, max_depth: int = 12, high: float = 10.0
) -> TreeFunction:
    """Random tree from the given profile family with uniform leaf values."""
    tree = build_tree(random_profile(rng, kind, max_depth))
    return TreeFunction(tree, rng.uniform(0.0, high, size=tree.n_leaves))


@dataclass
class BatterySummary:
    """Aggregate outcome of one battery run."""

    seed: int
    n_trees: int
    checks_run: dict[str, int] = field(default_factory=dict)
    worst_margin: dict[str, float] = field(default_factory=dict)
    failures: list[VerificationReport] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def all_passed(self) -> bool:
        return not self.failures

    def record(self, report: VerificationReport) -> None:
        name = report.check
        self.checks_run[name] = self.checks_run.get(name, 0) + 1
        if name not in self.worst_margin or report.margin < self.worst_margin[name]:
            self.worst_margin[name] = float(report.margin)
        if not report.passed:
            self.failures.append(report)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_trees": self.n_trees,
            "checks_run": dict(self.checks_run),
            "worst_margin": {k: float(v) for k, v in self.worst_margin.items()},
            "n_failures": len(self.failures),
            "failures": [r.to_dict() for r in self.failures],
            "all_passed": self.all_passed,
            "elapsed_seconds": self.elapsed,
        }


def _random_leaf_union(rng: np.random.Generator, n_leaves: int) -> np.ndarray:
    rate = rng.uniform(0.1, 0.9)
    sel = np.flatnonzero(rng.random(n_leaves) < rate)
    if sel.size == 0:
        sel = np.array([int(rng.integers(0, n_leaves))])
    return sel


def run_battery(
    n_trees: int = 1000,
    max_depth: int = 12,
    subsets_per_tree: int = 10,
    value_high: float = 10.0,
    seed: int = 42,
) -> BatterySummary:
    """Run the full randomized battery; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    summary = BatterySummary(seed=seed, n_trees=n_trees)
    t0 = time.perf_counter()
    for i in range(n_trees):
        kind = _PROFILE_KINDS[i % len(_PROFILE_KINDS)]
        tf = random_tree_function(rng, kind, max_depth, value_high)
        # exact integers every fifth tree exercise the closed-form moments
        p = float(rng.choice([2.0, 3.0])) if i % 5 == 4 else float(rng.uniform(1.2, 5.0))
        m = maximal_operator(tf)
        lam = float(rng.uniform(0.05, 1.2 * float(m.values.max())))
        summary.record(check_weak_type(tf, lam, seed=seed))
        summary.record(check_hardy_domination(tf, seed=seed))
        summary.record(check_moment_domination(tf, p, seed=seed))
        ks = []
        for _ in range(subsets_per_tree):
            sel = _random_leaf_union(rng, tf.tree.n_leaves)
            rep = check_subset_moment_bound(tf, sel, p, seed=seed)
            summary.record(rep)
            ks.append(rep.parameters["k"])
        for k in ks + [1.0]:
            summary.record(check_holder_feasibility(tf, k, p, seed=seed))
        # exact maximal moment never beats the Bellman value of its moments
        f, F = tf.integral(), tf.moment(p)
        value = bellman_two_var(BellmanQuery(p, f, F))
        lhs = m.moment(p)
        tol = 1e-9 * max(1.0, value)
        summary.record(
            VerificationReport(
                check="bellman_consistency",
                parameters={"p": p, "f": f, "F": F},
                lhs=lhs,
                rhs=value,
                margin=value - lhs,
                tolerance=tol,
                passed=bool(lhs <= value + tol),
                seed=seed,
            )
        )
    summary.elapsed = time.perf_counter() - t0
    return summary
