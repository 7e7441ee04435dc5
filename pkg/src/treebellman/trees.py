"""Finite probability trees, leaf functions, and the exact maximal operator.

A tree here is a finite rooted partition structure modelling nested
dyadic-like decompositions: the root carries measure one, every internal
node splits into at least two children whose measures sum to the parent's,
and leaves are atoms carrying the function values.  The maximal operator
sends a leaf function phi to

    (M phi)(leaf) = max over ancestors I of the leaf (root and the leaf
                    included) of the average of phi over I,

computed exactly in two passes: one bottom-up accumulation of node
integrals and one top-down running maximum of node averages.  Everything
is stored in flat numpy arrays indexed by node id with parents preceding
children, and all traversals are iterative, so chains thousands of levels
deep are routine.

split_measure approximates a prescribed sub-measure by a disjoint union of
whole nodes via greedy descent (on a binary tree this is exactly the
binary expansion of the target), check_weak_type verifies the weak-type
(1,1) inequality leaf-exactly, and to_dict/from_dict give a JSON-stable
wire form for reproducible fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .report import VerificationReport

__all__ = [
    "Tree",
    "TreeFunction",
    "MeasureSplit",
    "SplitToleranceError",
    "build_tree",
    "binary_tree",
    "chain_tree",
    "node_integrals",
    "maximal_operator",
    "split_measure",
    "check_weak_type",
    "tree_to_dict",
    "tree_from_dict",
    "tree_function_to_dict",
    "tree_function_from_dict",
]

_MEASURE_TOL = 1e-12


class SplitToleranceError(RuntimeError):
    """Requested sub-measure cannot be matched at the available depth."""


class Tree:
    """Immutable rooted measure tree in flat-array form.

    Parameters
    ----------
    parents : array of int
        parents[0] = -1 for the root; parents[i] < i for every other node
        (parents precede children in id order).
    measures : array of float
        Positive node measures; the root has measure 1 and the children of
        every internal node sum to it (tolerance 1e-12, relative).
    levels : array of int, optional
        Depth of each node if the builder already knows it; recomputed
        otherwise.
    """

    def __init__(self, parents, measures, levels=None, validate: bool = True):
        parents = np.ascontiguousarray(parents, dtype=np.int64)
        measures = np.ascontiguousarray(measures, dtype=float)
        n = parents.size
        if n == 0 or measures.size != n:
            raise ValueError("parents and measures must be equal-length and nonempty")
        if parents[0] != -1:
            raise ValueError("node 0 must be the root (parent -1)")
        if n > 1:
            body = parents[1:]
            if body.min() < 0 or np.any(body >= np.arange(1, n)):
                raise ValueError("parents must precede children in id order")
        self.parents = parents
        self.measures = measures
        counts = np.bincount(parents[1:], minlength=n) if n > 1 else np.zeros(n, dtype=np.int64)
        self._child_counts = counts
        # CSR: children of node i are child_data[child_ptr[i]:child_ptr[i+1]],
        # ascending id (stable sort of 1..n-1 by parent)
        self.child_ptr = np.concatenate(([0], np.cumsum(counts)))
        self.child_data = np.argsort(parents[1:], kind="stable").astype(np.int64) + 1
        self.leaves = np.flatnonzero(counts == 0)
        if levels is not None:
            self.levels = np.ascontiguousarray(levels, dtype=np.int64)
        else:
            lev = np.zeros(n, dtype=np.int64)
            par = parents
            for i in range(1, n):  # parents precede children, so one sweep fills it
                lev[i] = lev[par[i]] + 1
            self.levels = lev
        self.depth = int(self.levels.max())
        order = np.argsort(self.levels, kind="stable")
        starts = np.searchsorted(self.levels[order], np.arange(self.depth + 2))
        self._level_nodes = [order[starts[d]:starts[d + 1]] for d in range(self.depth + 1)]
        if validate:
            self._validate()

    def _validate(self) -> None:
        if not np.all(np.isfinite(self.measures)) or self.measures.min() <= 0.0:
            raise ValueError("node measures must be positive and finite")
        if abs(self.measures[0] - 1.0) > _MEASURE_TOL:
            raise ValueError(f"root measure must be 1, got {self.measures[0]!r}")
        internal = np.flatnonzero(self._child_counts > 0)
        if internal.size and self._child_counts[internal].min() < 2:
            raise ValueError("every internal node needs at least two children")
        if self.n_nodes > 1:
            sums = np.zeros(self.n_nodes)
            np.add.at(sums, self.parents[1:], self.measures[1:])
            bad = np.abs(sums[internal] - self.measures[internal]) > _MEASURE_TOL * np.maximum(
                1.0, self.measures[internal]
            )
            if np.any(bad):
                raise ValueError("child measures must sum to the parent measure")

    @property
    def n_nodes(self) -> int:
        return self.parents.size

    @property
    def n_leaves(self) -> int:
        return self.leaves.size

    @property
    def leaf_measures(self) -> np.ndarray:
        return self.measures[self.leaves]

    def children(self, i: int) -> np.ndarray:
        return self.child_data[self.child_ptr[i]:self.child_ptr[i + 1]]

    def is_leaf(self, i: int) -> bool:
        return self._child_counts[i] == 0

    def level_nodes(self, d: int) -> np.ndarray:
        return self._level_nodes[d]

    def subtree_leaves(self, node: int) -> np.ndarray:
        """Leaf ids below (or equal to) the given node, iterative DFS."""
        if self.is_leaf(node):
            return np.array([node], dtype=np.int64)
        out: list[int] = []
        stack = [int(node)]
        while stack:
            i = stack.pop()
            kids = self.children(i)
            if kids.size == 0:
                out.append(i)
            else:
                stack.extend(kids[::-1].tolist())
        return np.array(out, dtype=np.int64)


@dataclass
class TreeFunction:
    """Nonnegative function on the leaves of a tree.

    values[i] is the value on leaf tree.leaves[i].
    """

    tree: Tree
    values: np.ndarray
    validate: bool = True

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.tree.n_leaves,):
            raise ValueError(
                f"need one value per leaf: {self.values.shape} vs {self.tree.n_leaves} leaves"
            )
        if self.validate and (not np.all(np.isfinite(self.values)) or self.values.min() < 0.0):
            raise ValueError("leaf values must be nonnegative and finite")

    @classmethod
    def constant(cls, tree: Tree, c: float) -> "TreeFunction":
        return cls(tree, np.full(tree.n_leaves, float(c)))

    def integral(self) -> float:
        return float(self.values @ self.tree.leaf_measures)

    def moment(self, p) -> float:
        pp = p.p if hasattr(p, "p") else float(p)
        return float(self.values**pp @ self.tree.leaf_measures)


def build_tree(profile: Sequence[Iterable[float]]) -> Tree:
    """Build a tree from per-level branching fractions.

    profile[d] is the tuple of measure fractions (>= 2 entries, positive,
    summing to 1) splitting every node at depth d; nodes at depth
    len(profile) are the leaves.  Construction is vectorized level by
    level, so wide shallow trees and the full binary tree of depth ~20 are
    cheap.
    """
    fracs = []
    for d, fr in enumerate(profile):
        arr = np.asarray(list(fr), dtype=float)
        if arr.size < 2:
            raise ValueError(f"level {d}: need at least two children")
        if arr.min() <= 0.0 or abs(arr.sum() - 1.0) > _MEASURE_TOL:
            raise ValueError(f"level {d}: fractions must be positive and sum to 1")
        fracs.append(arr)
    parents = [np.array([-1], dtype=np.int64)]
    measures = [np.array([1.0])]
    levels = [np.array([0], dtype=np.int64)]
    prev_ids = np.array([0], dtype=np.int64)
    prev_measures = measures[0]
    start = 1
    for d, fr in enumerate(fracs):
        c = fr.size
        parents.append(np.repeat(prev_ids, c))
        new_measures = (prev_measures[:, None] * fr[None, :]).ravel()
        measures.append(new_measures)
        levels.append(np.full(new_measures.size, d + 1, dtype=np.int64))
        prev_ids = np.arange(start, start + new_measures.size, dtype=np.int64)
        prev_measures = new_measures
        start += new_measures.size
    return Tree(
        np.concatenate(parents),
        np.concatenate(measures),
        levels=np.concatenate(levels),
    )


def binary_tree(depth: int) -> Tree:
    """Homogeneous half-half binary tree: 2^depth equal leaves."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return build_tree([(0.5, 0.5)] * depth)


def chain_tree(ratio: float, depth: int) -> Tree:
    """Chain tree: each running node splits into a leaf block of fraction
    (1 - ratio) and a continuation of fraction ratio, depth times.

    Node ids: running node at step m is 2m, its leaf block is 2m + 1; the
    final running node 2*depth is a leaf.  2*depth + 1 nodes total.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    n = 2 * depth + 1
    parents = np.empty(n, dtype=np.int64)
    measures = np.empty(n)
    levels = np.empty(n, dtype=np.int64)
    parents[0], measures[0], levels[0] = -1, 1.0, 0
    run = np.power(ratio, np.arange(depth + 1))  # measure of running node at step m
    for m in range(depth):
        parents[2 * m + 1] = 2 * m
        parents[2 * m + 2] = 2 * m
        measures[2 * m + 1] = run[m] * (1.0 - ratio)
        measures[2 * m + 2] = run[m + 1]
        levels[2 * m + 1] = m + 1
        levels[2 * m + 2] = m + 1
    return Tree(parents, measures, levels=levels)


def node_integrals(tf: TreeFunction) -> np.ndarray:
    """Integral of the function over every node, bottom-up in one sweep."""
    tree = tf.tree
    integ = np.zeros(tree.n_nodes)
    integ[tree.leaves] = tf.values * tree.leaf_measures
    for d in range(tree.depth, 0, -1):
        nodes = tree.level_nodes(d)
        np.add.at(integ, tree.parents[nodes], integ[nodes])
    return integ


def maximal_operator(tf: TreeFunction) -> TreeFunction:
    """Exact tree maximal function of a leaf function.

    Top-down running maximum of ancestor averages; the result lives on the
    same tree.  O(number of nodes) and iterative, so deep chains are fine.
    """
    tree = tf.tree
    avg = node_integrals(tf) / tree.measures
    for d in range(1, tree.depth + 1):
        nodes = tree.level_nodes(d)
        avg[nodes] = np.maximum(avg[nodes], avg[tree.parents[nodes]])
    return TreeFunction(tree, avg[tree.leaves], validate=False)


class MeasureSplit(NamedTuple):
    nodes: list[int]
    achieved: float
    target: float


def split_measure(tree: Tree, node: int, k_target: float, tol: float | None = None) -> MeasureSplit:
    """Greedy disjoint union of descendants of `node` with measure ~ k_target.

    Children are scanned in id order; a child that fits the remaining
    budget is taken whole, otherwise the scan descends into it.  On a
    binary tree this reproduces the binary expansion of
    k_target / measure(node), so the gap is at most measure(node) * 2^-D
    at depth D.  The achieved measure is always reported; if tol is given
    and |achieved - k_target| > tol, SplitToleranceError is raised.
    """
    mu = float(tree.measures[node])
    if not 0.0 < k_target < mu:
        raise ValueError(f"k_target must lie in (0, measure(node)) = (0, {mu!r})")
    slack = _MEASURE_TOL * mu
    remaining = float(k_target)
    chosen: list[int] = []
    stack = tree.children(node)[::-1].tolist()
    while stack and remaining > slack:
        i = stack.pop()
        m = float(tree.measures[i])
        if m <= remaining + slack:
            chosen.append(i)
            remaining -= m
        else:
            stack.extend(tree.children(i)[::-1].tolist())
    achieved = float(np.sum(tree.measures[chosen])) if chosen else 0.0
    if tol is not None and abs(achieved - k_target) > tol:
        raise SplitToleranceError(
            f"requested measure {k_target!r}, achieved {achieved!r}, tolerance {tol!r}"
        )
    return MeasureSplit(chosen, achieved, float(k_target))


def check_weak_type(tf: TreeFunction, lam: float, seed: int | None = None) -> VerificationReport:
    """Weak-type (1,1) inequality at level lam, leaf-exact.

    lhs = measure{M phi > lam}, rhs = (1/lam) * integral of phi over that
    set; the level set is a union of leaves, so both sides are finite sums.
    """
    if not lam > 0.0:
        raise ValueError("level lam must be positive")
    m = maximal_operator(tf)
    sel = m.values > lam
    mu = tf.tree.leaf_measures
    lhs = float(mu[sel].sum())
    rhs = float(tf.values[sel] @ mu[sel]) / lam
    tol = 1e-12 * max(1.0, lhs, rhs)
    return VerificationReport(
        check="weak_type",
        parameters={"lam": float(lam), "n_leaves": tf.tree.n_leaves, "depth": tf.tree.depth},
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        tolerance=tol,
        passed=bool(lhs <= rhs + tol),
        seed=seed,
        details={"level_set_leaves": int(sel.sum())},
    )


def tree_to_dict(tree: Tree) -> dict:
    """JSON-stable wire form: node list with measure and children ids."""
    return {
        "nodes": [
            {"measure": float(tree.measures[i]), "children": tree.children(i).tolist()}
            for i in range(tree.n_nodes)
        ]
    }


def tree_function_to_dict(tf: TreeFunction) -> dict:
    doc = tree_to_dict(tf.tree)
    for i, leaf in enumerate(tf.tree.leaves):
        doc["nodes"][int(leaf)]["value"] = float(tf.values[i])
    return doc


def _parents_from_nodes(nodes: list[dict]) -> np.ndarray:
    n = len(nodes)
    parents = np.full(n, -1, dtype=np.int64)
    for i, nd in enumerate(nodes):
        for c in nd.get("children", ()):
            if not 0 <= c < n:
                raise ValueError(f"child id {c} out of range")
            if parents[c] != -1:
                raise ValueError(f"node {c} has two parents")
            parents[c] = i
    if int((parents == -1).sum()) != 1:
        raise ValueError("document must have exactly one root")
    return parents


def _tree_from_nodes(nodes: list[dict]) -> tuple[Tree, np.ndarray]:
    """Rebuild a Tree; returns (tree, perm) with perm[new_id] = document id."""
    parents = _parents_from_nodes(nodes)
    measures = np.array([nd["measure"] for nd in nodes], dtype=float)
    n = len(nodes)
    perm = np.arange(n, dtype=np.int64)
    if n > 1 and np.any(parents[1:] >= np.arange(1, n)):
        # reorder so parents precede children; deterministic BFS from the root
        root = int(np.flatnonzero(parents == -1)[0])
        order: list[int] = [root]
        seen = 0
        while seen < len(order):
            i = order[seen]
            seen += 1
            order.extend(int(c) for c in nodes[i].get("children", ()))
        perm = np.array(order, dtype=np.int64)
        inv = np.empty(n, dtype=np.int64)
        inv[perm] = np.arange(n)
        old_parents = parents[perm]
        parents = np.where(old_parents == -1, -1, inv[np.maximum(old_parents, 0)])
        measures = measures[perm]
    return Tree(parents, measures), perm


def tree_from_dict(doc: dict) -> Tree:
    return _tree_from_nodes(doc["nodes"])[0]


def tree_function_from_dict(doc: dict) -> TreeFunction:
    nodes = doc["nodes"]
    tree, perm = _tree_from_nodes(nodes)
    values = np.empty(tree.n_leaves)
    for i, leaf in enumerate(tree.leaves):
        nd = nodes[int(perm[leaf])]
        if "value" not in nd:
            raise ValueError(f"leaf node {int(perm[leaf])} has no value")
        values[i] = float(nd["value"])
    return TreeFunction(tree, values)
