"""
Trees, leaf functions, and the exact maximal operator
=====================================================

A tree here is a nested family of sets that partitions a probability
space level by level — the abstract skeleton shared by dyadic cubes,
martingale filtrations, and general branching measure spaces.  Leaf
functions are simple functions subordinate to the finest level, and
M phi evaluates, at every leaf, the largest ancestor average.
"""

import numpy as np

from treebellman import (
    TreeFunction,
    build_tree,
    check_weak_type,
    maximal_operator,
    split_measure,
    tree_function_to_dict,
)

# the two-leaf hand example: phi = (2, 0) on equal halves.  The root
# average is 1, so the smaller leaf sees M = max(0, 1) = 1.
tree = build_tree([[0.5, 0.5]])
phi = TreeFunction(tree, np.array([2.0, 0.0]))
m = maximal_operator(phi)
print("phi  =", phi.values, "  M phi =", m.values)
print(f"mean = {phi.integral():.1f},  2nd moment = {phi.moment(2):.1f},"
      f"  moment of M = {m.moment(2):.2f}")

# an uneven three-level tree; fractions at each level are per-node
tree = build_tree([[0.3, 0.7], [0.5, 0.5], [0.25, 0.25, 0.5]])
rng = np.random.default_rng(0)
phi = TreeFunction(tree, rng.uniform(0.0, 10.0, tree.n_leaves))
m = maximal_operator(phi)
print(f"\n{tree.n_nodes} nodes, {tree.n_leaves} leaves, depth {tree.depth}")
print("leaf measures:", np.round(tree.leaf_measures, 4))
print("phi:  ", np.round(phi.values, 3))
print("M phi:", np.round(m.values, 3))

# weak-type (1,1): the super-level set {M > lam} never outweighs the
# integral of phi over itself divided by lam — with constant one
for lam in (2.0, 5.0, 8.0):
    rep = check_weak_type(phi, lam)
    print(f"lam = {lam}: mu(M > lam) = {rep.lhs:.4f} <= {rep.rhs:.4f}  "
          f"(margin {rep.margin:.2e})")

# split_measure greedily assembles a disjoint union of tree sets with
# prescribed measure — the measure-theoretic scissors used to cut the
# set K in the restricted problem.  On a binary tree it is exactly the
# binary expansion of the target.
from treebellman import binary_tree

bt = binary_tree(6)
for target in (0.5, 5.0 / 16.0, 0.3):
    got = split_measure(bt, 0, target)
    print(f"\ntarget {target}: achieved {got.achieved}  "
          f"from measures {sorted(float(bt.measures[n]) for n in got.nodes)}")

# trees and leaf functions round-trip through plain dicts (JSON-ready)
doc = tree_function_to_dict(phi)
print(f"\nserialized: {len(doc['nodes'])} nodes, root children "
      f"{doc['nodes'][0]['children']}")
