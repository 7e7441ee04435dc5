"""
The restricted Bellman value as a one-dimensional optimization
==============================================================

Restricting the p-th moment of M phi to a set K of measure k adds one
variable: the mass B that phi* places on (0, k].  For each B the best
achievable moment over K is A * omega_p(B^p / (k^{p-1} A))^p with
A = F - (f-B)^p / (1-k)^{p-1}, and B itself ranges over the interval
where the split-moment floor

    h_k(B) = (f-B)^p/(1-k)^{p-1} + B^p/k^{p-1}

stays below F.  The restricted value is the maximum over that interval.
"""

import numpy as np

from treebellman import (
    BellmanQuery,
    bellman_three_var,
    bellman_two_var,
    feasible_interval,
    split_moment_floor,
    three_var_objective,
)

query = BellmanQuery(p=2.0, f=1.0, F=1.25, k=0.5)

# the floor is a convex parabola-like curve with minimum f^p at B = k f;
# feasibility h_k(B) <= F cuts one interval out of [0, f]
iv = feasible_interval(query)
print(f"feasible interval at (p, f, F, k) = (2, 1, 1.25, 0.5): [{iv.lo:.6f}, {iv.hi:.6f}]")
for B in (0.0, 0.25, 0.5, 0.75, 1.0):
    tag = "feasible" if iv.contains(B, tol=1e-12) else "infeasible"
    print(f"  h_k({B:.2f}) = {split_moment_floor(B, query):.4f}   ({tag})")

# scan the objective across the interval; the optimizer does the same
# scan (coarser) and then sharpens the best bracket by golden section
B = np.linspace(iv.lo, iv.hi, 9)
print("\n  B        objective")
for b in B:
    print(f"  {b:.4f}   {three_var_objective(float(b), query):.6f}")

value, argmax = bellman_three_var(query)
print(f"\nB_2(1, 1.25, 0.5) = {value:.12f}  at  B = {argmax:.12f}")

# a compact sweep: rows are moment ratios f^p/F, columns are measures k.
# k = 1 recovers the unrestricted value; small k decouples into the
# Doob regime on a thin set
print("\nvalue(f=1) by ratio x = 1/F (rows) and k (cols):")
ks = (0.1, 0.25, 0.5, 0.75, 1.0)
print("  x \\ k " + "".join(f"{k:>9.2f}" for k in ks))
for x in (0.9, 0.5, 0.25, 0.1):
    F = 1.0 / x
    row = [bellman_three_var(BellmanQuery(2.0, 1.0, F, k))[0] for k in ks]
    print(f"  {x:4.2f}  " + "".join(f"{v:9.4f}" for v in row))
unres = bellman_two_var(BellmanQuery(2.0, 1.0, 10.0))
print(f"\ncheck: the k = 1.0 column at x = 0.1 equals B_2(1, 10) = {unres:.4f}")
