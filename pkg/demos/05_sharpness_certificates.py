"""
Certifying sharpness from below
===============================

The optimizer gives the candidate value V = B_p(f, F, k).  To certify it
is not an overestimate, the library constructs explicit tree functions
whose restricted maximal-operator moment climbs as close to V as asked.
This script builds the witnesses by hand first — chain extremizers, then
composites over a dyadic cover — and ends with the automated certificate.
"""

import numpy as np

from treebellman import (
    BellmanQuery,
    ExtremalSpec,
    bellman_three_var,
    bellman_two_var,
    build_chain_extremizer,
    build_composite,
    certify_sharpness,
    maximal_operator,
)

# the unrestricted problem first: a single chain of measure blocks with
# geometrically decaying power-law averages has p-moment of M phi
# approaching B_p(f, F) as the blocks refine and the chain deepens
p, f, F = 2.0, 1.0, 2.0
target = bellman_two_var(BellmanQuery(p, f, F))
print(f"B_{p:g}({f:g}, {F:g}) = {target:.10f}")
print("\n  ratio   depth   moment of M phi   fraction")
for r, D in [(0.5, 40), (0.9, 300), (0.95, 800), (0.99, 2000)]:
    phi = build_chain_extremizer(ExtremalSpec(p, f, F, r, D))
    got = maximal_operator(phi).moment(p)
    print(f"  {r:5.2f}   {D:5d}   {got:15.10f}   {got / target:8.5f}")
# the mean is exact by construction; only the p-moment carries a
# discretization deficit, and it dies out with the deficit above
phi = build_chain_extremizer(ExtremalSpec(p, f, F, 0.99, 2000))
print(f"witness mean   = {phi.integral():.12f}  (exact)")
print(f"witness moment = {phi.moment(p):.12f}  (<= F = {F:g})")

# restricted problem: the optimizer finds the best mass B to place on a
# set of measure k, and the witness grafts one chain onto every block of
# a greedy dyadic cover of k, constant outside
q = BellmanQuery(2.0, 1.0, 2.0, k=0.5)
V, B_star = bellman_three_var(q)
print(f"\nB_2(1, 2, 0.5) = {V:.10f}  at mass B = {B_star:.10f}")
print(f"(exact algebra: 3*sqrt(3) = {3.0 * np.sqrt(3.0):.10f} "
      f"at B = (3-sqrt(3))/2 = {(3.0 - np.sqrt(3.0)) / 2.0:.10f})")

build = build_composite(q, B_star, ratio=0.95, depth=2000)
n_blocks = len(build.block_levels)
print(f"\ncomposite witness: {build.phi.tree.n_leaves} leaves, "
      f"{n_blocks} cover block{'s' if n_blocks != 1 else ''} "
      f"at level{'s' if n_blocks != 1 else ''} {build.block_levels}")
print(f"  cover measure   = {build.k_achieved!r}")
print(f"  mean            = {build.mean_achieved:.12f}")
print(f"  p-moment        = {build.moment_achieved:.12f}  (<= {q.F:g})")
print(f"  restricted part = {build.restricted_moment:.10f}")
print(f"  fraction of V   = {build.restricted_moment / V:.5f}")

# the automated certificate escalates (ratio, depth) until the witness
# captures (1 - eps) of V, then re-checks the upper bound on the witness
# itself and the moment drift before signing off
report = certify_sharpness(q, eps=0.05)
print(f"\ncertify_sharpness(eps=0.05): passed = {report.passed}")
print("  escalation:")
for step in report.details["escalation"]:
    print(f"    ratio {step['ratio']:.2f}  depth {step['depth']:4d}  ->  "
          f"{step['fraction_of_value']:.4f} of V")
print(f"  bound margin on K       = {report.details['witness_bound_margin_on_K']:.3e}")
print(f"  bound margin everywhere = {report.details['witness_bound_margin_overall']:.3e}")

# a harder query needs more than one rung of the schedule
q2 = BellmanQuery(3.0, 1.0, 3.0, k=0.25)
report2 = certify_sharpness(q2, eps=0.05)
rungs = report2.details["escalation"]
print(f"\nB_3(1, 3, 0.25): {len(rungs)} escalation rung(s), "
      f"passed = {report2.passed}, best fraction "
      f"{max(s['fraction_of_value'] for s in rungs):.4f}")
