"""Near-extremal functions: explicit lower-bound witnesses for the
Bellman values.

The unrestricted value F * omega_p(f^p/F)^p is approached by power-law
profiles.  With a = 1/omega_p(f^p/F) (so that (p(a-1)+1) a^{-p} = f^p/F,
and a >= (p-1)/p keeps t^{(a-1)p} integrable), the profile
phi~(t) = a f t^{a-1} has mean f, p-th moment F, and its running average
f t^{a-1} has p-th moment exactly F omega_p(f^p/F)^p.  A chain tree with
block fraction 1-r realizes the running average as actual ancestor
averages: block m (measure r^m(1-r)) carries the average of phi~ over
(r^{m+1}, r^m], which in cancellation-free form is

    v_m = f * r^{m(a-1)} * (1 - r^a) / (1 - r),

and the power-law head below r^D is replaced by the constant f r^{D(a-1)}
that keeps the mean exact (the p-moment then falls short of F by a
deficit that vanishes as D grows and r -> 1; it is reported, never
compensated).  The maximal function on block m is the chain-node average
f r^{m(a-1)}, so the p-moment of M phi approaches the Bellman value like
beta (1-r)/(1-r^beta) + beta r^{D beta} with beta = p(a-1)+1.

build_composite assembles the restricted witness: a dyadic-cover set K of
measure ~ k (greedy binary expansion, the same selection split_measure
makes on a materialized binary tree), a rescaled chain extremizer with
mean B/k and p-moment A/k on each K block, and the constant
(f-B)/(1-k) off K.  certify_sharpness escalates (r, depth) until the
exact restricted moment of the construction reaches (1-eps) times the
optimizer's value, with the restricted moment bound re-checked on the
witness (a two-sided certificate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bellman import BellmanQuery, bellman_three_var, bellman_two_var
from .rearrange import check_subset_moment_bound
from .report import VerificationReport
from .special import Exponent, as_exponent, omega_p
from .trees import Tree, TreeFunction, chain_tree, maximal_operator

__all__ = [
    "ExtremalSpec",
    "CompositeBuild",
    "TargetUnreachedError",
    "power_law_exponent",
    "build_chain_extremizer",
    "build_composite",
    "certify_sharpness",
]


class TargetUnreachedError(RuntimeError):
    """Requested fraction of the Bellman value not reached at (r, depth)."""


def power_law_exponent(p, f: float, F: float) -> float:
    """Exponent a = 1/omega_p(f^p/F) of the extremal profile a f t^{a-1}.

    a lies in [(p-1)/p, 1]; the p-th moment of the profile is
    (a f)^p / (p(a-1)+1) = F by construction.
    """
    ex = as_exponent(p)
    if not (f > 0.0 and F > 0.0):
        raise ValueError("need f > 0 and F > 0")
    x = f**ex.p / F
    if x > 1.0 + 1e-12:
        raise ValueError(f"inadmissible moments: f^p/F = {x!r} > 1")
    return 1.0 / omega_p(min(x, 1.0), ex)


@dataclass(frozen=True)
class ExtremalSpec:
    """Chain-extremizer parameters: moments (p, f, F), block ratio, depth.

    Validated on construction: admissible moments, ratio in (0, 1),
    depth >= 1, and integrability p(a-1)+1 > 0 of the induced power law.
    """

    p: Exponent
    f: float
    F: float
    ratio: float
    depth: int
    a: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self) -> None:
        ex = as_exponent(self.p)
        object.__setattr__(self, "p", ex)
        if not (math.isfinite(self.f) and self.f > 0.0):
            raise ValueError("mean f must be positive")
        if not (math.isfinite(self.F) and self.F > 0.0):
            raise ValueError("moment F must be positive")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("chain ratio must lie in (0, 1)")
        if int(self.depth) < 1:
            raise ValueError("depth must be >= 1")
        object.__setattr__(self, "depth", int(self.depth))
        a = power_law_exponent(ex, self.f, self.F)
        beta = ex.p * (a - 1.0) + 1.0
        if beta <= 0.0:
            raise ValueError("power law not p-integrable: p(a-1)+1 <= 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "beta", beta)


def _chain_values(mean: float, a: float, r: float, depth: int) -> np.ndarray:
    """Leaf values of the chain extremizer: blocks 0..depth-1, then head."""
    m = np.arange(depth)
    vals = np.empty(depth + 1)
    vals[:depth] = mean * r ** (m * (a - 1.0)) * ((1.0 - r**a) / (1.0 - r))
    vals[depth] = mean * r ** (depth * (a - 1.0))
    return vals


def build_chain_extremizer(spec: ExtremalSpec) -> TreeFunction:
    """Chain-tree witness with mean exactly f and p-moment <= F.

    Block values are the averages of the power-law profile over the block
    intervals, the head the average over what remains, so the mean
    telescopes to f exactly; Jensen makes the p-moment fall short of F by
    the discretization deficit.  Super-level sets are the chain nodes.
    """
    tree = chain_tree(spec.ratio, spec.depth)
    return TreeFunction(tree, _chain_values(spec.f, spec.a, spec.ratio, spec.depth))


def _dyadic_budget_tree(k: float, max_bin_depth: int):
    """Binary skeleton whose 'full' nodes form the greedy dyadic cover of k.

    Exact integer arithmetic on budgets (denominator 2^max_bin_depth);
    returns flat arrays plus the list of block nodes (id, measure, level).
    Matches split_measure's left-to-right greedy on a binary tree.
    """
    denom = 1 << max_bin_depth
    budget0 = int(k * denom)  # floor: undershoot like the greedy splitter
    if budget0 <= 0:
        raise ValueError(f"set measure {k!r} too small for depth {max_bin_depth}")
    parents = [-1]
    measures = [1.0]
    levels = [0]
    blocks: list[tuple[int, float, int]] = []
    off_leaves: list[int] = []
    if budget0 >= denom:
        blocks.append((0, 1.0, 0))
        return parents, measures, levels, blocks, off_leaves, 1.0
    stack = [(0, denom, budget0, 0)]  # node id, integer measure, integer budget, level
    while stack:
        node, m_int, c_int, lev = stack.pop()
        half = m_int >> 1
        left_budget = min(c_int, half)
        right_budget = c_int - left_budget
        for child_budget in (left_budget, right_budget):
            cid = len(parents)
            parents.append(node)
            measures.append(half / denom)
            levels.append(lev + 1)
            if child_budget == half:
                blocks.append((cid, half / denom, lev + 1))
            elif child_budget == 0:
                off_leaves.append(cid)
            else:
                if half == 1:
                    off_leaves.append(cid)  # budget below resolution: drop it
                else:
                    stack.append((cid, half, child_budget, lev + 1))
    achieved = sum(m for _, m, _ in blocks)
    return parents, measures, levels, blocks, off_leaves, achieved


@dataclass
class CompositeBuild:
    """Constructed restricted witness and its exactly-computed statistics."""

    phi: TreeFunction
    K: np.ndarray               # positions into tree.leaves
    k_achieved: float
    restricted_moment: float    # integral over K of (M phi)^p, exact
    target: float               # A * omega_p(B^p/(k^{p-1} A))^p at achieved k
    mean_achieved: float
    moment_achieved: float
    B: float
    psi: float
    block_levels: list[int]
    ratio: float
    depth: int


def build_composite(
    query: BellmanQuery,
    B: float,
    ratio: float,
    depth: int,
    delta: float | None = None,
    max_bin_depth: int = 60,
) -> CompositeBuild:
    """Restricted witness: chain extremizers on a dyadic cover K, constant
    (f-B)/(1-k) outside.

    The achieved cover measure replaces the nominal k everywhere downstream
    (off-set constant, A, the chain moments), so the witness has mean
    exactly f and p-moment <= F regardless of how k was approximated.
    Raises TargetUnreachedError if delta is given and the exact restricted
    moment of the witness stays below delta times its target value.
    """
    ex, f, F = query.p, query.f, query.F
    k = query.require_k()
    if not 0.0 <= B <= f * (1.0 + 1e-12):
        raise ValueError(f"mass B = {B!r} outside [0, f]")
    B = min(max(B, 0.0), f)

    if k >= 1.0:
        if abs(B - f) > 1e-12 * f:
            raise ValueError("k = 1 forces B = f")
        parents, measures, levels = [-1], [1.0], [0]
        blocks = [(0, 1.0, 0)]
        off_leaves: list[int] = []
        k_ach = 1.0
    else:
        parents, measures, levels, blocks, off_leaves, k_ach = _dyadic_budget_tree(
            k, max_bin_depth
        )
    if not blocks:
        raise ValueError(f"set measure {k!r} unresolvable at binary depth {max_bin_depth}")

    if k_ach >= 1.0:
        A = F
        psi = 0.0
    else:
        A = F - (f - B) ** ex.p / (1.0 - k_ach) ** (ex.p - 1.0)
        psi = (f - B) / (1.0 - k_ach)
    if A <= 0.0:
        raise ValueError(f"infeasible mass B = {B!r}: no moment budget left on the set")
    x = B**ex.p / (k_ach ** (ex.p - 1.0) * A)
    if x > 1.0 + 1e-9:
        raise ValueError(f"infeasible mass B = {B!r}: split moment floor exceeds F")
    x = min(x, 1.0)
    a = 1.0 / omega_p(x, ex)
    mean_loc = B / k_ach
    target = A * omega_p(x, ex) ** ex.p

    # graft a chain subtree (block leaves then head) onto every cover block
    vals_pattern = _chain_values(mean_loc, a, ratio, depth)
    rpow = np.power(ratio, np.arange(depth + 1))
    leaf_m_pattern = np.empty(depth + 1)
    leaf_m_pattern[:depth] = rpow[:depth] * (1.0 - ratio)
    leaf_m_pattern[depth] = rpow[depth]

    parents = np.array(parents, dtype=np.int64)
    measures = np.array(measures, dtype=float)
    levels = np.array(levels, dtype=np.int64)
    chunks_p, chunks_m, chunks_l = [parents], [measures], [levels]
    chain_leaf_ids: list[np.ndarray] = []
    next_id = parents.size
    for node, mu, lev in blocks:
        ids = next_id + np.arange(2 * depth, dtype=np.int64)
        par = np.empty(2 * depth, dtype=np.int64)
        par[0:2] = node
        if depth > 1:
            par[2:] = np.repeat(ids[1:-1:2], 2)
        mm = np.empty(2 * depth)
        mm[0::2] = mu * leaf_m_pattern[:depth]      # block leaves L_m
        mm[1::2] = mu * rpow[1:]                    # running nodes I_{m+1}
        ll = np.empty(2 * depth, dtype=np.int64)
        ll[0::2] = lev + 1 + np.arange(depth)
        ll[1::2] = lev + 1 + np.arange(depth)
        chunks_p.append(par)
        chunks_m.append(mm)
        chunks_l.append(ll)
        chain_leaf_ids.append(np.concatenate((ids[0::2], ids[-1:])))
        next_id += 2 * depth

    tree = Tree(
        np.concatenate(chunks_p), np.concatenate(chunks_m), levels=np.concatenate(chunks_l)
    )
    values = np.full(tree.n_leaves, psi)
    leaf_pos = {int(leaf): i for i, leaf in enumerate(tree.leaves)}
    K_pos: list[int] = []
    for ids in chain_leaf_ids:
        pos = np.array([leaf_pos[int(i)] for i in ids], dtype=np.int64)
        values[pos] = vals_pattern
        K_pos.extend(pos.tolist())
    K = np.array(sorted(K_pos), dtype=np.int64)
    phi = TreeFunction(tree, values)

    m = maximal_operator(phi)
    mu_K = tree.leaf_measures[K]
    restricted = float(m.values[K] ** ex.p @ mu_K)
    build = CompositeBuild(
        phi=phi,
        K=K,
        k_achieved=float(k_ach),
        restricted_moment=restricted,
        target=float(target),
        mean_achieved=phi.integral(),
        moment_achieved=phi.moment(ex),
        B=B,
        psi=float(psi),
        block_levels=[lev for _, _, lev in blocks],
        ratio=float(ratio),
        depth=int(depth),
    )
    if delta is not None and restricted < delta * target:
        raise TargetUnreachedError(
            f"restricted moment {restricted!r} below {delta!r} * target {target!r} "
            f"at (ratio={ratio!r}, depth={depth!r})"
        )
    return build


_DEFAULT_SCHEDULE = ((0.90, 300), (0.95, 800), (0.95, 2000), (0.97, 2000), (0.99, 2000))


def certify_sharpness(
    query: BellmanQuery,
    eps: float = 0.05,
    r_max: float = 0.99,
    depth_max: int = 2000,
    schedule=None,
    seed: int | None = None,
) -> VerificationReport:
    """Sandwich certificate for the restricted Bellman value.

    Upper route: the optimizer value V at its argmax B.  Lower route: the
    exact restricted p-moment of a constructed witness, escalating
    (ratio, depth) until it reaches (1 - eps) V.  The certificate passes
    only if, additionally, the restricted moment bound holds on the witness
    itself (for K and for the whole space) and the witness moments drift
    from (f, F) by at most 1%.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    ex = query.p
    k = query.require_k()
    V, B_star = bellman_three_var(query)
    two_var = bellman_two_var(query)
    if schedule is None:
        schedule = [s for s in _DEFAULT_SCHEDULE if s[0] <= r_max and s[1] <= depth_max]
        if not schedule or schedule[-1] != (r_max, depth_max):
            schedule.append((r_max, depth_max))
    track: list[dict] = []
    best: CompositeBuild | None = None
    best_checks: tuple[VerificationReport, VerificationReport] | None = None
    passed = False
    for r, D in schedule:
        build = build_composite(query, B_star, r, D)
        on_K = check_subset_moment_bound(build.phi, build.K, ex, seed=seed)
        overall = check_subset_moment_bound(
            build.phi, np.arange(build.phi.tree.n_leaves), ex, seed=seed
        )
        drift_f = abs(build.mean_achieved - query.f) / query.f
        drift_F = abs(build.moment_achieved - query.F) / query.F
        entry = {
            "ratio": r,
            "depth": D,
            "achieved": build.restricted_moment,
            "fraction_of_value": build.restricted_moment / V if V > 0 else 1.0,
            "drift_mean": drift_f,
            "drift_moment": drift_F,
            "bound_margin_on_K": on_K.margin,
            "bound_margin_overall": overall.margin,
        }
        track.append(entry)
        if best is None or build.restricted_moment > best.restricted_moment:
            best = build
            best_checks = (on_K, overall)
        ok = (
            build.restricted_moment >= (1.0 - eps) * V
            and on_K.passed
            and overall.passed
            and drift_f <= 0.01
            and drift_F <= 0.01
        )
        if ok:
            passed = True
            break
    assert best is not None and best_checks is not None
    return VerificationReport(
        check="sharpness",
        parameters={
            "p": ex.p, "f": query.f, "F": query.F, "k": k,
            "eps": eps, "r_max": r_max, "depth_max": depth_max,
        },
        lhs=best.restricted_moment,
        rhs=V,
        margin=best.restricted_moment - (1.0 - eps) * V,
        tolerance=0.0,
        passed=passed,
        seed=seed,
        details={
            "argmax_B": B_star,
            "k_achieved": best.k_achieved,
            "escalation": track,
            "value_two_var": two_var,
            "upper_route_consistent": bool(V <= two_var + 1e-9),
            "witness_bound_margin_on_K": best_checks[0].margin,
            "witness_bound_margin_overall": best_checks[1].margin,
            "n_blocks": len(best.block_levels),
        },
    )
