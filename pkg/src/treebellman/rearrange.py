"""Nonincreasing rearrangements, running averages, and the inequality
checks that tie them to the tree maximal operator.

A leaf function phi on a probability tree has a nonincreasing
rearrangement phi* on (0, 1]: sort (value, measure) pairs by value
descending, merge ties, and lay the measures out as consecutive
intervals.  phi* is a StepFunction1D.  Its running (Hardy) average

    (A phi*)(t) = (1/t) * integral of phi* over (0, t]

is piecewise of the form b + a/t (a HardyAverage), continuous and
nonincreasing, and dominates the rearranged maximal function pointwise:

    (M phi)*(t) <= (A phi*)(t)   on (0, 1], with equality at t = 1.

Integrating p-th powers of these objects is the quantitative core:
integral_p is exact for step functions, closed-form (binomial expansion
with a log term) for integer p on Hardy pieces, and vectorized
global-adaptive Gauss-Kronrod (G7/K15, relative tolerance 1e-10, piece
boundaries as mandatory split points) otherwise.

The check_* functions certify, on a concrete tree function:
  * check_hardy_domination: the pointwise bound above, on the union of
    both breakpoint sets plus midpoints (conclusive, since the left side
    is piecewise constant and the right side nonincreasing);
  * check_moment_domination: p-moment of M phi <= p-moment of A phi*;
  * check_subset_moment_bound: for any leaf union K of measure k,
    integral over K of (M phi)^p <= A(k) * omega_p(B(k)^p / (k^{p-1} A(k)))^p
    with A(k), B(k) the p-moment and mass of phi* on (0, k];
  * check_holder_feasibility: the three Hoelder constraints that make the
    pair (A(k), B(k)) admissible for the restricted Bellman problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .report import VerificationReport
from .special import as_exponent, omega_p
from .trees import TreeFunction, maximal_operator

__all__ = [
    "StepFunction1D",
    "HardyAverage",
    "QuadratureError",
    "rearrange",
    "rearrange_values",
    "hardy_average",
    "integral_p",
    "hardy_weighted_integral",
    "check_hardy_domination",
    "check_moment_domination",
    "check_subset_moment_bound",
    "check_holder_feasibility",
]

_SNAP_TOL = 1e-9
_EPSREL = 1e-10


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class StepFunction1D:
    """Right-closed step function on (0, 1].

    values[i] is taken on (breakpoints[i], breakpoints[i+1]]; breakpoints
    run from exactly 0 to exactly 1.  Evaluation is left-continuous
    (a point t belongs to the piece that ends at t).
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        bp = np.ascontiguousarray(self.breakpoints, dtype=float)
        v = np.ascontiguousarray(self.values, dtype=float)
        if bp.ndim != 1 or v.ndim != 1 or bp.size != v.size + 1 or v.size == 0:
            raise ValueError("need m+1 breakpoints for m >= 1 values")
        if bp[0] != 0.0 or bp[-1] != 1.0 or np.any(np.diff(bp) <= 0.0):
            raise ValueError("breakpoints must rise strictly from 0 to 1")
        if not np.all(np.isfinite(v)) or v.min() < 0.0:
            raise ValueError("values must be nonnegative and finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", v)
        # cumulative integral at each breakpoint, reused everywhere
        object.__setattr__(
            self, "_cum", np.concatenate(([0.0], np.cumsum(v * np.diff(bp))))
        )

    def _piece_index(self, t):
        arr = np.asarray(t, dtype=float)
        if arr.size and (arr.min() <= 0.0 or arr.max() > 1.0):
            raise ValueError("evaluation points must lie in (0, 1]")
        return np.searchsorted(self.breakpoints, arr, side="left") - 1

    def __call__(self, t):
        idx = self._piece_index(t)
        out = self.values[idx]
        return float(out) if np.asarray(t).ndim == 0 else out

    def integral(self, k: float = 1.0) -> float:
        """Exact integral over (0, k]."""
        if k == 0.0:
            return 0.0
        i = int(self._piece_index(k))
        return float(self._cum[i] + self.values[i] * (k - self.breakpoints[i]))

    def p_integral(self, k: float, p) -> float:
        """Exact integral of the p-th power over (0, k]."""
        pp = p.p if hasattr(p, "p") else float(p)
        if k == 0.0:
            return 0.0
        i = int(self._piece_index(k))
        vp = self.values[: i + 1] ** pp
        widths = np.diff(self.breakpoints[: i + 2])
        widths[-1] = k - self.breakpoints[i]
        return float(vp @ widths)

    @property
    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0.0))


@dataclass(frozen=True)
class HardyAverage:
    """Running average of a step function: piecewise b + a/t on (0, 1].

    Piece i lives on (breakpoints[i], breakpoints[i+1]] with
    value(t) = const[i] + coef[i]/t; the first piece has coef exactly 0,
    so there is no singularity at 0.  Continuous; nonincreasing whenever
    the source step function is.
    """

    breakpoints: np.ndarray
    const: np.ndarray
    coef: np.ndarray

    def _piece_index(self, t):
        arr = np.asarray(t, dtype=float)
        if arr.size and (arr.min() <= 0.0 or arr.max() > 1.0):
            raise ValueError("evaluation points must lie in (0, 1]")
        return np.searchsorted(self.breakpoints, arr, side="left") - 1

    def __call__(self, t):
        idx = self._piece_index(t)
        arr = np.asarray(t, dtype=float)
        out = self.const[idx] + self.coef[idx] / arr
        return float(out) if arr.ndim == 0 else out


def rearrange_values(values, measures) -> StepFunction1D:
    """Nonincreasing rearrangement of a (value, measure) atom list.

    Measures must fill the unit interval (sum 1 up to 1e-9; the final
    breakpoint is snapped to exactly 1, never renormalized).
    """
    v = np.asarray(values, dtype=float)
    m = np.asarray(measures, dtype=float)
    if v.shape != m.shape or v.ndim != 1 or v.size == 0:
        raise ValueError("values and measures must be equal-length 1-d arrays")
    if m.min() <= 0.0:
        raise ValueError("measures must be positive")
    order = np.argsort(-v, kind="stable")
    vs, ms = v[order], m[order]
    # merge ties so breakpoints are strictly increasing
    starts = np.concatenate(([0], np.flatnonzero(vs[1:] != vs[:-1]) + 1))
    merged_v = vs[starts]
    merged_m = np.add.reduceat(ms, starts)
    bp = np.concatenate(([0.0], np.cumsum(merged_m)))
    if abs(bp[-1] - 1.0) > _SNAP_TOL:
        raise ValueError(f"measures must sum to 1, got {bp[-1]!r}")
    bp[-1] = 1.0
    # an atom far below the running ulp can leave a zero-width piece; it
    # carries no float mass, so drop it rather than fail strict monotonicity
    keep = np.diff(bp) > 0.0
    if not keep.all():
        merged_v = merged_v[keep]
        bp = np.concatenate(([0.0], bp[1:][keep]))
    return StepFunction1D(bp, merged_v)


def rearrange(tf: TreeFunction) -> StepFunction1D:
    """Nonincreasing rearrangement of a tree leaf function."""
    return rearrange_values(tf.values, tf.tree.leaf_measures)


def hardy_average(g: StepFunction1D) -> HardyAverage:
    """Running average (1/t) * integral over (0, t] of a step function."""
    bp = g.breakpoints
    cum = g._cum
    const = g.values.copy()
    coef = cum[:-1] - g.values * bp[:-1]
    return HardyAverage(bp, const, coef)


# --- power integrals of Hardy pieces -----------------------------------

# G7/K15 Gauss-Kronrod pair on [-1, 1] (the classical QUADPACK constants)
_XGK = np.array([
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0,
])
_WGK = np.array([
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
])
_WG = np.array([
    0.1294849661688697, 0.2797053914892767,
    0.3818300505051189, 0.4179591836734694,
])

_NODES15 = np.concatenate((-_XGK[:-1], _XGK[::-1]))           # ascending, 15 nodes
_W15 = np.concatenate((_WGK[:-1], _WGK[::-1]))
_W7 = np.zeros(15)
_W7[1:14:2] = np.concatenate((_WG[:-1], _WG[::-1]))           # Gauss nodes sit at odd slots


def _power_integral_int(a, b, x, y, s: int, weights) -> float:
    """Sum of w_i * integral over [x_i, y_i] of (b_i + a_i/t)^s, s integer.

    Binomial expansion; the j = 1 term integrates to a log, j >= 2 to
    negative powers.  Pieces with a == 0 reduce to the constant term, which
    also covers the single piece that starts at 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    zero = a == 0.0
    total = float(np.sum(w[zero] * b[zero] ** s * (y[zero] - x[zero]))) if np.any(zero) else 0.0
    g = ~zero
    if np.any(g):
        ag, bg, xg, yg, wg = a[g], b[g], x[g], y[g], w[g]
        acc = np.zeros_like(ag)
        for j in range(s + 1):
            if j == 0:
                base = yg - xg
            elif j == 1:
                base = np.log(yg / xg)
            else:
                base = (yg ** (1 - j) - xg ** (1 - j)) / (1 - j)
            acc += math.comb(s, j) * bg ** (s - j) * ag**j * base
        total += float(wg @ acc)
    return total


def _gk_panels(a, b, lo, hi, s):
    """K15 and G7 estimates of integral of (b + a/t)^s on each [lo, hi]."""
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    t = c[:, None] + h[:, None] * _NODES15[None, :]
    vals = (b[:, None] + a[:, None] / t) ** s
    k15 = h * (vals @ _W15)
    g7 = h * (vals @ _W7)
    return k15, g7


def _power_integral_gk(a, b, x, y, s: float, weights, epsrel: float = _EPSREL) -> float:
    """Adaptive G7/K15 for non-integer exponents, vectorized over segments.

    Segments start at the (clipped) piece boundaries; pieces spanning a
    large dyadic range are pre-split geometrically so the 1/t singularity
    outside the domain never starves the panels; then all panels whose
    error exceeds their share of the budget are bisected together.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)

    zero = a == 0.0
    total_const = float(np.sum(w[zero] * b[zero] ** s * (y[zero] - x[zero]))) if np.any(zero) else 0.0
    g = ~zero
    if not np.any(g):
        return total_const

    seg_a, seg_b, seg_w = [], [], []
    seg_lo, seg_hi = [], []
    for ai, bi, xi, yi, wi in zip(a[g], b[g], x[g], y[g], w[g]):
        nsplit = max(1, int(math.ceil(math.log2(yi / xi) / 3.0)))  # ratio <= 8 per panel
        cuts = xi * (yi / xi) ** (np.arange(nsplit + 1) / nsplit)
        cuts[0], cuts[-1] = xi, yi
        seg_lo.extend(cuts[:-1])
        seg_hi.extend(cuts[1:])
        seg_a.extend([ai] * nsplit)
        seg_b.extend([bi] * nsplit)
        seg_w.extend([wi] * nsplit)
    seg_a = np.array(seg_a)
    seg_b = np.array(seg_b)
    seg_w = np.array(seg_w)
    seg_lo = np.array(seg_lo)
    seg_hi = np.array(seg_hi)

    for _ in range(40):
        k15, g7 = _gk_panels(seg_a, seg_b, seg_lo, seg_hi, s)
        err = np.abs(seg_w) * np.abs(k15 - g7)
        total = float(seg_w @ k15) + total_const
        budget = max(epsrel * abs(total), 1e-300)
        if err.sum() <= budget:
            return total
        # bisect every panel holding more than its length-share of the budget
        share = budget * (seg_hi - seg_lo) / (seg_hi - seg_lo).sum()
        bad = err > np.maximum(share, 1e-300)
        if not np.any(bad):
            bad = err > err.max() * 0.5
        mid = 0.5 * (seg_lo[bad] + seg_hi[bad])
        seg_lo = np.concatenate((seg_lo[~bad], seg_lo[bad], mid))
        seg_hi = np.concatenate((seg_hi[~bad], mid, seg_hi[bad]))
        seg_a = np.concatenate((seg_a[~bad], seg_a[bad], seg_a[bad]))
        seg_b = np.concatenate((seg_b[~bad], seg_b[bad], seg_b[bad]))
        seg_w = np.concatenate((seg_w[~bad], seg_w[bad], seg_w[bad]))
    raise QuadratureError(f"power integral did not reach epsrel={epsrel!r}")


def _hardy_power_integral(h: HardyAverage, k: float, s: float, weights=None) -> float:
    """Sum over pieces of w_i * integral over the piece (clipped to k) of
    (const_i + coef_i/t)^s."""
    if k == 0.0:
        return 0.0
    if not 0.0 < k <= 1.0:
        raise ValueError("upper limit must lie in (0, 1]")
    bp = h.breakpoints
    i = int(np.searchsorted(bp, k, side="left")) - 1
    x = bp[: i + 1].copy()
    y = bp[1 : i + 2].copy()
    y[-1] = k
    a = h.coef[: i + 1]
    b = h.const[: i + 1]
    w = np.ones(i + 1) if weights is None else np.asarray(weights, dtype=float)[: i + 1]
    if float(s).is_integer() and 0 <= s <= 60:
        return _power_integral_int(a, b, x, y, int(s), w)
    return _power_integral_gk(a, b, x, y, float(s), w)


def integral_p(g, k: float, p) -> float:
    """Integral over (0, k] of g^p for a step function or a Hardy average.

    Exact for StepFunction1D; closed form (integer p) or adaptive
    Gauss-Kronrod at relative tolerance 1e-10 (otherwise) for HardyAverage.
    """
    pp = p.p if hasattr(p, "p") else float(p)
    if isinstance(g, StepFunction1D):
        return g.p_integral(k, pp)
    if isinstance(g, HardyAverage):
        return _hardy_power_integral(g, k, pp)
    raise TypeError(f"integral_p needs a StepFunction1D or HardyAverage, got {type(g)!r}")


def hardy_weighted_integral(g: StepFunction1D, k: float, p) -> float:
    """Integral over (0, k] of g(t) * (A g)(t)^{p-1}.

    The cross term in the partial-integration identity
        integral (A g)^p = -B(k)^p / ((p-1) k^{p-1})
                           + p/(p-1) * integral g * (A g)^{p-1}.
    """
    pp = p.p if hasattr(p, "p") else float(p)
    return _hardy_power_integral(hardy_average(g), k, pp - 1.0, weights=g.values)


# --- inequality checks --------------------------------------------------


def _comparison_grid(*steps: np.ndarray) -> np.ndarray:
    pts = np.union1d(np.concatenate(steps), np.array([1.0]))
    pts = pts[pts > 0.0]
    full = np.concatenate(([0.0], pts))
    mids = 0.5 * (full[:-1] + full[1:])
    return np.union1d(pts, mids[mids > 0.0])


def check_hardy_domination(tf: TreeFunction, seed: int | None = None) -> VerificationReport:
    """Pointwise bound (M phi)* <= running average of phi* on (0, 1].

    Both sides are evaluated on the union of their breakpoints plus
    midpoints; the left side is piecewise constant and the right side
    nonincreasing, so this grid is conclusive.  Equality holds at t = 1.
    """
    m = maximal_operator(tf)
    mstar = rearrange(m)
    gstar = rearrange(tf)
    havg = hardy_average(gstar)
    grid = _comparison_grid(mstar.breakpoints, gstar.breakpoints)
    lhs = mstar(grid)
    rhs = havg(grid)
    gaps = rhs - lhs
    i = int(np.argmin(gaps))
    tol = 1e-12
    return VerificationReport(
        check="hardy_domination",
        parameters={"n_leaves": tf.tree.n_leaves, "depth": tf.tree.depth},
        lhs=float(lhs[i]),
        rhs=float(rhs[i]),
        margin=float(gaps[i]),
        tolerance=tol,
        passed=bool(gaps[i] >= -tol),
        seed=seed,
        details={
            "worst_t": float(grid[i]),
            "grid_points": int(grid.size),
            "gap_at_one": float(havg(1.0) - mstar(1.0)),
        },
    )


def check_moment_domination(tf: TreeFunction, p, seed: int | None = None) -> VerificationReport:
    """Global moment bound: integral of (M phi)^p <= integral of (A phi*)^p."""
    ex = as_exponent(p)
    m = maximal_operator(tf)
    lhs = m.moment(ex)
    rhs = integral_p(hardy_average(rearrange(tf)), 1.0, ex)
    tol = 1e-10 * max(1.0, abs(rhs))
    return VerificationReport(
        check="moment_domination",
        parameters={"p": ex.p, "n_leaves": tf.tree.n_leaves, "depth": tf.tree.depth},
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        tolerance=tol,
        passed=bool(lhs <= rhs + tol),
        seed=seed,
    )


def _leaf_selection(tf: TreeFunction, leaves) -> np.ndarray:
    sel = np.asarray(leaves)
    if sel.dtype == bool:
        if sel.shape != (tf.tree.n_leaves,):
            raise ValueError("boolean leaf mask has wrong length")
        sel = np.flatnonzero(sel)
    else:
        sel = sel.astype(np.int64)
        if sel.size and (sel.min() < 0 or sel.max() >= tf.tree.n_leaves):
            raise ValueError("leaf indices out of range")
    if sel.size == 0:
        raise ValueError("leaf union K must be nonempty")
    return sel


def check_subset_moment_bound(
    tf: TreeFunction, leaves, p, seed: int | None = None
) -> VerificationReport:
    """Restricted moment bound over a leaf union K of measure k:

        integral over K of (M phi)^p
            <= A(k) * omega_p(B(k)^p / (k^{p-1} A(k)))^p,

    A(k), B(k) being the p-moment and mass of phi* on (0, k].  `leaves`
    selects K by positions into tree.leaves (ints or a boolean mask).
    """
    ex = as_exponent(p)
    sel = _leaf_selection(tf, leaves)
    mu = tf.tree.leaf_measures[sel]
    k = min(float(mu.sum()), 1.0)  # a full union can round a hair past 1
    m = maximal_operator(tf)
    lhs = float(m.values[sel] ** ex.p @ mu)
    gstar = rearrange(tf)
    A = gstar.p_integral(k, ex)
    B = gstar.integral(k)
    if A > 0.0:
        ratio = min(max(B**ex.p / (k ** (ex.p - 1.0) * A), 0.0), 1.0)
        rhs = A * omega_p(ratio, ex) ** ex.p
    else:
        ratio, rhs = 0.0, 0.0  # phi* vanishes on (0,k] only if phi == 0 a.e.
    tol = 1e-10 * max(1.0, abs(rhs))
    return VerificationReport(
        check="subset_moment_bound",
        parameters={"p": ex.p, "k": k, "n_leaves_K": int(sel.size)},
        lhs=lhs,
        rhs=float(rhs),
        margin=float(rhs - lhs),
        tolerance=tol,
        passed=bool(lhs <= rhs + tol),
        seed=seed,
        details={"A": float(A), "B": float(B), "ratio": float(ratio)},
    )


def check_holder_feasibility(
    tf: TreeFunction, k: float, p, seed: int | None = None
) -> VerificationReport:
    """Hoelder constraints tying (A(k), B(k)) to the pair (f, F) of phi:

        (i)   B(k)^p <= k^{p-1} A(k)
        (ii)  A(k) <= F  and  B(k) <= f
        (iii) (f - B(k))^p <= (1-k)^{p-1} (F - A(k))

    All margins are reported; the overall margin is the worst one.
    """
    ex = as_exponent(p)
    if not 0.0 < k <= 1.0:
        raise ValueError("k must lie in (0, 1]")
    gstar = rearrange(tf)
    f = gstar.integral(1.0)
    F = gstar.p_integral(1.0, ex)
    A = gstar.p_integral(k, ex)
    B = gstar.integral(k)
    m1 = k ** (ex.p - 1.0) * A - B**ex.p
    m2a = F - A
    m2b = f - B
    m3 = (1.0 - k) ** (ex.p - 1.0) * max(F - A, 0.0) - max(f - B, 0.0) ** ex.p
    margins = {"holder_on_K": m1, "moment_nesting": m2a, "mass_nesting": m2b, "holder_off_K": m3}
    worst = min(margins, key=margins.get)
    tol = 1e-10 * max(1.0, F, f**ex.p)
    return VerificationReport(
        check="holder_feasibility",
        parameters={"p": ex.p, "k": float(k)},
        lhs=0.0,
        rhs=float(margins[worst]),
        margin=float(margins[worst]),
        tolerance=tol,
        passed=bool(margins[worst] >= -tol),
        seed=seed,
        details={**{n: float(v) for n, v in margins.items()}, "worst": worst,
                 "f": float(f), "F": float(F), "A": float(A), "B": float(B)},
    )
