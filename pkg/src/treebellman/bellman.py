"""Bellman values of the tree maximal operator.

Both quantities here are suprema of the p-th moment of M(phi) over
nonnegative phi on a tree-structured probability space with prescribed
mean f and p-th moment F (admissible when 0 < f^p <= F):

* unrestricted over the whole space,

      bellman_two_var(p, f, F) = F * omega_p(f^p / F)^p,

  which tends to the Doob bound F (p/(p-1))^p as f^p/F -> 0;

* restricted to a measurable set of measure k, where the extra degree of
  freedom is the mass B that phi leaves on that set.  Splitting mass B
  onto measure k and f - B onto 1 - k costs at least

      split_moment_floor(B) = (f-B)^p/(1-k)^{p-1} + B^p/k^{p-1}

  (convex in B, floor f^p at B = k f), so B is feasible iff that floor
  stays <= F.  On the feasible interval the value restricted to the set is

      three_var_objective(B) = A * omega_p(B^p / (k^{p-1} A))^p,
      A = F - (f-B)^p/(1-k)^{p-1},

  and bellman_three_var maximizes it.  Unimodality of the objective is not
  assumed: a dense grid scan locates the best bracket and golden-section
  refines it, so the optimizer is robust to flat stretches and endpoint
  suprema.  Degenerate branches are exact: k = 1 reduces to the
  unrestricted value, F = f^p forces phi constant and the value k f^p,
  and B = 0 with A > 0 gives the pure Doob term A (p/(p-1))^p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .special import Exponent, as_exponent, omega_p

__all__ = [
    "BellmanQuery",
    "FeasibleInterval",
    "ThreeVarResult",
    "bellman_two_var",
    "split_moment_floor",
    "feasible_interval",
    "three_var_objective",
    "bellman_three_var",
]

_ADMISSIBLE_TOL = 1e-12


@dataclass(frozen=True)
class BellmanQuery:
    """Admissible parameter bundle (p, f, F) plus an optional set measure k.

    Requires f > 0, 0 < f^p <= F (within 1e-12 relative slack) and, when
    given, k in (0, 1].
    """

    p: Exponent
    f: float
    F: float
    k: float | None = None

    def __post_init__(self) -> None:
        ex = as_exponent(self.p)
        object.__setattr__(self, "p", ex)
        f = float(self.f)
        F = float(self.F)
        if not (math.isfinite(f) and f > 0.0):
            raise ValueError(f"mean must be positive and finite, got {self.f!r}")
        if not (math.isfinite(F) and F > 0.0):
            raise ValueError(f"p-moment must be positive and finite, got {self.F!r}")
        if f**ex.p > F * (1.0 + _ADMISSIBLE_TOL):
            raise ValueError(
                f"inadmissible query: f^p = {f ** ex.p!r} exceeds F = {F!r}"
            )
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "F", F)
        if self.k is not None:
            k = float(self.k)
            if not (math.isfinite(k) and 0.0 < k <= 1.0):
                raise ValueError(f"set measure k must lie in (0, 1], got {self.k!r}")
            object.__setattr__(self, "k", k)

    @property
    def ratio(self) -> float:
        """Moment ratio f^p / F, clipped into [0, 1] against roundoff."""
        return min(self.f**self.p.p / self.F, 1.0)

    def with_k(self, k: float) -> "BellmanQuery":
        return BellmanQuery(self.p, self.f, self.F, k)

    def require_k(self) -> float:
        if self.k is None:
            raise ValueError("this operation needs a set measure k on the query")
        return self.k


@dataclass(frozen=True)
class FeasibleInterval:
    """Closed interval of feasible masses B, always containing k*f."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, B: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= B <= self.hi + tol

    def clip(self, B: float) -> float:
        return min(max(B, self.lo), self.hi)


class ThreeVarResult(NamedTuple):
    value: float
    argmax: float


def bellman_two_var(query: BellmanQuery) -> float:
    """Unrestricted Bellman value F * omega_p(f^p/F)^p."""
    ex = query.p
    return query.F * omega_p(query.ratio, ex) ** ex.p


def split_moment_floor(B, query: BellmanQuery):
    """Minimal p-th moment that puts mass B on measure k and f - B elsewhere.

    (f-B)^p/(1-k)^{p-1} + B^p/k^{p-1}: strictly convex on [0, f] with
    minimum f^p at B = k f.  Needs k < 1 (at k = 1 the split is void and
    B = f is forced); vectorized in B.
    """
    k = query.require_k()
    if k >= 1.0:
        raise ValueError("split_moment_floor needs k < 1")
    ex, f = query.p, query.f
    arr = np.asarray(B, dtype=float)
    if arr.size and (arr.min() < -_ADMISSIBLE_TOL * f or arr.max() > f * (1.0 + _ADMISSIBLE_TOL)):
        raise ValueError("mass B outside [0, f]")
    bc = np.clip(arr, 0.0, f)
    out = (f - bc) ** ex.p / (1.0 - k) ** (ex.p - 1.0) + bc**ex.p / k ** (ex.p - 1.0)
    return float(out) if arr.ndim == 0 else out


def _bisect_floor(query: BellmanQuery, target: float, a: float, b: float, increasing: bool) -> float:
    # root of split_moment_floor(B) = target on [a, b], where the floor is
    # monotone; returns the endpoint of the final bracket on the feasible side
    for _ in range(100):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        high = split_moment_floor(mid, query) > target
        if increasing:
            if high:
                b = mid
            else:
                a = mid
        else:
            if high:
                a = mid
            else:
                b = mid
    return a if increasing else b


def feasible_interval(query: BellmanQuery) -> FeasibleInterval:
    """Interval {B in [0, f] : split_moment_floor(B) <= F}.

    Nonempty for admissible queries (it contains k f); endpoints are found
    by bisection to ~1e-12 and always satisfy the floor constraint.
    """
    k = query.require_k()
    if k >= 1.0:
        raise ValueError("feasible_interval needs k < 1")
    f, F = query.f, query.F
    Bstar = k * f
    lo = 0.0 if split_moment_floor(0.0, query) <= F else _bisect_floor(query, F, 0.0, Bstar, increasing=False)
    hi = f if split_moment_floor(f, query) <= F else _bisect_floor(query, F, Bstar, f, increasing=True)
    return FeasibleInterval(lo, hi)


def _objective_grid(B: np.ndarray, query: BellmanQuery) -> np.ndarray:
    """three_var_objective on an array of feasible B, roundoff-tolerant."""
    ex, f, F = query.p, query.f, query.F
    k = query.require_k()
    A = F - (f - B) ** ex.p / (1.0 - k) ** (ex.p - 1.0)
    out = np.zeros_like(B)
    pos = A > 0.0
    if np.any(pos):
        ratio = B[pos] ** ex.p / (k ** (ex.p - 1.0) * A[pos])
        ratio = np.clip(ratio, 0.0, 1.0)
        out[pos] = A[pos] * omega_p(ratio, ex) ** ex.p
    return out


def three_var_objective(B: float, query: BellmanQuery) -> float:
    """Restricted value of the mass split B: A * omega_p(B^p/(k^{p-1}A))^p.

    Defined on the feasible interval; B = 0 with A > 0 returns the Doob
    term A (p/(p-1))^p, and the boundary case A = 0 (possible only at
    B = 0 with the floor saturated) returns 0.  Infeasible B raises.
    """
    ex, f, F = query.p, query.f, query.F
    k = query.require_k()
    if k >= 1.0:
        raise ValueError("three_var_objective needs k < 1")
    B = float(B)
    if not -_ADMISSIBLE_TOL * f <= B <= f * (1.0 + _ADMISSIBLE_TOL):
        raise ValueError(f"mass B = {B!r} outside [0, f]")
    B = min(max(B, 0.0), f)
    A = F - (f - B) ** ex.p / (1.0 - k) ** (ex.p - 1.0)
    if A <= 0.0:
        if B <= _ADMISSIBLE_TOL * f and A >= -1e-12 * max(1.0, F):
            return 0.0
        raise ValueError(f"infeasible mass B = {B!r}: split moment floor exceeds F")
    ratio = B**ex.p / (k ** (ex.p - 1.0) * A)
    if ratio > 1.0 + 1e-9:
        raise ValueError(f"infeasible mass B = {B!r}: split moment floor exceeds F")
    return float(A * omega_p(min(ratio, 1.0), ex) ** ex.p)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def _golden_max(fun, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section maximization on [a, b] down to bracket width tol."""
    h = b - a
    if h <= tol:
        mid = 0.5 * (a + b)
        return mid, fun(mid)
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc, fd = fun(c), fun(d)
    n = max(1, math.ceil(math.log(tol / h) / math.log(_INVPHI)))
    for _ in range(n):
        if fc > fd:
            b, d, fd = d, c, fc
            h *= _INVPHI
            c = a + _INVPHI2 * h
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            h *= _INVPHI
            d = a + _INVPHI * h
            fd = fun(d)
    return (c, fc) if fc > fd else (d, fd)


def bellman_three_var(query: BellmanQuery, grid_points: int = 4096) -> ThreeVarResult:
    """Restricted Bellman value: maximize three_var_objective over feasible B.

    Returns (value, argmax B); the argmax is one maximizer, uniqueness is
    not claimed.  Exact degenerate branches: k = 1 gives the unrestricted
    value at B = f, and F = f^p forces (k f^p, k f).
    """
    ex, f, F = query.p, query.f, query.F
    k = query.require_k()
    if k >= 1.0:
        return ThreeVarResult(bellman_two_var(query), f)
    if F <= f**ex.p * (1.0 + _ADMISSIBLE_TOL):
        return ThreeVarResult(k * f**ex.p, k * f)
    iv = feasible_interval(query)
    if iv.width <= 1e-14 * max(1.0, f):
        mid = 0.5 * (iv.lo + iv.hi)
        return ThreeVarResult(three_var_objective(mid, query), mid)
    grid = np.linspace(iv.lo, iv.hi, int(grid_points))
    vals = _objective_grid(grid, query)
    i = int(np.argmax(vals))
    best_B, best_v = float(grid[i]), float(vals[i])
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, grid.size - 1)])

    def fun(B: float) -> float:
        return float(_objective_grid(np.array([B]), query)[0])

    gB, gv = _golden_max(fun, a, b, tol=max(1e-12 * iv.width, 1e-15))
    if gv > best_v:
        best_B, best_v = gB, gv
    return ThreeVarResult(best_v, best_B)
