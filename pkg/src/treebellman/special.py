"""Sharp-constant special functions for the tree maximal operator.

For an exponent p > 1 put q = p/(p-1).  On [1, q] the polynomial

    h_poly(z) = -(p-1) z^p + p z^{p-1} = z^{p-1} (p - (p-1) z)

decreases strictly from h_poly(1) = 1 to h_poly(q) = 0, so it has an
inverse omega_p : [0, 1] -> [1, q].  omega_p converts the moment ratio
f^p / F of a function (mean f, p-th moment F) into the sharp blow-up
factor of the maximal operator: omega_p(1) = 1 (constants are fixed
points) and omega_p(0) = q recovers the Doob constant in the diffuse
limit.  u_func(x) = omega_p(x)^p / x is the strictly decreasing envelope
used when a two-parameter bound is collapsed to the single ratio x.

All evaluators are pure and accept floats or numpy arrays (scalars in,
float out).  Inversion runs Newton steps safeguarded by a maintained
bisection bracket, so convergence does not depend on the starting point;
the start 1 + sqrt(2(1-x)/(p(p-1))) matches the square-root behaviour of
the inverse near x = 1, where h_poly' vanishes and plain Newton stalls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Exponent", "as_exponent", "h_poly", "omega_p", "u_func"]

_DOMAIN_TOL = 1e-12
_STEP_TOL = 1e-14
_MAX_ITER = 200


@dataclass(frozen=True)
class Exponent:
    """Integrability exponent p > 1 with the cached constant q = p/(p-1).

    q is both the right endpoint of omega_p's range and the sharp constant
    of the maximal operator in the diffuse limit.
    """

    p: float
    q: float = field(init=False)

    def __post_init__(self) -> None:
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise ValueError(f"exponent must satisfy p > 1, got {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", p / (p - 1.0))


def as_exponent(p) -> Exponent:
    """Coerce a float or an Exponent to an Exponent."""
    return p if isinstance(p, Exponent) else Exponent(float(p))


def _as_float_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, (arr.ndim == 0)


def h_poly(z, p):
    """Evaluate -(p-1) z^p + p z^{p-1} on [1, p/(p-1)].

    Parameters
    ----------
    z : float or ndarray
        Points in [1, q]; excursions up to 1e-12 outside are clamped,
        anything further is a domain error.
    p : float or Exponent

    Returns
    -------
    float or ndarray
        Values in [0, 1]; strictly decreasing in z.
    """
    ex = as_exponent(p)
    arr, scalar = _as_float_array(z)
    if arr.size and (arr.min() < 1.0 - _DOMAIN_TOL or arr.max() > ex.q + _DOMAIN_TOL):
        raise ValueError(f"h_poly argument outside [1, {ex.q!r}]")
    zc = np.clip(arr, 1.0, ex.q)
    out = zc ** (ex.p - 1.0) * (ex.p - (ex.p - 1.0) * zc)
    return float(out) if scalar else out


def _invert_h(x: np.ndarray, ex: Exponent) -> np.ndarray:
    """Solve h_poly(z) = x for each x strictly inside (0, 1)."""
    p, q = ex.p, ex.q
    c = p * (p - 1.0)  # = -h_poly'(z) / (z^{p-2} (z-1))
    result = np.empty_like(x)
    idx = np.arange(x.size)
    xa = x
    lo = np.ones_like(xa)
    hi = np.full_like(xa, q)
    za = np.clip(1.0 + np.sqrt(2.0 * (1.0 - xa) / c), 1.0, q)
    for _ in range(_MAX_ITER):
        w = za ** (p - 2.0)
        resid = w * za * (p - (p - 1.0) * za) - xa
        higher = resid > 0.0  # h decreasing: h(z) > x means z is left of the root
        lo = np.where(higher, za, lo)
        hi = np.where(higher, hi, za)
        deriv = c * w * (za - 1.0)  # = -h_poly'(za) >= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            znew = za + resid / deriv
        oob = ~np.isfinite(znew) | (znew <= lo) | (znew >= hi)
        znew = np.where(oob, 0.5 * (lo + hi), znew)
        done = np.abs(znew - za) <= _STEP_TOL
        if done.all():
            result[idx] = znew
            return result
        result[idx[done]] = znew[done]
        keep = ~done
        idx, xa, za = idx[keep], xa[keep], znew[keep]
        lo, hi = lo[keep], hi[keep]
    # bracket is at most a few ulps wide after 200 safeguarded steps
    result[idx] = za
    return result


def omega_p(x, p):
    """Inverse of h_poly: the unique z in [1, p/(p-1)] with h_poly(z) = x.

    Strictly decreasing on [0, 1]; the endpoints are returned exactly,
    omega_p(1) = 1 and omega_p(0) = p/(p-1).

    Parameters
    ----------
    x : float or ndarray
        Moment ratios in [0, 1] (1e-12 excursions clamped).
    p : float or Exponent

    Returns
    -------
    float or ndarray
    """
    ex = as_exponent(p)
    arr, scalar = _as_float_array(x)
    if arr.size and (arr.min() < -_DOMAIN_TOL or arr.max() > 1.0 + _DOMAIN_TOL):
        raise ValueError("omega_p argument outside [0, 1]")
    xc = np.clip(arr, 0.0, 1.0).ravel()
    z = np.empty_like(xc)
    z[xc == 1.0] = 1.0
    z[xc == 0.0] = ex.q
    inner = np.flatnonzero((xc > 0.0) & (xc < 1.0))
    if inner.size:
        z[inner] = _invert_h(xc[inner], ex)
    z = z.reshape(arr.shape)
    return float(z) if scalar else z


def u_func(x, p):
    """omega_p(x)^p / x on (0, 1]: strictly decreasing, u_func(1) = 1.

    Diverges like (p/(p-1))^p / x as x -> 0+, so 0 is a domain error.
    """
    ex = as_exponent(p)
    arr, scalar = _as_float_array(x)
    if arr.size and (arr.min() <= 0.0 or arr.max() > 1.0 + _DOMAIN_TOL):
        raise ValueError("u_func argument outside (0, 1]")
    xc = np.clip(arr, None, 1.0)
    out = np.asarray(omega_p(xc, ex), dtype=float) ** ex.p / xc
    return float(out) if scalar else out
