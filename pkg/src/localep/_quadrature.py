"""Gauss-Legendre panel quadrature with dyadic refinement.

Integrands are described per axis by :class:`Factor` objects carrying their
breakpoints and, when known, their polynomial degree between breakpoints.
Piecewise-polynomial products are integrated exactly on the breakpoint
panels; everything else goes through adaptive bisection of the panels.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

ORDER = 8
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(ORDER)
# GL with ORDER nodes integrates polynomials up to this degree exactly.
EXACT_DEGREE = 2 * ORDER - 1

_MAX_ROUNDS = 70
_FLOOR_SHARE = 2000


class QuadratureError(RuntimeError):
    """Raised when refinement stops before reaching the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class Factor:
    """One-dimensional factor of a separable integrand.

    ``func`` must be vectorized. ``degree`` is the polynomial degree on every
    panel between ``breaks`` (``None`` when the factor is not polynomial).
    The factor vanishes outside ``[lo, hi]``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    lo: float
    hi: float
    breaks: tuple = field(default=())
    degree: Optional[int] = 0


def _panel_edges(a, b, breaks):
    inner = [float(t) for t in breaks if a < t < b]
    return np.unique(np.array([a, b] + inner, dtype=float))


def _gl(func, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return half * (vals @ _WEIGHTS)


def integrate_1d(func, a, b, breaks=(), tol=1e-10, degree=None):
    """Integrate ``func`` over ``[a, b]``.

    Exact (up to round-off) when ``degree`` is given and at most
    :data:`EXACT_DEGREE`; otherwise adaptive with absolute tolerance ``tol``.
    """
    if not b > a:
        return 0.0
    edges = _panel_edges(a, b, breaks)
    lo, hi = edges[:-1], edges[1:]
    if degree is not None and degree <= EXACT_DEGREE:
        return float(_gl(func, lo, hi).sum())

    width = b - a
    coarse = _gl(func, lo, hi)
    total = 0.0
    accepted_err = 0.0
    for _ in range(_MAX_ROUNDS):
        mid = 0.5 * (lo + hi)
        left = _gl(func, lo, mid)
        right = _gl(func, mid, hi)
        fine = left + right
        err = np.abs(fine - coarse)
        ok = (err <= 0.5 * tol * (hi - lo) / width) | (err <= 0.5 * tol / _FLOOR_SHARE)
        total += fine[ok].sum()
        accepted_err += err[ok].sum()
        if ok.all():
            return float(total)
        keep = ~ok
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        if lo.size > 200000:
            break
    raise QuadratureError("adaptive quadrature did not converge",
                          accepted_err + float(np.abs(coarse).sum()))


def integrate_factors(factors_by_axis: Sequence[Sequence[Factor]], tol=1e-10):
    """Integral over R^d of a product of per-axis factor products."""
    d = len(factors_by_axis)
    result = 1.0
    for factors in factors_by_axis:
        lo = max(f.lo for f in factors)
        hi = min(f.hi for f in factors)
        if not hi > lo:
            return 0.0
        breaks = sorted({t for f in factors for t in f.breaks})
        degrees = [f.degree for f in factors]
        degree = None if any(g is None for g in degrees) else sum(degrees)

        def prod(x, factors=factors):
            out = np.ones_like(x)
            for f in factors:
                out = out * f.func(x)
            return out

        result *= integrate_1d(prod, lo, hi, breaks, tol / d, degree)
        if result == 0.0:
            return 0.0
    return result


def integrate_box(func, lo, hi, breaks_by_axis=None, section_breaks=None,
                  tol=1e-10, inner_degree=None):
    """Iterated adaptive integral of a non-separable ``func`` over a box.

    ``func`` maps an ``(m, d)`` array to ``m`` values. ``section_breaks``, when
    given, maps a fixed value of the leading coordinates (a 1-d array) to
    extra breakpoints along the next axis; ``inner_degree`` is the polynomial
    degree along the last axis between those breakpoints, if known.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    if np.any(hi <= lo):
        return 0.0
    if breaks_by_axis is None:
        breaks_by_axis = [()] * d
    return _iterated(func, lo, hi, list(breaks_by_axis), section_breaks, tol,
                     inner_degree, np.empty(0))


def _iterated(func, lo, hi, breaks, section_breaks, tol, inner_degree, prefix):
    k = prefix.size
    d = lo.size
    axis_breaks = list(breaks[k])
    if section_breaks is not None and k > 0:
        axis_breaks += list(section_breaks(prefix))
    if k == d - 1:
        def last(x):
            pts = np.empty((x.size, d))
            pts[:, :k] = prefix
            pts[:, k] = x
            return func(pts)
        return integrate_1d(last, lo[k], hi[k], axis_breaks, tol,
                            inner_degree if section_breaks is not None or d == 1 else None)

    inner_tol = 0.5 * tol / (hi[k] - lo[k])

    def outer(x):
        return np.array([
            _iterated(func, lo, hi, breaks, section_breaks, inner_tol,
                      inner_degree, np.append(prefix, xi))
            for xi in x
        ])

    return integrate_1d(outer, lo[k], hi[k], axis_breaks, 0.5 * tol, None)
