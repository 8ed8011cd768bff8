"""Local empirical process engines.

Covers the local process ``E_n(z, g)`` and its normed versions ``D_n`` and
``L_n`` over a net, the uniform increment process, the oscillation modulus
of the uniform empirical process, and the kernel density estimator with its
normalized sup statistic and plug-in bands.

Only sample points inside the window ``z - h^{1/d} supp(g)`` contribute to a
process value; windows are located by binary search in per-axis sorted
copies of the sample.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from localep.densities import Sample, smoothed_density
from localep.function_classes import FunctionNet, kernel_norm_sq

__all__ = [
    "ProcessEval",
    "SampleIndex",
    "BandwidthSchedule",
    "ScheduleReport",
    "centering_terms",
    "local_empirical",
    "LocalEmpiricalProcess",
    "increment_process",
    "oscillation_modulus",
    "kde",
    "kde_sup_stat",
    "kde_band",
    "LocalKDE",
    "validate_schedule",
]

MODES = ("raw-E", "D", "L")


def _log_inv(h):
    return np.log(1.0 / h)


def _check_bandwidth(h):
    if not 0 < h < 1:
        raise ValueError(f"bandwidth must lie in (0, 1), got {h}")


@dataclass
class ProcessEval:
    """Process values on a net at one location, with the norming used."""

    psi: np.ndarray
    n: int
    h: float
    z: np.ndarray
    mode: str = "raw-E"
    net_id: Optional[str] = None
    f_z: Optional[float] = None

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=float)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "L" and not (self.f_z is not None and self.f_z > 0):
            raise ValueError("mode L needs a positive density value f(z)")

    def to_mode(self, mode, f_z=None):
        """Re-norm the stored values. ``f_z`` is needed when moving to ``L``."""
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        f_z = self.f_z if f_z is None else f_z
        raw = self.psi
        if self.mode in ("D", "L"):
            raw = raw * np.sqrt(2.0 * _log_inv(self.h))
        if self.mode == "L":
            raw = raw * np.sqrt(self.f_z)
        out = raw
        if mode in ("D", "L"):
            out = out / np.sqrt(2.0 * _log_inv(self.h))
        if mode == "L":
            if not (f_z is not None and f_z > 0):
                raise ValueError("mode L needs a positive density value f(z)")
            out = out / np.sqrt(f_z)
        return ProcessEval(out, self.n, self.h, self.z, mode, self.net_id, f_z)


class SampleIndex:
    """Sorted copies of a sample along each axis for window queries."""

    def __init__(self, points):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        self.n, self.d = self.points.shape
        self.order = [np.argsort(self.points[:, j], kind="stable") for j in range(self.d)]
        self.sorted = [self.points[o, j] for j, o in enumerate(self.order)]

    def window(self, lo, hi):
        """Points of the sample inside the closed box ``[lo, hi]``."""
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (self.d,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (self.d,))
        spans = [(np.searchsorted(s, a, "left"), np.searchsorted(s, b, "right"))
                 for s, a, b in zip(self.sorted, lo, hi)]
        j = int(np.argmin([b - a for a, b in spans]))
        a, b = spans[j]
        pts = self.points[self.order[j][a:b]]
        if self.d > 1:
            keep = np.all((pts >= lo) & (pts <= hi), axis=1)
            pts = pts[keep]
        return pts

    def count_1d(self, a, b):
        """Number of points in ``(a, b]`` along the single axis (vectorized)."""
        s = self.sorted[0]
        return np.searchsorted(s, b, "right") - np.searchsorted(s, a, "right")


def _as_index(sample):
    if isinstance(sample, SampleIndex):
        return sample
    if isinstance(sample, Sample):
        return SampleIndex(sample.points)
    return SampleIndex(sample)


def centering_terms(density, net, z, h, tol=1e-8):
    """``E g_l(h^{-1/d}(z - Z))`` for every member, shape ``(q,)``."""
    return np.array([h * smoothed_density(density, g, h, z, tol) for g in net.members])


def _window_sums(index, z, h, net):
    scale = h ** (1.0 / index.d)
    lo = z - scale * net.domain_hi
    hi = z - scale * net.domain_lo
    pts = index.window(lo, hi)
    if pts.shape[0] == 0:
        return np.zeros(net.q)
    return net.evaluate((z - pts) / scale).sum(axis=1)


def local_empirical(sample, z, h, net, density, mode="raw-E", centering=None):
    """``E_n(z, g_l)`` over the net, optionally normed to ``D_n`` or ``L_n``.

    ``centering`` may carry precomputed :func:`centering_terms` for ``(z, h)``.
    """
    _check_bandwidth(h)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    index = _as_index(sample)
    z = np.asarray(z, dtype=float).reshape(index.d)
    f_z = None
    if mode == "L":
        f_z = float(density.pdf(z))
        if not f_z > 0:
            raise ValueError(f"mode L is undefined where f(z) = 0 (z={z.tolist()})")
    n = index.n
    if n == 0:
        raise ValueError("the local empirical process needs n >= 1")
    if centering is None:
        centering = centering_terms(density, net, z, h)
    psi = (_window_sums(index, z, h, net) - n * np.asarray(centering)) / np.sqrt(n * h)
    if mode in ("D", "L"):
        psi = psi / np.sqrt(2.0 * _log_inv(h))
    if mode == "L":
        psi = psi / np.sqrt(f_z)
    return ProcessEval(psi, n, h, z, mode, getattr(net, "name", None), f_z)


class LocalEmpiricalProcess(TransformerMixin, BaseEstimator):
    """Local empirical process over a net as a transformer.

    ``fit`` indexes a sample; ``transform`` maps locations ``z`` (rows) to
    the process vectors ``(psi_1, ..., psi_q)`` in the chosen norming.

    Parameters
    ----------
    net : FunctionNet
    density : Density
        Supplies the centering terms and, for ``mode="L"``, ``f(z)``.
    bandwidth : float
        ``h`` in ``(0, 1)``.
    mode : {"raw-E", "D", "L"}
    """

    def __init__(self, net=None, density=None, bandwidth=0.1, mode="L"):
        self.net = net
        self.density = density
        self.bandwidth = bandwidth
        self.mode = mode

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        _check_bandwidth(self.bandwidth)
        if not isinstance(self.net, FunctionNet):
            raise TypeError("net must be a FunctionNet")
        self.index_ = SampleIndex(X)
        self.n_samples_ = X.shape[0]
        self.n_features_in_ = X.shape[1]
        self._centering = {}
        return self

    def centering(self, z):
        z = np.asarray(z, dtype=float)
        key = tuple(z.tolist())
        if key not in self._centering:
            self._centering[key] = centering_terms(self.density, self.net, z, self.bandwidth)
        return self._centering[key]

    def transform(self, X):
        check_is_fitted(self, "index_")
        Z = check_array(X, dtype=float)
        out = np.empty((Z.shape[0], self.net.q))
        for i, z in enumerate(Z):
            out[i] = local_empirical(self.index_, z, self.bandwidth, self.net, self.density,
                                     self.mode, self.centering(z)).psi
        return out


# ---------------------------------------------------------------------------
# uniform increments and the oscillation modulus
# ---------------------------------------------------------------------------

def increment_process(uniform_sample, t, h, s_grid, normalized=False):
    """``xi_n(t, s) = sqrt(n/h) (G_n(t + h s) - G_n(t) - h s)`` on ``s_grid``.

    ``t`` may be a scalar or an array (rows of the result).
    """
    _check_bandwidth(h)
    index = _as_index(uniform_sample)
    n = index.n
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0) or np.any(t_arr > 1 - h + 1e-15):
        raise ValueError(f"t must lie in [0, 1 - h] = [0, {1 - h}]")
    s = np.asarray(s_grid, dtype=float)
    counts = index.count_1d(t_arr[:, None], t_arr[:, None] + h * s[None, :])
    xi = np.sqrt(n / h) * (counts / n - h * s[None, :]) if n else -np.sqrt(0.0) * s[None, :]
    if normalized:
        xi = xi / np.sqrt(2.0 * _log_inv(h))
    psi = xi[0] if np.ndim(t) == 0 else xi
    return ProcessEval(psi, n, h, t_arr if np.ndim(t) else np.array([float(t)]),
                       "D" if normalized else "raw-E", "increments")


def _sliding_max(values, lo, hi):
    """``max(values[lo[j]:hi[j]+1])`` for windows whose ends never decrease.

    Sparse-table levels are built one at a time and discarded once the
    queries needing them are answered.
    """
    m = lo.size
    out = np.full(m, -np.inf)
    valid = hi >= lo
    length = np.where(valid, hi - lo + 1, 1)
    level = np.floor(np.log2(length)).astype(int)
    table = values
    for k in range(int(level[valid].max()) + 1 if valid.any() else 0):
        sel = np.flatnonzero(valid & (level == k))
        if sel.size:
            span = 1 << k
            out[sel] = np.maximum(table[lo[sel]], table[hi[sel] - span + 1])
        half = 1 << k
        table = np.maximum(table[:-half], table[half:]) if table.size > half else table[:0]
    return out


def oscillation_modulus(uniform_sample, h):
    """``sup |sqrt(n) (G_n(t+s) - G_n(t) - s)|`` over ``0 <= s <= h``.

    The supremum is taken over the finite critical set: closed windows
    spanning order statistics ``U_(i) .. U_(j)`` for the positive side, and
    open gaps between anchors ``{0, U_(1), ..., U_(n), 1}`` (or windows of
    length exactly ``h`` starting or ending at an anchor) for the negative
    side. Window maxima are found with a sparse table in ``O(n log n)``.
    """
    _check_bandwidth(h)
    x = np.asarray(uniform_sample.points if isinstance(uniform_sample, Sample) else uniform_sample,
                   dtype=float).ravel()
    n = x.size
    if n == 0:
        return 0.0
    u = np.sort(x, kind="stable")
    idx = np.arange(n)

    # positive side: (j - i + 1)/n - (u_j - u_i) = B_j + A_i
    A = u - idx / n
    B = (idx + 1) / n - u
    lo = _first_within(u, u, h)
    pos = float(np.max(B + _sliding_max(A, lo, idx)))

    # negative side, both ends anchored: (x_j - x_i) - (j - i - 1)/n = C_j + D_i
    xs = np.concatenate([[0.0], u, [1.0]])
    k = np.arange(n + 2)
    C = xs - (k - 1) / n
    D = k / n - xs
    right = k[1:]
    lo_r = _first_within(xs, xs[1:], h)
    hi_r = right - 1
    m = _sliding_max(D, lo_r, hi_r)
    ok = np.isfinite(m)
    neg = float(np.max(C[1:][ok] + m[ok])) if ok.any() else 0.0

    # negative side, windows of length h with one anchored end
    left_ok = xs[:-1] + h <= 1.0
    if left_ok.any():
        a = xs[:-1][left_ok]
        cnt = np.searchsorted(u, a + h, "right") - np.searchsorted(u, a, "right")
        neg = max(neg, float(np.max(h - cnt / n)))
    right_ok = xs[1:] - h >= 0.0
    if right_ok.any():
        b = xs[1:][right_ok]
        cnt = np.searchsorted(u, b, "left") - np.searchsorted(u, b - h, "right")
        neg = max(neg, float(np.max(h - cnt / n)))
    return float(np.sqrt(n) * max(pos, neg, 0.0))


def _first_within(sorted_vals, ends, h):
    """For each end ``e``, the first index ``i`` with ``e - sorted_vals[i] <= h``.

    Evaluated with the same floating-point expression as the pair test so
    that window membership is exact.
    """
    guess = np.searchsorted(sorted_vals, ends - h, "left")
    guess = np.clip(guess, 0, sorted_vals.size - 1)
    # fix up rounding at the boundary
    while True:
        back = np.clip(guess - 1, 0, None)
        move = (guess > 0) & (ends - sorted_vals[back] <= h)
        if not move.any():
            break
        guess = np.where(move, back, guess)
    while True:
        fwd = (guess < sorted_vals.size) & (ends - sorted_vals[np.clip(guess, 0, sorted_vals.size - 1)] > h)
        if not fwd.any():
            break
        guess = np.where(fwd, guess + 1, guess)
    return guess


# ---------------------------------------------------------------------------
# kernel density estimation
# ---------------------------------------------------------------------------

def _kde_values(index, K, h, Z):
    n = index.n
    if n == 0:
        raise ValueError("kernel density estimate needs n >= 1")
    scale = h ** (1.0 / index.d)
    out = np.empty(Z.shape[0])
    for i, z in enumerate(Z):
        pts = index.window(z - scale * K.domain_hi, z - scale * K.domain_lo)
        out[i] = K.evaluate((z - pts) / scale).sum() if pts.shape[0] else 0.0
    return out / (n * h)


def kde(sample, K, h, z):
    """``f_n(z) = (n h)^{-1} sum_i K(h^{-1/d}(z - Z_i))``."""
    _check_bandwidth(h)
    index = _as_index(sample)
    Z = np.asarray(z, dtype=float)
    single = Z.ndim <= 1 and Z.size == index.d
    vals = _kde_values(index, K, h, Z.reshape(-1, index.d))
    return float(vals[0]) if single else vals


def kde_sup_stat(sample, K, h, z_grid, density, normalize_by_f=False, expected=None,
                 return_argmax=False):
    """``max_z sqrt(n h) |f_n(z) - E f_n(z)| / sqrt(2 ||K||^2 log(1/h))``.

    With ``normalize_by_f`` each grid value is further divided by
    ``sqrt(f(z))``. ``expected`` may hold precomputed ``E f_n`` on the grid.
    """
    _check_bandwidth(h)
    index = _as_index(sample)
    Z = np.asarray(z_grid, dtype=float).reshape(-1, index.d)
    if Z.shape[0] == 0:
        raise ValueError("z_grid must be nonempty")
    if expected is None:
        expected = np.array([smoothed_density(density, K, h, z) for z in Z])
    fn = _kde_values(index, K, h, Z)
    norm_sq = kernel_norm_sq(K)
    num = np.sqrt(index.n * h) * np.abs(fn - expected)
    if norm_sq == 0:
        # K = 0 a.e.: zero numerator, report 0 rather than 0/0
        dev = np.zeros_like(num)
    else:
        dev = num / np.sqrt(2.0 * norm_sq * _log_inv(h))
    if normalize_by_f:
        f = density.pdf(Z)
        if np.any(f <= 0):
            raise ValueError("f-normalized statistic is undefined where f(z) = 0")
        dev = dev / np.sqrt(f)
    k = int(np.argmax(dev))
    return (float(dev[k]), Z[k]) if return_argmax else float(dev[k])


def kde_band(sample, K, h, z_grid):
    """Plug-in band ``f_n(z) +- sqrt(2 ||K||^2 f_n(z) log(1/h) / (n h))``.

    Returns a list of ``(z, f_n(z), halfwidth)`` tuples.
    """
    _check_bandwidth(h)
    index = _as_index(sample)
    Z = np.asarray(z_grid, dtype=float).reshape(-1, index.d)
    fn = _kde_values(index, K, h, Z)
    half = np.sqrt(2.0 * kernel_norm_sq(K) * fn * _log_inv(h) / (index.n * h))
    return [(z if index.d > 1 else float(z[0]), float(v), float(w))
            for z, v, w in zip(Z, fn, half)]


class LocalKDE(BaseEstimator):
    """Kernel density estimator with the ``h^{1/d}`` window convention.

    Parameters
    ----------
    kernel : FunctionDescriptor
        Kernel supported in ``I^d``.
    bandwidth : float
        ``h`` in ``(0, 1)``; the window side is ``h^{1/d}``.
    """

    def __init__(self, kernel=None, bandwidth=0.1):
        self.kernel = kernel
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        _check_bandwidth(self.bandwidth)
        self.index_ = SampleIndex(X)
        self.n_features_in_ = X.shape[1]
        return self

    def density(self, X):
        check_is_fitted(self, "index_")
        Z = check_array(X, dtype=float)
        return _kde_values(self.index_, self.kernel, self.bandwidth, Z)

    def score_samples(self, X):
        """Log of the estimated density (``-inf`` where it vanishes)."""
        with np.errstate(divide="ignore"):
            return np.log(self.density(X))

    def band(self, X):
        check_is_fitted(self, "index_")
        return kde_band(self.index_, self.kernel, self.bandwidth, check_array(X, dtype=float))

    def sup_statistic(self, X, density, normalize_by_f=False):
        check_is_fitted(self, "index_")
        return kde_sup_stat(self.index_, self.kernel, self.bandwidth,
                            check_array(X, dtype=float), density, normalize_by_f)


# ---------------------------------------------------------------------------
# bandwidth schedules
# ---------------------------------------------------------------------------

@dataclass
class BandwidthSchedule:
    """``h_n = scale * n^{-alpha}`` or an explicit ``(n, h_n)`` table."""

    kind: str = "power"
    alpha: float = 0.5
    scale: float = 1.0
    table: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("power", "custom-table"):
            raise ValueError(f"schedule kind must be 'power' or 'custom-table', got {self.kind!r}")
        if self.kind == "power" and not self.scale > 0:
            raise ValueError("power schedule needs a positive scale")
        self.table = {int(k): float(v) for k, v in dict(self.table).items()}

    def __call__(self, n):
        n = int(n)
        if self.kind == "power":
            return float(self.scale * n ** (-self.alpha))
        if n not in self.table:
            raise KeyError(f"schedule table has no entry for n={n}")
        return self.table[n]

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "alpha": self.alpha, "scale": self.scale}
        return {"kind": "custom-table", "table": [[k, v] for k, v in sorted(self.table.items())]}

    @classmethod
    def from_dict(cls, spec):
        spec = dict(spec)
        kind = spec.pop("kind", "power")
        unknown = set(spec) - {"alpha", "scale", "table"}
        if unknown:
            raise ValueError(f"unknown schedule keys: {sorted(unknown)}")
        table = spec.pop("table", {})
        if isinstance(table, list):
            table = {int(k): float(v) for k, v in table}
        return cls(kind, float(spec.get("alpha", 0.5)), float(spec.get("scale", 1.0)), table)


@dataclass
class ScheduleReport:
    n_values: np.ndarray
    h_values: np.ndarray
    sequences: dict
    passed: dict
    threshold: float

    @property
    def ok(self):
        return all(self.passed.values())

    def summary(self):
        return ", ".join(f"{k} {'pass' if v else 'fail'}" for k, v in self.passed.items())

    def to_dict(self):
        return {"passed": dict(self.passed), "threshold": self.threshold,
                "n": self.n_values.tolist(), "h": self.h_values.tolist()}


def _strictly_increasing(x, rtol=1e-9):
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return bool(np.all(np.isfinite(x)))
    return bool(np.all(np.diff(x) > rtol * np.abs(x[:-1])))


def validate_schedule(schedule, n_range, threshold=10.0, points=60):
    """Check (H.i)-(H.iii) on the evaluated range.

    ``n_range`` is either an explicit list of sample sizes (three or more) or
    a ``(n_min, n_max)`` pair, expanded to a geometric grid. Returns a
    :class:`ScheduleReport`; nothing is raised.
    """
    n_range = [int(v) for v in n_range]
    if not n_range:
        raise ValueError("n_range must be nonempty")
    if isinstance(schedule, dict):
        schedule = BandwidthSchedule.from_dict(schedule)
    if len(n_range) == 2 and schedule.kind == "power":
        grid = np.unique(np.round(np.geomspace(n_range[0], n_range[1], points)).astype(np.int64))
    else:
        grid = np.array(sorted(set(n_range)), dtype=np.int64)
    h = np.array([schedule(n) for n in grid])
    in_range = bool(np.all((h > 0) & (h < 1)))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_inv = np.log(1.0 / h)
        nh = grid * h
        h2 = nh / log_inv
        loglog = np.log(np.log(grid.astype(float)))
        h3 = log_inv / loglog
    seqs = {"h": h, "nh": nh, "nh/log(1/h)": h2, "log(1/h)/loglog(n)": h3}
    passed = {
        "H.i": in_range and _strictly_increasing(-h) and _strictly_increasing(nh),
        "H.ii": in_range and _strictly_increasing(h2) and bool(h2[-1] > threshold),
        "H.iii": in_range and bool(np.all(grid >= 3)) and _strictly_increasing(h3),
    }
    return ScheduleReport(grid, h, seqs, passed, threshold)
