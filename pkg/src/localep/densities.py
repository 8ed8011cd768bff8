"""Target densities with exact evaluation, sampling and smoothing.

Every shipped density is a product of one-dimensional laws whose CDFs are
available in closed form, so draws are exact inverse-CDF transforms of
uniforms and a seed reproduces a sample bit for bit.

The example laws (uniform box, triangular, truncated Gaussian mixture and
their products) are a convenience set chosen for the experiments; nothing
about the process engines depends on them.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from localep._quadrature import Factor, QuadratureError, integrate_box, integrate_factors
from localep._rng import STREAM_SAMPLE, check_seed, stream_rng

__all__ = [
    "Uniform1D",
    "Triangular1D",
    "TruncatedGaussianMixture1D",
    "Density",
    "Sample",
    "uniform_box",
    "triangular",
    "truncated_gaussian_mixture",
    "product_of_1d",
    "make_density",
    "eval_density",
    "sample",
    "smoothed_density",
    "QuadratureError",
]


# ---------------------------------------------------------------------------
# one-dimensional laws
# ---------------------------------------------------------------------------

class Uniform1D:
    kind = "uniform"
    degree = 0

    def __init__(self, low=0.0, high=1.0):
        low, high = float(low), float(high)
        if not high > low:
            raise ValueError(f"uniform needs low < high, got [{low}, {high}]")
        self.lo, self.hi = low, high
        self.breaks = ()

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def ppf(self, p):
        return self.lo + np.asarray(p) * (self.hi - self.lo)

    def sample_interval(self, u, a, b):
        a, b = max(a, self.lo), min(b, self.hi)
        return a + u[0] * (b - a)

    def n_uniforms(self):
        return 1

    def to_dict(self):
        return {"kind": "uniform", "low": self.lo, "high": self.hi}


class Triangular1D:
    """Triangular law on ``[low, high]`` with its mode at ``peak``."""

    kind = "triangular"
    degree = 1

    def __init__(self, low=0.0, peak=0.5, high=1.0):
        low, peak, high = float(low), float(peak), float(high)
        if not (high > low and low <= peak <= high):
            raise ValueError(f"triangular needs low <= peak <= high, low < high; got "
                             f"({low}, {peak}, {high})")
        self.lo, self.c, self.hi = low, peak, high
        self.height = 2.0 / (high - low)
        self.breaks = (peak,)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, c, hi, top = self.lo, self.c, self.hi, self.height
        with np.errstate(divide="ignore", invalid="ignore"):
            left = top * (x - lo) / (c - lo) if c > lo else np.full_like(x, top)
            right = top * (hi - x) / (hi - c) if hi > c else np.full_like(x, top)
        out = np.where(x <= c, left, right)
        return np.where((x >= lo) & (x <= hi), out, 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        lo, c, hi = self.lo, self.c, self.hi
        span = hi - lo
        with np.errstate(divide="ignore", invalid="ignore"):
            left = (x - lo) ** 2 / (span * (c - lo)) if c > lo else np.zeros_like(x)
            right = 1.0 - (hi - x) ** 2 / (span * (hi - c)) if hi > c else np.ones_like(x)
        return np.where(x <= c, left, right)

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        lo, c, hi = self.lo, self.c, self.hi
        span = hi - lo
        pc = (c - lo) / span
        left = lo + np.sqrt(p * span * (c - lo))
        right = hi - np.sqrt((1.0 - p) * span * (hi - c))
        return np.where(p <= pc, left, right)

    def sample_interval(self, u, a, b):
        a, b = max(a, self.lo), min(b, self.hi)
        fa, fb = self.cdf(a), self.cdf(b)
        return np.clip(self.ppf(fa + u[0] * (fb - fa)), a, b)

    def n_uniforms(self):
        return 1

    def to_dict(self):
        return {"kind": "triangular", "low": self.lo, "peak": self.c, "high": self.hi}


class TruncatedGaussianMixture1D:
    """Gaussian mixture conditioned on ``[low, high]``."""

    kind = "truncated-gaussian-mixture"
    degree = None

    def __init__(self, means, scales, weights, low=0.0, high=1.0):
        self.means = np.atleast_1d(np.asarray(means, dtype=float))
        self.scales = np.atleast_1d(np.asarray(scales, dtype=float))
        self.weights = np.atleast_1d(np.asarray(weights, dtype=float))
        k = self.means.size
        if self.scales.size != k or self.weights.size != k or k == 0:
            raise ValueError("means, scales and weights must have the same nonzero length")
        if np.any(self.scales <= 0):
            raise ValueError(f"mixture scales must be positive, got {self.scales.tolist()}")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must be nonnegative and sum to 1, "
                             f"got {self.weights.tolist()}")
        low, high = float(low), float(high)
        if not high > low:
            raise ValueError(f"mixture needs low < high, got [{low}, {high}]")
        self.lo, self.hi = low, high
        self.breaks = ()
        self._mass = self._component_mass(low, high)
        self._z = float(self.weights @ self._mass)

    def _component_mass(self, a, b):
        za = (a - self.means) / self.scales
        zb = (b - self.means) / self.scales
        return special.ndtr(zb) - special.ndtr(za)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        zs = (x[..., None] - self.means) / self.scales
        dens = np.exp(-0.5 * zs ** 2) / (np.sqrt(2 * np.pi) * self.scales)
        out = dens @ self.weights / self._z
        return np.where((x >= self.lo) & (x <= self.hi), out, 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        zs = (x[..., None] - self.means) / self.scales
        za = (self.lo - self.means) / self.scales
        return (special.ndtr(zs) - special.ndtr(za)) @ self.weights / self._z

    def sample_interval(self, u, a, b):
        a, b = max(a, self.lo), min(b, self.hi)
        w = self.weights * self._component_mass(a, b)
        cum = np.cumsum(w / w.sum())
        comp = np.minimum(np.searchsorted(cum, u[0], side="right"), cum.size - 1)
        mu, sd = self.means[comp], self.scales[comp]
        x = stats.truncnorm.ppf(u[1], (a - mu) / sd, (b - mu) / sd, loc=mu, scale=sd)
        return np.clip(x, a, b)

    def n_uniforms(self):
        return 2

    def to_dict(self):
        return {"kind": "truncated-gaussian-mixture", "means": self.means.tolist(),
                "scales": self.scales.tolist(), "weights": self.weights.tolist(),
                "low": self.lo, "high": self.hi}


_LAWS_1D = {
    "uniform": lambda p: Uniform1D(p.get("low", 0.0), p.get("high", 1.0)),
    "triangular": lambda p: Triangular1D(p.get("low", 0.0), p.get("peak", 0.5), p.get("high", 1.0)),
    "truncated-gaussian-mixture": lambda p: TruncatedGaussianMixture1D(
        p["means"], p["scales"], p["weights"], p.get("low", 0.0), p.get("high", 1.0)),
}


# ---------------------------------------------------------------------------
# d-dimensional product densities
# ---------------------------------------------------------------------------

class Density:
    """Product of one-dimensional laws with a declared continuity region.

    Parameters
    ----------
    components : sequence of 1-d laws
        One law per coordinate.
    kind : str
        Label used in configs and reports.
    region_J : pair of sequences, optional
        Lower and upper corners of the compact box ``J``. Defaults to the
        middle 80% of the support.
    margin_gamma : float, optional
        Enlargement ``gamma`` of ``J`` on which the density must be continuous
        and positive. Defaults to 5% of the narrowest support side.
    """

    def __init__(self, components, kind="product-of-1d", region_J=None, margin_gamma=None):
        self.components = list(components)
        if not self.components:
            raise ValueError("density needs at least one coordinate")
        self.kind = kind
        self.d = len(self.components)
        self.support_lo = np.array([c.lo for c in self.components])
        self.support_hi = np.array([c.hi for c in self.components])
        width = self.support_hi - self.support_lo
        if region_J is None:
            region_J = (self.support_lo + 0.1 * width, self.support_hi - 0.1 * width)
        self.J_lo = np.asarray(region_J[0], dtype=float).reshape(self.d)
        self.J_hi = np.asarray(region_J[1], dtype=float).reshape(self.d)
        if np.any(self.J_hi <= self.J_lo):
            raise ValueError("region_J must have nonempty interior")
        self.margin_gamma = float(0.05 * width.min() if margin_gamma is None else margin_gamma)
        if self.margin_gamma <= 0:
            raise ValueError("margin_gamma must be positive")
        self._check_positive_on_J_gamma()

    # -- evaluation ---------------------------------------------------------
    def pdf(self, x):
        """Density at ``x``; accepts a single point or an ``(m, d)`` array."""
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1
        x = x.reshape(-1, self.d)
        out = np.ones(x.shape[0])
        for j, c in enumerate(self.components):
            out *= c.pdf(x[:, j])
        return float(out[0]) if single else out

    def box_probability(self, lo, hi):
        """Exact P{Z in [lo, hi]} from the coordinate CDFs."""
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (self.d,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (self.d,))
        p = 1.0
        for j, c in enumerate(self.components):
            if hi[j] <= lo[j]:
                return 0.0
            p *= float(c.cdf(hi[j]) - c.cdf(lo[j]))
        return p

    def sup_sqrt_on_J(self, points_per_dim=401):
        """max of sqrt(f) over a grid of J (exact for the shipped laws' grids)."""
        pts = _grid(self.J_lo, self.J_hi, points_per_dim)
        extra = [np.clip(np.array(c.breaks), lo, hi)
                 for c, lo, hi in zip(self.components, self.J_lo, self.J_hi)]
        val = float(np.sqrt(self.pdf(pts).max()))
        if self.d == 1 and extra[0].size:
            val = max(val, float(np.sqrt(self.pdf(extra[0][:, None]).max())))
        return val

    def _check_positive_on_J_gamma(self, points_per_dim=101):
        lo = self.J_lo - self.margin_gamma
        hi = self.J_hi + self.margin_gamma
        pts = _grid(lo, hi, points_per_dim if self.d <= 2 else 11)
        vals = self.pdf(pts)
        if not np.all(vals > 0):
            raise ValueError(f"density {self.kind} is not positive on J_gamma "
                             f"(J=[{self.J_lo.tolist()}, {self.J_hi.tolist()}], "
                             f"gamma={self.margin_gamma})")

    # -- sampling -----------------------------------------------------------
    def draw(self, n, rng, lo=None, hi=None):
        """``n`` points from the law conditioned on the box ``[lo, hi]``."""
        lo = self.support_lo if lo is None else np.maximum(lo, self.support_lo)
        hi = self.support_hi if hi is None else np.minimum(hi, self.support_hi)
        out = np.empty((n, self.d))
        for j, c in enumerate(self.components):
            u = rng.random((c.n_uniforms(), n))
            out[:, j] = c.sample_interval(u, lo[j], hi[j])
        return out

    def sample(self, n, seed, rep=0):
        n = int(n)
        if n < 0:
            raise ValueError("sample size must be nonnegative")
        rng = stream_rng(seed, rep, STREAM_SAMPLE)
        return Sample(self.draw(n, rng), seed=check_seed(seed), density_id=self.kind, rep=rep)

    # -- smoothing ------------------------------------------------------------
    def axis_factor(self, j, z_j, scale):
        """Factor ``u -> f_j(z_j - scale * u)`` along coordinate ``j``."""
        c = self.components[j]
        return Factor(
            func=lambda u: c.pdf(z_j - scale * u),
            lo=(z_j - c.hi) / scale,
            hi=(z_j - c.lo) / scale,
            breaks=tuple((z_j - b) / scale for b in c.breaks),
            degree=c.degree,
        )

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "uniform-box":
            out.update(low=self.support_lo.tolist(), high=self.support_hi.tolist())
        elif self.kind in ("triangular", "truncated-gaussian-mixture"):
            out.update({k: v for k, v in self.components[0].to_dict().items() if k != "kind"})
        else:
            out["components"] = [c.to_dict() for c in self.components]
        out["region_J"] = [self.J_lo.tolist(), self.J_hi.tolist()]
        out["margin_gamma"] = self.margin_gamma
        return out

    def __repr__(self):
        return f"Density({self.kind}, d={self.d})"


@dataclass
class Sample:
    """An i.i.d. sample together with the seed that produced it."""

    points: np.ndarray
    seed: Optional[int] = None
    density_id: Optional[str] = None
    rep: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        self.points = pts

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def __len__(self):
        return self.n


def _grid(lo, hi, m):
    axes = [np.linspace(a, b, m) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def uniform_box(low, high, region_J=None, margin_gamma=None):
    low = np.atleast_1d(np.asarray(low, dtype=float))
    high = np.atleast_1d(np.asarray(high, dtype=float))
    return Density([Uniform1D(a, b) for a, b in zip(low, high)], "uniform-box",
                   region_J, margin_gamma)


def triangular(low=0.0, peak=0.5, high=1.0, region_J=None, margin_gamma=None):
    return Density([Triangular1D(low, peak, high)], "triangular", region_J, margin_gamma)


def truncated_gaussian_mixture(means, scales, weights, low=0.0, high=1.0,
                               region_J=None, margin_gamma=None):
    law = TruncatedGaussianMixture1D(means, scales, weights, low, high)
    return Density([law], "truncated-gaussian-mixture", region_J, margin_gamma)


def product_of_1d(components: Sequence, region_J=None, margin_gamma=None):
    laws = [c if hasattr(c, "sample_interval") else _law_from_dict(c) for c in components]
    return Density(laws, "product-of-1d", region_J, margin_gamma)


def _law_from_dict(spec):
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind not in _LAWS_1D:
        raise ValueError(f"unknown 1-d law {kind!r}; expected one of {sorted(_LAWS_1D)}")
    return _LAWS_1D[kind](spec)


_DENSITY_KEYS = {
    "uniform-box": {"low", "high"},
    "triangular": {"low", "peak", "high"},
    "truncated-gaussian-mixture": {"means", "scales", "weights", "low", "high"},
    "product-of-1d": {"components"},
}


def make_density(spec):
    """Build a density from its config-document description."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _DENSITY_KEYS:
        raise ValueError(f"unknown density kind {kind!r}; expected one of {sorted(_DENSITY_KEYS)}")
    region_J = spec.pop("region_J", None)
    gamma = spec.pop("margin_gamma", None)
    unknown = set(spec) - _DENSITY_KEYS[kind]
    if unknown:
        raise ValueError(f"unknown keys for density {kind!r}: {sorted(unknown)}")
    if kind == "uniform-box":
        return uniform_box(spec.get("low", [0.0]), spec.get("high", [1.0]), region_J, gamma)
    if kind == "triangular":
        return triangular(spec.get("low", 0.0), spec.get("peak", 0.5), spec.get("high", 1.0),
                          region_J, gamma)
    if kind == "truncated-gaussian-mixture":
        return truncated_gaussian_mixture(spec["means"], spec["scales"], spec["weights"],
                                          spec.get("low", 0.0), spec.get("high", 1.0),
                                          region_J, gamma)
    return product_of_1d(spec["components"], region_J, gamma)


# ---------------------------------------------------------------------------
# functional interface
# ---------------------------------------------------------------------------

def eval_density(density, z):
    return density.pdf(z)


def sample(density, n, seed, rep=0):
    return density.sample(n, seed, rep)


def smoothed_density(density, H, h, z, tol=1e-8):
    """``f * H_h(z) = h^{-1} int f(x) H(h^{-1/d}(z - x)) dx``.

    Computed after the substitution ``x = z - h^{1/d} u`` as
    ``int f(z - h^{1/d} u) H(u) du``. Piecewise-polynomial pairs are
    integrated exactly on their breakpoint panels.
    """
    if not 0 < h < 1:
        raise ValueError(f"bandwidth must lie in (0, 1), got {h}")
    z = np.asarray(z, dtype=float).reshape(density.d)
    scale = h ** (1.0 / density.d)
    total = 0.0
    for coef, atom in H.components():
        if coef == 0.0:
            continue
        total += coef * _smooth_atom(density, atom, z, scale, tol)
    return total


def _flat_over(factors, lo, hi):
    for f, a, b in zip(factors, lo, hi):
        if f.degree != 0 or a < f.lo or b > f.hi or any(a < t < b for t in f.breaks):
            return False
    return True


def _smooth_atom(density, atom, z, scale, tol):
    dens_factors = [density.axis_factor(j, z[j], scale) for j in range(density.d)]
    atom_factors = atom.factors()
    if atom_factors is not None:
        return integrate_factors([[df] + list(af) for df, af in zip(dens_factors, atom_factors)],
                                 tol)
    mass = atom.integral()
    if mass is not None and _flat_over(dens_factors, atom.domain_lo, atom.domain_hi):
        # f is constant on the whole window
        return mass * float(density.pdf(z[None, :] - scale * (atom.domain_lo + atom.domain_hi) / 2)[0])
    lo = np.maximum(atom.domain_lo, [f.lo for f in dens_factors])
    hi = np.minimum(atom.domain_hi, [f.hi for f in dens_factors])
    breaks = [tuple(f.breaks) + tuple(b) for f, b in zip(dens_factors, atom.axis_breaks())]

    def integrand(u):
        return atom.evaluate(u) * density.pdf(z[None, :] - scale * u)

    last = density.components[-1].degree
    inner = None if (last is None or atom.degree is None) else last + atom.degree
    return integrate_box(integrand, lo, hi, breaks, atom.section_breaks, tol, inner)
