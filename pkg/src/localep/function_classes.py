"""Indexing function classes, finite nets over them and the L2 algebra.

Functions are parameterized families with explicit geometry (rectangles,
ellipsoids, kernels and finite affine combinations of these). Each descriptor
knows its support box, a uniform bound ``bound_kappa`` and how to expose
itself to the quadrature layer: separable descriptors hand out per-axis
factors that are integrated exactly, the others are integrated iteratively.
"""

import json
from functools import cached_property

import numpy as np
from scipy.special import gamma

from localep._quadrature import Factor, integrate_box, integrate_factors

__all__ = [
    "FunctionDescriptor",
    "RectIndicator",
    "EllipsoidIndicator",
    "ProductKernel",
    "RadialKernel",
    "AffineCombo",
    "Transformed",
    "FunctionNet",
    "RectangleGridNet",
    "unit_cube",
    "descriptor_from_dict",
    "evaluate",
    "inner_product",
    "l2_distance",
    "gram_matrix",
    "build_net",
    "kernel_norm_sq",
    "product_function",
]

_EDGE_TOL = 1e-12


def unit_cube(d):
    """Corners of ``I^d = [-1/2, 1/2]^d``."""
    return np.full(d, -0.5), np.full(d, 0.5)


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    return x.reshape(-1, d), single


class FunctionDescriptor:
    """Common surface of all indexing functions."""

    kind = "abstract"
    d = 1
    bound_kappa = 1.0
    # Polynomial degree along the last axis between section breaks.
    degree = None

    def __call__(self, x):
        pts, single = _as_points(x, self.d)
        out = self.evaluate(pts)
        return float(out[0]) if single else out

    def evaluate(self, x):
        raise NotImplementedError

    def components(self):
        return [(1.0, self)]

    def factors(self):
        return None

    def axis_breaks(self):
        return [(a, b) for a, b in zip(self.domain_lo, self.domain_hi)]

    def section_breaks(self, prefix):
        return ()

    def integral(self):
        """Closed-form ``int g``, or None when there is none."""
        return None

    def transformed(self, z, lam):
        """Descriptor of ``x -> g(z - lam * x)``."""
        return Transformed(self, z, lam)

    def to_dict(self):
        raise NotImplementedError


# ---------------------------------------------------------------------------
# indicators
# ---------------------------------------------------------------------------

class RectIndicator(FunctionDescriptor):
    """Indicator of the closed rectangle ``[lo, hi]``.

    ``cube`` is the box the rectangle must lie in (``I^d`` by default);
    pass ``cube=False`` to skip the containment check for shifted members.
    """

    kind = "rect-indicator"
    degree = 0

    def __init__(self, lo, hi, cube=None):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape:
            raise ValueError("rectangle corners must have the same dimension")
        if np.any(self.hi < self.lo):
            raise ValueError(f"rectangle needs lo <= hi, got {self.lo} and {self.hi}")
        self.d = self.lo.size
        if cube is not False:
            c_lo, c_hi = unit_cube(self.d) if cube is None else map(np.asarray, cube)
            if np.any(self.lo < c_lo - _EDGE_TOL) or np.any(self.hi > c_hi + _EDGE_TOL):
                raise ValueError(f"rectangle [{self.lo}, {self.hi}] leaves the cube "
                                 f"[{c_lo}, {c_hi}]")
        self.domain_lo, self.domain_hi = self.lo, self.hi
        self.bound_kappa = 1.0

    @property
    def volume(self):
        return float(np.prod(self.hi - self.lo))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.all((x >= self.lo) & (x <= self.hi), axis=1)
        return inside.astype(float)

    def factors(self):
        return [(Factor(np.ones_like, a, b, (), 0),) for a, b in zip(self.lo, self.hi)]

    def transformed(self, z, lam):
        z = np.broadcast_to(np.asarray(z, dtype=float), (self.d,))
        lam = float(lam)
        return RectIndicator((z - self.hi) / lam, (z - self.lo) / lam, cube=False)

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class EllipsoidIndicator(FunctionDescriptor):
    """Indicator of ``{x : (x - center)^T shape (x - center) <= 1}``."""

    kind = "ellipsoid-indicator"
    degree = 0

    def __init__(self, center, shape, cube=None):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.d = self.center.size
        self.shape = np.asarray(shape, dtype=float).reshape(self.d, self.d)
        if not np.allclose(self.shape, self.shape.T):
            raise ValueError("ellipsoid shape matrix must be symmetric")
        if np.linalg.eigvalsh(self.shape).min() <= 0:
            raise ValueError("ellipsoid shape matrix must be positive definite")
        half = np.sqrt(np.diag(np.linalg.inv(self.shape)))
        self.domain_lo = self.center - half
        self.domain_hi = self.center + half
        if cube is not False:
            c_lo, c_hi = unit_cube(self.d) if cube is None else map(np.asarray, cube)
            if np.any(self.domain_lo < c_lo - _EDGE_TOL) or np.any(self.domain_hi > c_hi + _EDGE_TOL):
                raise ValueError("ellipsoid leaves the cube")
        self.bound_kappa = 1.0

    def evaluate(self, x):
        y = np.asarray(x, dtype=float) - self.center
        q = np.einsum("ij,jk,ik->i", y, self.shape, y)
        return (q <= 1.0).astype(float)

    def section_breaks(self, prefix):
        return _quadric_section(self.center, self.shape, 1.0, prefix, self.d)

    def integral(self):
        return _ball_volume(self.d) / np.sqrt(np.linalg.det(self.shape))

    def transformed(self, z, lam):
        z = np.broadcast_to(np.asarray(z, dtype=float), (self.d,))
        lam = float(lam)
        return EllipsoidIndicator((z - self.center) / lam, lam ** 2 * self.shape, cube=False)

    def to_dict(self):
        return {"kind": self.kind, "center": self.center.tolist(), "shape": self.shape.tolist()}


def _ball_volume(d):
    return np.pi ** (d / 2) / gamma(d / 2 + 1)


def _quadric_section(center, shape, level, prefix, d):
    """Crossings of ``{(x-c)^T M (x-c) = level}`` along the last axis."""
    if prefix.size != d - 1:
        return ()
    y = prefix - center[:-1]
    a = shape[-1, -1]
    b = 2.0 * shape[-1, :-1] @ y
    c = y @ shape[:-1, :-1] @ y - level
    disc = b * b - 4 * a * c
    if disc <= 0:
        return ()
    r = np.sqrt(disc)
    return (center[-1] + (-b - r) / (2 * a), center[-1] + (-b + r) / (2 * a))


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

# name -> (function on [-1/2, 1/2], sup, polynomial degree, kinks)
_KERNELS_1D = {
    "uniform": (lambda x: np.ones_like(x), 1.0, 0, ()),
    "epanechnikov": (lambda x: 1.5 * (1.0 - 4.0 * x * x), 1.5, 2, ()),
    "triangular": (lambda x: 2.0 * (1.0 - 2.0 * np.abs(x)), 2.0, 1, (0.0,)),
    "biweight": (lambda x: 1.875 * (1.0 - 4.0 * x * x) ** 2, 1.875, 4, ()),
}


class ProductKernel(FunctionDescriptor):
    """``K(x) = prod_j K_j(x_j)`` with one-dimensional kernels on ``[-1/2, 1/2]``.

    The 1-d kernels are rescaled to support ``[-1/2, 1/2]`` and integrate to 1.
    """

    kind = "kernel"

    def __init__(self, names="epanechnikov", d=None):
        if isinstance(names, str):
            names = [names] * (1 if d is None else int(d))
        names = list(names)
        for nm in names:
            if nm not in _KERNELS_1D:
                raise ValueError(f"unknown kernel {nm!r}; expected one of {sorted(_KERNELS_1D)}")
        self.names = names
        self.d = len(names)
        self.domain_lo, self.domain_hi = unit_cube(self.d)
        self.bound_kappa = float(np.prod([_KERNELS_1D[nm][1] for nm in names]))
        self.degree = _KERNELS_1D[names[-1]][2]

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[0])
        for j, nm in enumerate(self.names):
            xj = x[:, j]
            out *= np.where(np.abs(xj) <= 0.5, _KERNELS_1D[nm][0](xj), 0.0)
        return out

    def factors(self):
        return [(Factor(_KERNELS_1D[nm][0], -0.5, 0.5, _KERNELS_1D[nm][3], _KERNELS_1D[nm][2]),)
                for nm in self.names]

    def axis_breaks(self):
        return [(-0.5, 0.5) + _KERNELS_1D[nm][3] for nm in self.names]

    def to_dict(self):
        return {"kind": self.kind, "names": self.names}


class RadialKernel(FunctionDescriptor):
    """``K(x) = scale * max(0, 1 - 4 x^T A x)``, a radial kernel for d >= 2.

    Its support ``{x^T A x <= 1/4}`` must sit inside ``I^d``.
    """

    kind = "kernel"
    degree = 2

    def __init__(self, A, scale=1.0):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.d = self.A.shape[0]
        if np.linalg.eigvalsh(self.A).min() <= 0:
            raise ValueError("radial kernel matrix must be positive definite")
        half = 0.5 * np.sqrt(np.diag(np.linalg.inv(self.A)))
        if np.any(half > 0.5 + _EDGE_TOL):
            raise ValueError("radial kernel support leaves I^d")
        self.domain_lo, self.domain_hi = -half, half
        self.scale = float(scale)
        self.bound_kappa = abs(self.scale)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        q = np.einsum("ij,jk,ik->i", x, self.A, x)
        return self.scale * np.maximum(0.0, 1.0 - 4.0 * q)

    def section_breaks(self, prefix):
        return _quadric_section(np.zeros(self.d), 4.0 * self.A, 1.0, prefix, self.d)

    def integral(self):
        # y = 2 A^{1/2} x maps the support onto the unit ball
        vol = _ball_volume(self.d) * 2.0 / (self.d + 2)
        return self.scale * vol * 2.0 ** -self.d / np.sqrt(np.linalg.det(self.A))

    def to_dict(self):
        return {"kind": "radial-kernel", "A": self.A.tolist(), "scale": self.scale}


# ---------------------------------------------------------------------------
# combinations and transforms
# ---------------------------------------------------------------------------

class AffineCombo(FunctionDescriptor):
    """Finite linear combination ``sum_i a_i g_i``; the empty combo is 0."""

    kind = "affine-combo"

    def __init__(self, terms, d=None):
        self.terms = [(float(a), g) for a, g in terms]
        if self.terms:
            dims = {g.d for _, g in self.terms}
            if len(dims) != 1:
                raise ValueError("combined functions must share a dimension")
            self.d = dims.pop()
        else:
            self.d = 1 if d is None else int(d)
        self.bound_kappa = float(sum(abs(a) * g.bound_kappa for a, g in self.terms))
        if self.terms:
            self.domain_lo = np.min([g.domain_lo for _, g in self.terms], axis=0)
            self.domain_hi = np.max([g.domain_hi for _, g in self.terms], axis=0)
        else:
            self.domain_lo = self.domain_hi = np.zeros(self.d)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[0])
        for a, g in self.terms:
            out += a * g.evaluate(x)
        return out

    def components(self):
        out = []
        for a, g in self.terms:
            out.extend((a * b, atom) for b, atom in g.components())
        return out

    def transformed(self, z, lam):
        return AffineCombo([(a, g.transformed(z, lam)) for a, g in self.terms], d=self.d)

    def to_dict(self):
        return {"kind": self.kind, "d": self.d,
                "terms": [[a, g.to_dict()] for a, g in self.terms]}


def zero_function(d=1):
    return AffineCombo([], d=d)


class Transformed(FunctionDescriptor):
    """``x -> g(z - lam * x)`` for ``lam >= 1``, a shifted and rescaled member."""

    kind = "transformed"

    def __init__(self, g, z, lam):
        if isinstance(g, AffineCombo):
            raise TypeError("transform combos term by term via AffineCombo.transformed")
        self.g = g
        self.d = g.d
        self.z = np.broadcast_to(np.asarray(z, dtype=float), (self.d,)).copy()
        self.lam = float(lam)
        if self.lam < 1:
            raise ValueError("scale lam must be >= 1")
        self.domain_lo = (self.z - g.domain_hi) / self.lam
        self.domain_hi = (self.z - g.domain_lo) / self.lam
        self.bound_kappa = g.bound_kappa
        self.degree = g.degree

    def evaluate(self, x):
        return self.g.evaluate(self.z - self.lam * np.asarray(x, dtype=float))

    def factors(self):
        base = self.g.factors()
        if base is None:
            return None
        out = []
        for j, axis in enumerate(base):
            zj, lam = self.z[j], self.lam
            out.append(tuple(
                Factor(lambda u, f=f, zj=zj: f.func(zj - lam * u),
                       (zj - f.hi) / lam, (zj - f.lo) / lam,
                       tuple((zj - b) / lam for b in f.breaks), f.degree)
                for f in axis))
        return out

    def axis_breaks(self):
        return [tuple((zj - b) / self.lam for b in br)
                for zj, br in zip(self.z, self.g.axis_breaks())]

    def section_breaks(self, prefix):
        inner = self.g.section_breaks(self.z[:prefix.size] - self.lam * prefix)
        return tuple((self.z[prefix.size] - b) / self.lam for b in inner)

    def to_dict(self):
        return {"kind": self.kind, "g": self.g.to_dict(), "z": self.z.tolist(), "lam": self.lam}


class _ProductAtom(FunctionDescriptor):
    """Pointwise product of two atoms (used for second moments)."""

    kind = "product"

    def __init__(self, a, b):
        self.a, self.b = a, b
        self.d = a.d
        self.domain_lo = np.maximum(a.domain_lo, b.domain_lo)
        self.domain_hi = np.minimum(a.domain_hi, b.domain_hi)
        self.bound_kappa = a.bound_kappa * b.bound_kappa
        self.degree = None if a.degree is None or b.degree is None else a.degree + b.degree

    def evaluate(self, x):
        return self.a.evaluate(x) * self.b.evaluate(x)

    def factors(self):
        fa, fb = self.a.factors(), self.b.factors()
        if fa is None or fb is None:
            return None
        return [tuple(x) + tuple(y) for x, y in zip(fa, fb)]

    def axis_breaks(self):
        return [tuple(x) + tuple(y) for x, y in zip(self.a.axis_breaks(), self.b.axis_breaks())]

    def section_breaks(self, prefix):
        return tuple(self.a.section_breaks(prefix)) + tuple(self.b.section_breaks(prefix))


def product_function(g1, g2):
    """Descriptor of ``g1 * g2`` (expanded over affine components)."""
    terms = [(a * b, _ProductAtom(x, y)) for a, x in g1.components() for b, y in g2.components()]
    return AffineCombo(terms, d=g1.d)


def descriptor_from_dict(spec):
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "rect-indicator":
        return RectIndicator(spec["lo"], spec["hi"], cube=spec.get("cube"))
    if kind == "ellipsoid-indicator":
        return EllipsoidIndicator(spec["center"], spec["shape"], cube=spec.get("cube"))
    if kind == "kernel":
        return ProductKernel(spec.get("names", spec.get("name", "epanechnikov")), spec.get("d"))
    if kind == "radial-kernel":
        return RadialKernel(spec["A"], spec.get("scale", 1.0))
    if kind == "affine-combo":
        return AffineCombo([(a, descriptor_from_dict(g)) for a, g in spec["terms"]], spec.get("d"))
    if kind == "transformed":
        return descriptor_from_dict(spec["g"]).transformed(spec["z"], spec["lam"])
    raise ValueError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# L2 algebra
# ---------------------------------------------------------------------------

def evaluate(g, x):
    """``g(x)``; zero outside the descriptor's support."""
    return g(x)


def inner_product(g1, g2, tol=1e-10):
    """``int g1 g2`` over the common cube."""
    if g1.d != g2.d:
        raise ValueError("functions live in different dimensions")
    total = 0.0
    for a, x in g1.components():
        for b, y in g2.components():
            if a == 0.0 or b == 0.0:
                continue
            total += a * b * _atom_inner(x, y, tol)
    return total


def _atom_inner(x, y, tol):
    if isinstance(x, RectIndicator) and isinstance(y, RectIndicator):
        side = np.minimum(x.hi, y.hi) - np.maximum(x.lo, y.lo)
        return float(np.prod(np.clip(side, 0.0, None)))
    fx, fy = x.factors(), y.factors()
    if fx is not None and fy is not None:
        return integrate_factors([tuple(a) + tuple(b) for a, b in zip(fx, fy)], tol)
    prod = _ProductAtom(x, y)
    return integrate_box(prod.evaluate, prod.domain_lo, prod.domain_hi, prod.axis_breaks(),
                         prod.section_breaks, tol, prod.degree)


def l2_distance(g1, g2):
    sq = inner_product(g1, g1) - 2.0 * inner_product(g1, g2) + inner_product(g2, g2)
    return float(np.sqrt(max(sq, 0.0)))


def gram_matrix(members, tol=1e-10):
    """Pairwise inner products of ``members`` (symmetric PSD)."""
    members = list(members)
    q = len(members)
    if q < 1:
        raise ValueError("gram matrix needs at least one member")
    if all(isinstance(g, RectIndicator) for g in members):
        lo = np.array([g.lo for g in members])
        hi = np.array([g.hi for g in members])
        return _rect_gram(lo, hi)
    out = np.empty((q, q))
    for i in range(q):
        for j in range(i, q):
            out[i, j] = out[j, i] = inner_product(members[i], members[j], tol)
    return out


def _rect_gram(lo, hi):
    side = np.minimum(hi[:, None, :], hi[None, :, :]) - np.maximum(lo[:, None, :], lo[None, :, :])
    return np.prod(np.clip(side, 0.0, None), axis=2)


def kernel_norm_sq(K):
    """``||K||_2^2 = int K^2``."""
    return inner_product(K, K)


# ---------------------------------------------------------------------------
# nets
# ---------------------------------------------------------------------------

class FunctionNet:
    """Finite net ``g_1, ..., g_q`` of an indexing class.

    ``mesh_delta`` is the covering radius in the L2 pseudo-metric; the
    entropy constants are documentation only.
    """

    def __init__(self, members, mesh_delta=float("nan"), name="explicit",
                 entropy_meta=None, spec=None):
        self._members = list(members)
        if not self._members:
            raise ValueError("a net needs at least one member")
        self.mesh_delta = float(mesh_delta)
        self.name = name
        self.entropy_meta = dict(entropy_meta or {})
        self.spec = spec if spec is not None else {"kind": "explicit",
                                                   "members": [g.to_dict() for g in self._members]}

    @property
    def members(self):
        return self._members

    @property
    def q(self):
        return len(self.members)

    @property
    def d(self):
        return self.members[0].d

    @property
    def bound_kappa(self):
        return max(g.bound_kappa for g in self.members)

    @property
    def domain_lo(self):
        return np.min([g.domain_lo for g in self.members], axis=0)

    @property
    def domain_hi(self):
        return np.max([g.domain_hi for g in self.members], axis=0)

    @cached_property
    def gram(self):
        return gram_matrix(self.members)

    def evaluate(self, x):
        """``(q, m)`` matrix of member values at the rows of ``x``."""
        x = np.asarray(x, dtype=float).reshape(-1, self.d)
        return np.stack([g.evaluate(x) for g in self.members]) if x.size else np.zeros((self.q, 0))

    def to_dict(self, with_gram=True):
        out = {"name": self.name, "mesh_delta": self.mesh_delta, "q": self.q,
               "entropy_meta": self.entropy_meta,
               "members": [g.to_dict() for g in self.members]}
        if with_gram:
            out["gram"] = self.gram.tolist()
        return out

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        members = [descriptor_from_dict(m) for m in data["members"]]
        return cls(members, data.get("mesh_delta", float("nan")), data.get("name", "explicit"),
                   data.get("entropy_meta"))

    def __len__(self):
        return self.q

    def __repr__(self):
        return f"FunctionNet({self.name}, q={self.q}, mesh_delta={self.mesh_delta:g})"


class RectangleGridNet(FunctionNet):
    """All rectangles with corners on a regular grid of ``I^d``, plus the
    empty rectangle; stored as corner arrays because the net is large."""

    def __init__(self, lo, hi, mesh_delta, spacing, spec):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.spacing = spacing
        self.mesh_delta = float(mesh_delta)
        self.name = "rectangles"
        self.entropy_meta = {}
        self.spec = spec

    @cached_property
    def members(self):
        return [RectIndicator(a, b) for a, b in zip(self.lo, self.hi)]

    @property
    def q(self):
        return self.lo.shape[0]

    @property
    def d(self):
        return self.lo.shape[1]

    @property
    def bound_kappa(self):
        return 1.0

    @property
    def domain_lo(self):
        return self.lo.min(axis=0)

    @property
    def domain_hi(self):
        return self.hi.max(axis=0)

    @cached_property
    def gram(self):
        if self.q > 20000:
            raise ValueError(f"gram of a {self.q}-member net is too large to form")
        return _rect_gram(self.lo, self.hi)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.d)
        inside = (x[None, :, :] >= self.lo[:, None, :]) & (x[None, :, :] <= self.hi[:, None, :])
        return np.all(inside, axis=2).astype(float)

    def nearest(self, lo, hi):
        """Member index obtained by snapping the corners of ``[lo, hi]`` to the grid."""
        m = self.ticks.size
        a = np.clip(np.round((np.asarray(lo) + 0.5) / self.spacing), 0, m - 1).astype(int)
        b = np.clip(np.round((np.asarray(hi) + 0.5) / self.spacing), 0, m - 1).astype(int)
        if np.any(b <= a):
            return self.q - 1
        pairs = self.pair_index[a, b]
        return int(np.ravel_multi_index(pairs, [self.n_pairs] * self.d))


_NET_KINDS = ("intervals", "anchored-intervals", "rectangles", "anchored-rectangles",
              "kernel", "explicit")


def build_net(class_spec, mesh_delta=None):
    """Finite net covering a shipped class at L2 radius ``mesh_delta``.

    ``class_spec`` is a dict with a ``kind`` among ``intervals`` (``1_[0,t]``
    on ``[0, 1]``), ``anchored-intervals`` (``1_[-1/2, -1/2+t]``),
    ``rectangles`` (all rectangles in ``I^d``), ``anchored-rectangles``
    (lower-left anchored rectangles with corners on ``levels``), ``kernel``
    (the singleton ``{K}``) and ``explicit`` (a list of member dicts).
    Grid kinds accept ``q`` (or ``levels``) instead of ``mesh_delta``.
    """
    if isinstance(class_spec, str):
        class_spec = {"kind": class_spec}
    spec = dict(class_spec)
    kind = spec.get("kind")
    if kind not in _NET_KINDS:
        raise ValueError(f"unknown net kind {kind!r}; expected one of {list(_NET_KINDS)}")
    if mesh_delta is None:
        mesh_delta = spec.get("mesh_delta")
    if mesh_delta is not None and not mesh_delta > 0:
        raise ValueError("mesh_delta must be positive")

    if kind in ("intervals", "anchored-intervals"):
        if "levels" in spec:
            levels = np.asarray(spec["levels"], dtype=float)
        else:
            # rho(1_[0,t], 1_[0,u]) = sqrt|t-u|, so spacing delta^2 covers
            if mesh_delta is None and "q" not in spec:
                raise ValueError(f"{kind} nets need one of q, levels or mesh_delta")
            m = int(spec["q"]) if mesh_delta is None else int(np.ceil(1.0 / mesh_delta ** 2 - 1e-9))
            levels = np.arange(1, m + 1) / m
        if np.any(np.diff(levels) <= 0) or levels[0] <= 0 or levels[-1] > 1:
            raise ValueError("interval levels must increase within (0, 1]")
        gaps = np.diff(np.concatenate([[0.0], levels]))
        mesh = float(np.sqrt(max(gaps.max(), 1.0 - levels[-1])))
        if kind == "intervals":
            members = [RectIndicator([0.0], [t], cube=([0.0], [1.0])) for t in levels]
        else:
            members = [RectIndicator([-0.5], [-0.5 + t]) for t in levels]
        spec_out = {"kind": kind, "levels": levels.tolist()}
        return FunctionNet(members, mesh, kind, {"C_0": 1.0, "nu_0": 2.0}, spec_out)

    if kind == "anchored-rectangles":
        d = int(spec.get("d", 2))
        levels = np.asarray(spec.get("levels", [1 / 3, 2 / 3, 1.0]), dtype=float)
        gaps = np.diff(np.concatenate([[0.0], levels]))
        grids = np.meshgrid(*([levels] * d), indexing="ij")
        tops = np.stack([g.ravel() for g in grids], axis=1)
        members = [RectIndicator(np.full(d, -0.5), -0.5 + t) for t in tops]
        mesh = float(np.sqrt(d * max(gaps.max(), 1.0 - levels[-1])))
        spec_out = {"kind": kind, "d": d, "levels": levels.tolist()}
        return FunctionNet(members, mesh, kind, {"C_0": 1.0, "nu_0": 2.0 * d}, spec_out)

    if kind == "rectangles":
        d = int(spec.get("d", 2))
        if mesh_delta is None:
            raise ValueError("the rectangle class needs mesh_delta")
        # moving each of the 2d faces by <= s/2 changes the volume by <= d*s
        m = int(np.ceil(d / mesh_delta ** 2)) + 1
        spacing = 1.0 / (m - 1)
        ticks = -0.5 + spacing * np.arange(m)
        ia, ib = np.triu_indices(m, k=1)
        per_axis = np.stack([ticks[ia], ticks[ib]], axis=1)
        combos = np.stack(np.meshgrid(*([np.arange(per_axis.shape[0])] * d), indexing="ij"),
                          axis=-1).reshape(-1, d)
        lo = per_axis[combos, 0]
        hi = per_axis[combos, 1]
        lo = np.vstack([lo, np.zeros((1, d))])
        hi = np.vstack([hi, np.zeros((1, d))])
        net = RectangleGridNet(lo, hi, mesh_delta, spacing,
                               {"kind": kind, "d": d, "mesh_delta": mesh_delta})
        net.ticks = ticks
        net.n_pairs = ia.size
        net.pair_index = -np.ones((m, m), dtype=np.int64)
        net.pair_index[ia, ib] = np.arange(ia.size)
        return net

    if kind == "kernel":
        K = ProductKernel(spec.get("names", spec.get("name", "epanechnikov")), spec.get("d"))
        return FunctionNet([K], 0.0, "kernel", {"C_0": 1.0, "nu_0": 1.0},
                           {"kind": "kernel", "names": K.names})

    members = [descriptor_from_dict(m) for m in spec["members"]]
    return FunctionNet(members, spec.get("mesh_delta", float("nan")), "explicit", spec=spec)
