"""The unit ball of the reproducing kernel Hilbert space, restricted to a net.

On a net ``g_1, ..., g_q`` with Gram matrix ``Sigma`` the achievable vectors
``((g_1, xi), ..., (g_q, xi))`` with ``int xi^2 <= 1`` form the ellipsoid
``{Sigma a : a^T Sigma a <= 1}``. This module evaluates the rate function
``I(psi) = psi^T Sigma^+ psi / 2`` and the max-norm distance from ``psi`` to
that ellipsoid.

The distance is the value of ``min ||psi - B w||_inf`` over ``||w|| <= 1``
where ``Sigma = B B^T``. It is solved by a log-barrier path; each stage
yields a primal point of the ellipsoid (upper bound) and a dual vector
``y`` with ``||y||_1 = 1`` whose value ``y.psi - sqrt(y.Sigma.y)`` is a lower
bound, and the solver stops once the two agree to ``solver_tol``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

__all__ = [
    "LimitBallModel",
    "SolverError",
    "rate_function",
    "dist_to_unit_ball",
    "project_to_ball",
    "in_epsilon_ball",
    "strassen_rate_1d",
    "tail_rate",
]


class SolverError(RuntimeError):
    """Distance solver hit its iteration cap; carries the bracket reached."""

    def __init__(self, lower, upper):
        super().__init__(f"distance solver did not converge: bracket [{lower:.3e}, {upper:.3e}]")
        self.lower = lower
        self.upper = upper


class LimitBallModel(TransformerMixin, BaseEstimator):
    """Unit ball ``S_0`` seen through a finite net.

    Parameters
    ----------
    rank_cutoff : float
        Eigenvalues below ``rank_cutoff * max eigenvalue`` are treated as 0.
    solver_tol : float
        Absolute accuracy of reported distances, and slack on the ball
        membership test ``psi^T Sigma^+ psi <= 1 + solver_tol``.
    range_tol : float
        Relative size of the off-range residual tolerated before ``psi`` is
        declared outside ``range(Sigma)`` (rate ``+inf``).
    max_iter : int, optional
        Cap on Newton steps of the barrier method; defaults to
        ``10 q log(1/solver_tol) + 200``.

    Attributes
    ----------
    gram_ : ndarray of shape (q, q)
    eigvals_ : ndarray of shape (k,)
        Kept eigenvalues.
    eigvecs_ : ndarray of shape (q, k)
    """

    def __init__(self, rank_cutoff=1e-12, solver_tol=1e-6, range_tol=1e-8, max_iter=None):
        self.rank_cutoff = rank_cutoff
        self.solver_tol = solver_tol
        self.range_tol = range_tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        """Factor the Gram matrix ``X``."""
        gram = check_array(X, dtype=float)
        if gram.shape[0] != gram.shape[1]:
            raise ValueError(f"gram matrix must be square, got {gram.shape}")
        gram = 0.5 * (gram + gram.T)
        vals, vecs = np.linalg.eigh(gram)
        top = max(vals.max(), 0.0)
        keep = vals > self.rank_cutoff * top if top > 0 else np.zeros(vals.size, bool)
        self.gram_ = gram
        self.eigvals_ = vals[keep]
        self.eigvecs_ = vecs[:, keep]
        self.n_features_in_ = gram.shape[0]
        return self

    # -- rate function ------------------------------------------------------
    def _coords(self, psi):
        psi = np.asarray(psi, dtype=float)
        if psi.shape[-1] != self.n_features_in_:
            raise ValueError(f"psi has length {psi.shape[-1]}, net has {self.n_features_in_}")
        return psi @ self.eigvecs_

    def quad_form(self, psi):
        """``psi^T Sigma^+ psi``, or ``inf`` off ``range(Sigma)``."""
        check_is_fitted(self, "gram_")
        psi = np.asarray(psi, dtype=float)
        c = self._coords(psi)
        resid = psi - c @ self.eigvecs_.T
        norm = np.linalg.norm(psi, axis=-1)
        off = np.linalg.norm(resid, axis=-1) > self.range_tol * np.maximum(1.0, norm)
        val = np.sum(c ** 2 / self.eigvals_, axis=-1) if self.eigvals_.size else np.zeros(norm.shape)
        return np.where(off, np.inf, val)

    def rate(self, psi):
        return 0.5 * self.quad_form(psi)

    def contains(self, psi):
        return self.quad_form(psi) <= 1.0 + self.solver_tol

    # -- distance -----------------------------------------------------------
    def distance(self, psi, return_witness=False):
        """Max-norm distance from ``psi`` to the ellipsoid."""
        check_is_fitted(self, "gram_")
        psi = np.asarray(psi, dtype=float).ravel()
        dist, v = self._solve(psi)
        return (dist, v) if return_witness else dist

    def transform(self, X):
        """Distances of each row of ``X``, as a column."""
        X = check_array(X, dtype=float)
        return np.array([[self.distance(row)] for row in X])

    def _solve(self, psi):
        if self.contains(psi):
            return 0.0, psi.copy()
        q = psi.size
        k = self.eigvals_.size
        if k == 0:
            return float(np.max(np.abs(psi))), np.zeros(q)
        B = self.eigvecs_ * np.sqrt(self.eigvals_)
        cap = self.max_iter
        if cap is None:
            cap = int(np.ceil(10 * q * np.log(1.0 / self.solver_tol))) + 200
        return _barrier(psi, B, self.solver_tol, cap)


def _dual_bound(psi, B, y):
    s = float(np.abs(y).sum())
    if s == 0:
        return 0.0
    y = y / s
    return float(y @ psi - np.linalg.norm(B.T @ y))


def _barrier(psi, B, tol, max_iter):
    """Log-barrier path for ``min max|psi - B w|`` over ``||w|| <= 1``.

    Every iterate is strictly feasible, so ``max|psi - B w|`` is an upper
    bound; the barrier multipliers give a dual vector ``y`` whose value
    ``y.psi - ||B^T y||`` (with ``||y||_1 = 1``) is a lower bound.
    """
    q, k = B.shape
    m = 2 * q + 1
    w = np.zeros(k)
    t = float(np.max(np.abs(psi))) + 1.0
    tau = m / t
    best_hi, best_w = float(np.max(np.abs(psi))), np.zeros(k)
    lo = max(0.0, float(np.max(np.abs(psi) - np.linalg.norm(B, axis=1))))
    steps = 0
    while steps < max_iter:
        # centering by damped Newton steps
        for _ in range(60):
            steps += 1
            r = psi - B @ w
            a = 1.0 / (t - r)
            b = 1.0 / (t + r)
            c = 1.0 / (1.0 - w @ w)
            g_w = B.T @ (b - a) + 2.0 * c * w
            g_t = tau - np.sum(a + b)
            aa, bb = a * a, b * b
            H = np.empty((k + 1, k + 1))
            H[:k, :k] = (B.T * (aa + bb)) @ B + 2.0 * c * np.eye(k) + 4.0 * c * c * np.outer(w, w)
            H[:k, k] = H[k, :k] = B.T @ (aa - bb)
            H[k, k] = np.sum(aa + bb)
            g = np.append(g_w, g_t)
            try:
                step = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(H, g, rcond=None)[0]
            decrement = float(-g @ step)
            if decrement < 1e-12:
                break
            dw, dt = step[:k], step[k]
            s = 1.0
            dr = -B @ dw
            f0 = tau * t - np.sum(np.log(t - r)) - np.sum(np.log(t + r)) - np.log(1.0 / c)
            while True:
                w1, t1, r1 = w + s * dw, t + s * dt, r + s * dr
                ok = np.all(t1 - r1 > 0) and np.all(t1 + r1 > 0) and w1 @ w1 < 1.0
                if ok:
                    f1 = (tau * t1 - np.sum(np.log(t1 - r1)) - np.sum(np.log(t1 + r1))
                          - np.log(1.0 - w1 @ w1))
                    if f1 <= f0 - 0.25 * s * decrement:
                        break
                s *= 0.5
                if s < 1e-14:
                    break
            if s < 1e-14:
                break
            w, t = w1, t1
            if decrement < 1e-9:
                break
        r = psi - B @ w
        hi = float(np.max(np.abs(r)))
        if hi < best_hi:
            best_hi, best_w = hi, w.copy()
        y = (1.0 / (t - r) - 1.0 / (t + r)) / tau
        lo = max(lo, _dual_bound(psi, B, y))
        if best_hi - lo <= tol:
            return best_hi, B @ best_w
        tau *= 8.0
    raise SolverError(lo, best_hi)


# ---------------------------------------------------------------------------
# functional interface
# ---------------------------------------------------------------------------

def _model(model_or_gram):
    if isinstance(model_or_gram, LimitBallModel):
        return model_or_gram
    return LimitBallModel().fit(np.atleast_2d(model_or_gram))


def rate_function(psi, model):
    """``I(psi) = psi^T Sigma^+ psi / 2``; ``inf`` off the range of Sigma."""
    return float(_model(model).rate(np.asarray(psi, dtype=float)))


def dist_to_unit_ball(psi, model):
    return _model(model).distance(psi)


def project_to_ball(psi, model):
    """A point of the ellipsoid achieving the distance within ``solver_tol``."""
    return _model(model).distance(psi, return_witness=True)[1]


def in_epsilon_ball(psi, theta, eps):
    psi = np.asarray(psi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if psi.shape != theta.shape:
        raise ValueError("psi and theta must have equal lengths")
    return bool(np.max(np.abs(psi - theta), initial=0.0) < eps)


def strassen_rate_1d(t_grid, psi):
    """Closed-form rate on the net ``{1_[0,t_l]}``: half the energy of the
    piecewise-linear path through ``(t_l, psi_l)`` started at the origin."""
    t = np.asarray(t_grid, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if t.shape != psi.shape:
        raise ValueError("t_grid and psi must have equal lengths")
    dt = np.diff(np.concatenate([[0.0], t]))
    if np.any(dt <= 0):
        raise ValueError("t_grid must be strictly increasing and positive")
    dpsi = np.diff(np.concatenate([[0.0], psi]))
    return float(0.5 * np.sum(dpsi ** 2 / dt))


def tail_rate(gram, lam):
    """``I(F)`` for ``F = {psi : max_l |psi_l| >= lam}``: ``lam^2 / (2 max_l Sigma_ll)``."""
    top = float(np.max(np.diag(np.atleast_2d(gram))))
    if lam == 0:
        return 0.0
    return np.inf if top <= 0 else lam ** 2 / (2.0 * top)
