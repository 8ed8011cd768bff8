"""Poissonized local process and the Monte Carlo diagnostics built on it.

``Pi_n(z, g) = (b_n sqrt(f(z)))^{-1} sum_{j <= eta} (g(h^{-1/d}(z - Z_j)) - Eg)``
with ``eta ~ Poisson(n)`` and ``b_n = sqrt(2 n h log(1/h))``.

Only points landing in the window ``z - h^{1/d} supp(g)`` change the sum, so
replications are simulated by thinning: the window count is drawn as
``Poisson(n p_B)`` and the remainder as ``Poisson(n (1 - p_B))``, which by the
splitting property of Poisson counts gives the same law as drawing all
``eta`` points. The fixed-``n`` process ``L`` is handled the same way with a
binomial window count.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from localep._rng import (BLOCK_SIZE, STREAM_BINOMIAL, STREAM_GAUSSIAN, STREAM_POISSON,
                          STREAM_SAMPLE, blocks, stream_rng)
from localep.densities import smoothed_density
from localep.function_classes import product_function
from localep.limit_set import tail_rate
from localep.local_process import centering_terms

__all__ = [
    "PoissonEval",
    "ConditionError",
    "b_n",
    "eps_n",
    "poissonized_process",
    "poisson_statistic",
    "simulate",
    "covariance_check",
    "window_condition",
    "fact6_check",
    "exact_covariance",
    "ks_distance",
    "gaussian_compare",
    "ldp_tail_rate",
]


class ConditionError(ValueError):
    """The window-probability condition fails; ``value`` is the computed sum."""

    def __init__(self, value, limit=0.5):
        super().__init__(f"sum of window probabilities is {value:.6g} > {limit}")
        self.value = value


def b_n(n, h):
    return float(np.sqrt(2.0 * n * h * np.log(1.0 / h)))


def eps_n(h):
    return 1.0 / (2.0 * np.log(1.0 / h))


@dataclass
class PoissonEval:
    psi: np.ndarray
    eta: int
    n: int
    h: float
    z: np.ndarray
    net_id: Optional[str] = None


def _f_at(density, z):
    f = float(density.pdf(z))
    if not f > 0:
        raise ValueError(f"the Poissonized process is undefined where f(z) = 0 (z={np.ravel(z).tolist()})")
    return f


def _window(density, net, z, h):
    scale = h ** (1.0 / density.d)
    return z - scale * net.domain_hi, z - scale * net.domain_lo, scale


def poisson_statistic(points, n, z, h, net, density, centering=None):
    """``Pi_n`` for an explicit realization: ``points`` are the ``eta`` draws."""
    z = np.asarray(z, dtype=float).reshape(density.d)
    pts = np.asarray(points, dtype=float).reshape(-1, density.d)
    f = _f_at(density, z)
    if centering is None:
        centering = centering_terms(density, net, z, h)
    eta = pts.shape[0]
    if eta == 0:
        return PoissonEval(np.zeros(net.q), 0, n, h, z, net.name)
    scale = h ** (1.0 / density.d)
    total = net.evaluate((z - pts) / scale).sum(axis=1) - eta * np.asarray(centering)
    return PoissonEval(total / (b_n(n, h) * np.sqrt(f)), eta, n, h, z, net.name)


def poissonized_process(density, n, z, h, net, seed, rep=0, method="window", centering=None):
    """One replication of ``Pi_n(z, .)`` over the net.

    ``method="direct"`` draws all ``eta`` points from ``f``; ``"window"``
    draws only the window points (same law, cheaper).
    """
    if not 0 < h < 1:
        raise ValueError(f"bandwidth must lie in (0, 1), got {h}")
    z = np.asarray(z, dtype=float).reshape(density.d)
    _f_at(density, z)
    if centering is None:
        centering = centering_terms(density, net, z, h)
    rng = stream_rng(seed, rep, STREAM_POISSON)
    if method == "direct":
        eta = int(rng.poisson(n))
        pts = density.draw(eta, stream_rng(seed, rep, STREAM_SAMPLE))
        return poisson_statistic(pts, n, z, h, net, density, centering)
    if method != "window":
        raise ValueError(f"method must be 'window' or 'direct', got {method!r}")
    lo, hi, _ = _window(density, net, z, h)
    p = density.box_probability(lo, hi)
    inside = int(rng.poisson(n * p))
    outside = int(rng.poisson(n * (1.0 - p)))
    pts = density.draw(inside, rng, lo, hi)
    out = poisson_statistic(pts, n, z, h, net, density, centering)
    eta = inside + outside
    if eta == 0:
        return PoissonEval(np.zeros(net.q), 0, n, h, z, net.name)
    out.psi = out.psi - outside * np.asarray(centering) / (b_n(n, h) * np.sqrt(_f_at(density, z)))
    out.eta = eta
    return out


def simulate(density, n, z_list, h, net, reps, seed, kind="poisson", centering=None):
    """Replications of ``Pi`` (``kind="poisson"``) or ``L`` (``kind="binomial"``).

    Returns ``(psi, eta)`` with ``psi`` of shape ``(reps, m, q)`` for the ``m``
    locations in ``z_list`` (all sharing one realization of the points per
    replication) and ``eta`` of shape ``(reps,)``.

    Replications are drawn in blocks keyed by ``(seed, block index)``, so the
    first ``r`` rows do not depend on the total ``reps``.
    """
    if not 0 < h < 1:
        raise ValueError(f"bandwidth must lie in (0, 1), got {h}")
    if kind not in ("poisson", "binomial"):
        raise ValueError(f"kind must be 'poisson' or 'binomial', got {kind!r}")
    Z = np.asarray(z_list, dtype=float).reshape(-1, density.d)
    m, q = Z.shape[0], net.q
    f = np.array([_f_at(density, z) for z in Z])
    if centering is None:
        centering = np.array([centering_terms(density, net, z, h) for z in Z])
    centering = np.asarray(centering, dtype=float).reshape(m, q)
    scale = h ** (1.0 / density.d)
    lo = np.min(Z - scale * net.domain_hi, axis=0)
    hi = np.max(Z - scale * net.domain_lo, axis=0)
    p = density.box_probability(lo, hi)
    norm = b_n(n, h) * np.sqrt(f)
    stream = STREAM_POISSON if kind == "poisson" else STREAM_BINOMIAL

    psi = np.empty((reps, m, q))
    eta = np.empty(reps, dtype=np.int64)
    for b, start, stop in blocks(reps):
        rng = stream_rng(seed, b, stream)
        size = BLOCK_SIZE
        if kind == "poisson":
            inside = rng.poisson(n * p, size)
            blk_eta = inside + rng.poisson(n * (1.0 - p), size)
        else:
            inside = rng.binomial(n, p, size)
            blk_eta = np.full(size, n, dtype=np.int64)
        pts = density.draw(int(inside.sum()), rng, lo, hi)
        owner = np.repeat(np.arange(size), inside)
        sums = np.zeros((size, m, q))
        if pts.shape[0]:
            for i, z in enumerate(Z):
                vals = net.evaluate((z - pts) / scale)
                for l in range(q):
                    sums[:, i, l] = np.bincount(owner, weights=vals[l], minlength=size)
        blk = (sums - blk_eta[:, None, None] * centering[None]) / norm[None, :, None]
        blk[blk_eta == 0] = 0.0
        k = stop - start
        psi[start:stop] = blk[:k]
        eta[start:stop] = blk_eta[:k]
    return psi, eta


# ---------------------------------------------------------------------------
# covariance convergence
# ---------------------------------------------------------------------------

def covariance_check(density, n, z, h, net, reps, seed):
    """Monte Carlo ``2 log(1/h) cov(Pi)`` minus the Gram matrix.

    Returns a dict with the deviation matrix, entrywise standard errors,
    ``max_deviation`` and the standard error at that entry.
    """
    if reps < 2:
        raise ValueError("covariance check needs reps >= 2")
    psi, _ = simulate(density, n, [z], h, net, reps, seed)
    x = psi[:, 0, :]
    xc = x - x.mean(axis=0)
    scale = 1.0 / eps_n(h)
    prods = xc[:, :, None] * xc[:, None, :]
    cov = prods.sum(axis=0) / (reps - 1)
    se = prods.std(axis=0, ddof=1) / np.sqrt(reps)
    dev = scale * cov - net.gram
    se = scale * se
    k = np.unravel_index(int(np.argmax(np.abs(dev))), dev.shape)
    return {
        "deviation": dev,
        "stderr": se,
        "max_deviation": float(np.abs(dev)[k]),
        "stderr_at_max": float(se[k]),
        "max_stderr": float(se.max()),
        "reps": reps,
    }


# ---------------------------------------------------------------------------
# fixed-n versus Poissonized events
# ---------------------------------------------------------------------------

def window_condition(density, z_list, h):
    """``sum_i P{Z in z_i - h^{1/d} I^d}``, computed from the coordinate CDFs."""
    Z = np.asarray(z_list, dtype=float).reshape(-1, density.d)
    half = 0.5 * h ** (1.0 / density.d)
    return float(sum(density.box_probability(z - half, z + half) for z in Z))


def _box_hits(psi, lo, hi):
    lo = np.broadcast_to(np.asarray(lo, dtype=float), psi.shape[1:])
    hi = np.broadcast_to(np.asarray(hi, dtype=float), psi.shape[1:])
    return np.all((psi >= lo) & (psi <= hi), axis=(1, 2))


def fact6_check(density, n, z_list, h, net, event_boxes, reps, seed):
    """Compare ``P{L_i in B_i for all i}`` with twice the Poissonized probability.

    ``event_boxes`` is a list of ``(lo, hi)`` pairs, each broadcastable to
    ``(m, q)``: the event asks ``lo <= psi <= hi`` entrywise at every
    location. Refuses (``ConditionError``) unless the window probabilities
    sum to at most 1/2. Each event passes when
    ``P_L <= 2 P_Pi + 3 (se_L + 2 se_Pi)``.
    """
    cond = window_condition(density, z_list, h)
    if cond > 0.5:
        raise ConditionError(cond)
    L, _ = simulate(density, n, z_list, h, net, reps, seed, kind="binomial")
    P, _ = simulate(density, n, z_list, h, net, reps, seed, kind="poisson")
    events = []
    for lo, hi in event_boxes:
        pl = float(_box_hits(L, lo, hi).mean())
        pp = float(_box_hits(P, lo, hi).mean())
        se_l = float(np.sqrt(pl * (1.0 - pl) / reps))
        se_p = float(np.sqrt(pp * (1.0 - pp) / reps))
        bound = 2.0 * pp + 3.0 * (se_l + 2.0 * se_p)
        events.append({"p_L": pl, "p_Pi": pp, "se_L": se_l, "se_Pi": se_p,
                       "bound": bound, "holds": pl <= bound})
    return {"condition": cond, "events": events, "holds": all(e["holds"] for e in events)}


# ---------------------------------------------------------------------------
# Gaussian closeness
# ---------------------------------------------------------------------------

def exact_covariance(density, net, z, h):
    """Covariance of ``Pi_n(z, .)``: ``(E g g' - Eg Eg') / (2 h log(1/h) f(z))``."""
    z = np.asarray(z, dtype=float).reshape(density.d)
    f = _f_at(density, z)
    mean = centering_terms(density, net, z, h)
    members = net.members
    q = len(members)
    second = np.empty((q, q))
    for a in range(q):
        for b in range(a, q):
            val = h * smoothed_density(density, product_function(members[a], members[b]), h, z)
            second[a, b] = second[b, a] = val
    return (second - np.outer(mean, mean)) / (2.0 * h * np.log(1.0 / h) * f)


def ks_distance(a, b):
    """Two-sample KS statistic; 0 when both samples are constant and equal."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.ptp(a) == 0 and np.ptp(b) == 0 and (a.size == 0 or b.size == 0 or a[0] == b[0]):
        return 0.0
    return float(stats.ks_2samp(a, b).statistic)


def _h(h_of_n, n):
    return float(h_of_n(n))


def gaussian_compare(density, n_list, z, h_of_n, net, reps, seed):
    """KS distance between ``Pi_n(g_l)`` marginals and matched Gaussians.

    Returns one dict per ``n`` with per-member distances and their maximum.
    """
    out = []
    for n in n_list:
        h = _h(h_of_n, n)
        psi, _ = simulate(density, n, [z], h, net, reps, seed)
        cov = exact_covariance(density, net, z, h)
        rng = stream_rng(seed, int(n), STREAM_GAUSSIAN)
        gauss = rng.multivariate_normal(np.zeros(net.q), cov, size=reps, method="eigh")
        ks = np.array([ks_distance(psi[:, 0, l], gauss[:, l]) if cov[l, l] > 0
                       else ks_distance(psi[:, 0, l], np.zeros(reps))
                       for l in range(net.q)])
        out.append({"n": int(n), "h": h, "ks": ks, "max_ks": float(ks.max())})
    return out


# ---------------------------------------------------------------------------
# tail rates
# ---------------------------------------------------------------------------

def ldp_tail_rate(density, n_list, z, h_of_n, net, lam, reps, seed):
    """``eps_n log P{max_l |Pi_n(g_l)| >= lam}`` against ``-I(F)``.

    With no hits the estimate is replaced by the one-sided bound
    ``eps_n log(3 / reps)`` (95% upper limit), flagged in ``bound``.
    """
    theory = -tail_rate(net.gram, lam)
    out = []
    for n in n_list:
        h = _h(h_of_n, n)
        e = eps_n(h)
        if lam == 0:
            out.append({"n": int(n), "h": h, "hits": reps, "p_hat": 1.0, "value": 0.0,
                        "theoretical": theory, "bound": False})
            continue
        psi, _ = simulate(density, n, [z], h, net, reps, seed)
        hits = int(np.sum(np.max(np.abs(psi[:, 0, :]), axis=1) >= lam))
        if hits:
            p = hits / reps
            out.append({"n": int(n), "h": h, "hits": hits, "p_hat": p,
                        "value": float(e * np.log(p)), "theoretical": theory, "bound": False})
        else:
            out.append({"n": int(n), "h": h, "hits": 0, "p_hat": 0.0,
                        "value": float(e * np.log(3.0 / reps)), "theoretical": theory,
                        "bound": True})
    return out
