import numpy as np
import pytest
from scipy import stats

from localep._rng import stream_rng
from localep.densities import triangular, uniform_box
from localep.function_classes import FunctionNet, RectIndicator, build_net, zero_function
from localep.local_process import centering_terms
from localep.poissonization import (ConditionError, b_n, covariance_check, eps_n, exact_covariance,
                                    fact6_check, gaussian_compare, ks_distance, ldp_tail_rate,
                                    poisson_statistic, poissonized_process, simulate,
                                    window_condition)
from oracles import poisson_enum

U01 = uniform_box([0.0], [1.0])
TOY = FunctionNet([RectIndicator([-0.5], [0.0])])
SQRT_H = lambda n: n ** -0.5


def test_single_point_example():
    ev = poisson_statistic([[0.55]], 2, [0.5], 0.2, TOY, U01)
    assert b_n(2, 0.2) == pytest.approx(np.sqrt(0.8 * np.log(5)))
    assert ev.eta == 1
    assert ev.psi[0] == pytest.approx(0.9 / np.sqrt(0.8 * np.log(5)), abs=1e-12)
    assert ev.psi[0] == pytest.approx(0.79316, abs=1e-5)


def test_statistic_matches_enumeration():
    rng = np.random.default_rng(1)
    f = triangular()
    net = build_net({"kind": "intervals", "q": 6})
    for _ in range(10):
        z = rng.uniform(0.3, 0.7, size=1)
        h = float(rng.uniform(0.02, 0.3))
        pts = rng.uniform(0, 1, size=(int(rng.integers(0, 40)), 1))
        cen = centering_terms(f, net, z, h)
        fast = poisson_statistic(pts, 40, z, h, net, f, cen).psi
        slow = poisson_enum(pts, z, h, net.members, cen, f.pdf(z), 40) if len(pts) else np.zeros(6)
        assert np.allclose(fast, slow, atol=1e-12)


def test_empty_sum_is_zero():
    assert np.array_equal(poisson_statistic(np.empty((0, 1)), 5, [0.5], 0.2, TOY, U01).psi, [0.0])
    psi, eta = simulate(U01, 1, [0.5], 0.2, TOY, 500, 3)
    assert np.any(eta == 0)
    assert np.all(psi[eta == 0] == 0.0)


def test_determinism_and_prefix_stability():
    a, ea = simulate(U01, 200, [0.5], 0.1, TOY, 600, 11)
    b, eb = simulate(U01, 200, [0.5], 0.1, TOY, 600, 11)
    assert np.array_equal(a, b) and np.array_equal(ea, eb)
    c, _ = simulate(U01, 200, [0.5], 0.1, TOY, 300, 11)
    assert np.array_equal(a[:300], c)
    e1 = poissonized_process(U01, 200, [0.5], 0.1, TOY, seed=4, rep=2)
    e2 = poissonized_process(U01, 200, [0.5], 0.1, TOY, seed=4, rep=2)
    assert np.array_equal(e1.psi, e2.psi) and e1.eta == e2.eta


def test_mean_zero():
    net = build_net({"kind": "intervals", "q": 4})
    reps = 10 ** 4
    psi, _ = simulate(triangular(), 1000, [0.5], 0.05, net, reps, 21)
    x = psi[:, 0, :]
    se = x.std(axis=0, ddof=1) / np.sqrt(reps)
    assert np.all(np.abs(x.mean(axis=0)) <= 4 * se)


def test_errors():
    with pytest.raises(ValueError, match="f\\(z\\) = 0"):
        poissonized_process(U01, 10, [1.5], 0.2, TOY, 0)
    with pytest.raises(ValueError):
        poissonized_process(U01, 10, [0.5], 0.2, TOY, 0, method="magic")
    with pytest.raises(ValueError):
        simulate(U01, 10, [0.5], 1.2, TOY, 10, 0)


def test_window_and_direct_agree_in_law():
    K = 1500
    w = np.array([poissonized_process(U01, 150, [0.5], 0.1, TOY, 7, r).psi[0] for r in range(K)])
    d = np.array([poissonized_process(U01, 150, [0.5], 0.1, TOY, 8, r, method="direct").psi[0]
                  for r in range(K)])
    assert stats.ks_2samp(w, d).pvalue > 1e-3
    assert abs(w.var() / d.var() - 1) < 0.15


def test_covariance_zero_net():
    out = covariance_check(U01, 1000, [0.5], 0.05, FunctionNet([zero_function(1)]), 1000, 0)
    assert out["max_deviation"] == 0.0


def test_covariance_example():
    net = build_net({"kind": "intervals", "q": 2})
    out = covariance_check(U01, 10 ** 4, [0.5], 0.01, net, 2 * 10 ** 4, 5)
    assert out["max_deviation"] <= 0.05 + 4 * out["stderr_at_max"]


def test_covariance_stderr_scaling():
    net = build_net({"kind": "intervals", "q": 2})
    small = covariance_check(U01, 10 ** 4, [0.5], 0.01, net, 5000, 6)["max_stderr"]
    big = covariance_check(U01, 10 ** 4, [0.5], 0.01, net, 20000, 6)["max_stderr"]
    # quadrupling reps halves the standard error
    assert big / small == pytest.approx(0.5, rel=0.2)


def test_covariance_bias_shrinks_with_h():
    net = build_net({"kind": "intervals", "q": 2})
    # same n*h, same reps: the O(h) bias term dominates the change
    coarse = covariance_check(U01, 1000, [0.5], 0.1, net, 20000, 9)["max_deviation"]
    fine = covariance_check(U01, 5000, [0.5], 0.02, net, 20000, 9)["max_deviation"]
    assert fine < coarse


def test_exact_covariance_matches_formula():
    net = build_net({"kind": "intervals", "q": 2})
    h = 0.05
    # uniform f: cov(Pi) = (int g g' - h int g int g') / (2 log(1/h))
    G = net.gram
    m = np.array([0.5, 1.0])
    want = (G - h * np.outer(m, m)) / (2 * np.log(1 / h))
    assert np.allclose(exact_covariance(U01, net, [0.5], h), want, atol=1e-9)


def test_window_condition_and_refusal():
    assert window_condition(U01, [[0.5]], 0.2) == pytest.approx(0.2)
    with pytest.raises(ConditionError) as err:
        fact6_check(U01, 50, [[0.2], [0.5], [0.8]], 0.2, TOY, [(-np.inf, np.inf)], 100, 0)
    assert err.value.value == pytest.approx(0.6)


def test_fact6_examples():
    net = build_net({"kind": "intervals", "q": 3})
    rep = fact6_check(U01, 50, [[0.5]], 0.2, net, [(-np.inf, np.inf), (-1.0, 1.0)], 2 * 10 ** 4, 1)
    whole, box = rep["events"]
    assert whole["p_L"] == 1.0 and whole["p_Pi"] == 1.0 and whole["holds"]
    assert box["holds"] and rep["holds"]


def test_ks_helpers():
    assert ks_distance(np.zeros(10), np.zeros(20)) == 0.0
    a = stream_rng(1, 0, 0).normal(size=4000)
    b = stream_rng(1, 1, 0).normal(size=4000)
    assert ks_distance(a, b) < 1.628 * np.sqrt(2 / 4000)


def test_gaussian_degenerate_member():
    net = FunctionNet([zero_function(1), RectIndicator([-0.5], [0.0])])
    out = gaussian_compare(U01, [1000], [0.5], SQRT_H, net, 1000, 2)
    assert out[0]["ks"][0] == 0.0


def test_gaussian_trend():
    net = build_net({"kind": "intervals", "q": 2})
    grid = [10 ** 2, 10 ** 3, 10 ** 4]
    # enough replications that the KS noise floor sits below the signal at n = 10^4
    res = np.array([[r["max_ks"] for r in gaussian_compare(U01, grid, [0.5], SQRT_H, net, 20000, s)]
                    for s in range(5)])
    med = np.median(res, axis=0)
    assert med[0] >= med[1] >= med[2]


def test_ldp_examples():
    net = FunctionNet([RectIndicator([-0.5], [0.5])])
    zero = ldp_tail_rate(U01, [100], [0.5], SQRT_H, net, 0.0, 100, 0)[0]
    assert zero["value"] == 0.0 and zero["theoretical"] == 0.0
    out = ldp_tail_rate(U01, [100], [0.5], SQRT_H, net, 1.0, 2000, 0)[0]
    assert out["theoretical"] == -0.5
    assert eps_n(0.1) == pytest.approx(1 / (2 * np.log(10)))
    huge = ldp_tail_rate(U01, [100], [0.5], SQRT_H, net, 50.0, 200, 0)[0]
    assert huge["hits"] == 0 and huge["bound"]
