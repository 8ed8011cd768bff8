import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from localep._quadrature import integrate_1d
from localep.densities import (eval_density, make_density, product_of_1d, sample,
                               smoothed_density, triangular, truncated_gaussian_mixture,
                               uniform_box)
from localep.function_classes import (EllipsoidIndicator, ProductKernel, RadialKernel,
                                      RectIndicator, zero_function)


def shipped():
    return {
        "uniform": uniform_box([0.0], [1.0]),
        "triangular": triangular(0.0, 0.5, 1.0),
        "mixture": truncated_gaussian_mixture([0.3, 0.7], [0.1, 0.15], [0.4, 0.6]),
        "product": product_of_1d([{"kind": "uniform", "low": 0.0, "high": 1.0},
                                  {"kind": "triangular", "low": 0.0, "peak": 0.5, "high": 1.0}]),
    }


def test_eval_examples():
    u = uniform_box([0.0], [1.0])
    assert eval_density(u, [0.5]) == 1.0
    assert eval_density(u, [1.5]) == 0.0
    assert eval_density(triangular(0.0, 0.5, 1.0), [0.25]) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("name", ["uniform", "triangular", "mixture"])
def test_integrates_to_one(name):
    f = shipped()[name]
    c = f.components[0]
    total = integrate_1d(lambda x: f.pdf(x[:, None]), c.lo, c.hi, c.breaks, tol=1e-10)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_product_integrates_to_one():
    f = shipped()["product"]
    x = np.linspace(0, 1, 801)
    X, Y = np.meshgrid(x, x, indexing="ij")
    vals = f.pdf(np.stack([X.ravel(), Y.ravel()], axis=1)).reshape(X.shape)
    assert trapezoid(trapezoid(vals, x, axis=1), x) == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("name", list(shipped()))
def test_positive_on_J_gamma(name):
    f = shipped()[name]
    lo, hi = f.J_lo - f.margin_gamma, f.J_hi + f.margin_gamma
    axes = [np.linspace(a, b, 301) for a, b in zip(lo, hi)]
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    assert np.all(f.pdf(pts) > 0)


def test_construction_errors():
    with pytest.raises(ValueError):
        truncated_gaussian_mixture([0.5], [-0.1], [1.0])
    with pytest.raises(ValueError):
        truncated_gaussian_mixture([0.3, 0.7], [0.1, 0.1], [0.5, 0.6])
    with pytest.raises(ValueError):
        triangular(0.0, 0.5, 1.0, region_J=([0.0], [1.0]))  # f vanishes at the ends
    with pytest.raises(ValueError):
        make_density({"kind": "uniform-box", "low": [0], "high": [1], "colour": "red"})
    with pytest.raises(ValueError):
        make_density({"kind": "cauchy"})


def test_sample_basic():
    u = uniform_box([0.0], [1.0])
    assert sample(u, 0, 3).n == 0
    a, b = sample(u, 1000, 42), sample(u, 1000, 42)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, sample(u, 1000, 43).points)
    assert not np.array_equal(a.points, u.sample(1000, 42, rep=1).points)


def test_sample_mean_clt():
    s = sample(uniform_box([0.0], [1.0]), 10 ** 5, 7)
    sigma = np.sqrt(1 / 12)
    assert abs(s.points.mean() - 0.5) <= 4 * sigma / np.sqrt(10 ** 5)


@pytest.mark.parametrize("name", ["uniform", "triangular", "mixture"])
def test_dkw_band(name):
    f = shipped()[name]
    n, alpha = 10 ** 5, 1e-6
    x = np.sort(f.sample(n, 11).points[:, 0])
    assert np.all((x >= f.support_lo[0]) & (x <= f.support_hi[0]))
    F = f.components[0].cdf(x)
    i = np.arange(1, n + 1)
    gap = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    assert gap <= np.sqrt(np.log(2 / alpha) / (2 * n))


def test_conditional_draw_stays_in_box():
    f = shipped()["mixture"]
    rng = np.random.default_rng(0)
    pts = f.draw(5000, rng, np.array([0.45]), np.array([0.55]))
    assert pts.min() >= 0.45 and pts.max() <= 0.55
    c = f.components[0]
    F = (c.cdf(np.sort(pts[:, 0])) - c.cdf(0.45)) / (c.cdf(0.55) - c.cdf(0.45))
    i = np.arange(1, 5001)
    assert np.max(np.abs(F - i / 5000)) < np.sqrt(np.log(2 / 1e-6) / 10000)


def test_smoothed_examples():
    u = uniform_box([0.0], [1.0])
    H = RectIndicator([-0.5], [0.5])
    assert smoothed_density(u, H, 0.2, [0.5]) == pytest.approx(1.0, abs=1e-12)
    assert smoothed_density(u, H, 0.2, [0.05]) == pytest.approx(0.75, abs=1e-12)
    assert smoothed_density(u, zero_function(1), 0.2, [0.5]) == 0.0


@pytest.mark.parametrize("name", ["uniform", "triangular", "mixture"])
def test_smoothing_converges(name):
    f = shipped()[name]
    K = ProductKernel("epanechnikov", 1)
    z = [0.42]
    err = [abs(smoothed_density(f, K, h, z) - f.pdf(z)) for h in (0.2, 0.05, 0.0125)]
    assert err[0] >= err[1] - 1e-12 and err[1] >= err[2] - 1e-12


def test_smoothing_matches_quadrature_oracle():
    # brute-force Riemann sum of h^{-1} int f(x) K((z - x)/h) dx
    f = shipped()["mixture"]
    K = ProductKernel("epanechnikov", 1)
    h, z = 0.1, 0.37
    x = np.linspace(z - h / 2, z + h / 2, 200001)
    vals = f.pdf(x[:, None]) * K((z - x[:, None]) / h)
    oracle = trapezoid(vals, x) / h
    assert smoothed_density(f, K, h, [z]) == pytest.approx(oracle, abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1, 2, allow_nan=False))
def test_pdf_nonnegative(x):
    for f in list(shipped().values())[:3]:
        assert f.pdf([x]) >= 0.0


def test_flat_window_closed_form_matches_quadrature(monkeypatch):
    f = uniform_box([0, 0], [1, 1])
    members = (EllipsoidIndicator([0.1, -0.05], [[9, 2], [2, 16]]),
               RadialKernel([[1.2, 0.2], [0.2, 2.0]], scale=0.7))
    for g in members:
        fast = smoothed_density(f, g, 0.1, [0.5, 0.4])
        monkeypatch.setattr(type(g), "integral", lambda self: None)
        assert fast == pytest.approx(smoothed_density(f, g, 0.1, [0.5, 0.4]), abs=1e-9)
