import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, trapezoid

from localep.function_classes import (AffineCombo, EllipsoidIndicator, FunctionNet, ProductKernel,
                                      RadialKernel, RectIndicator, build_net, evaluate, gram_matrix,
                                      inner_product, kernel_norm_sq, l2_distance, zero_function)


def test_evaluate_examples():
    r = RectIndicator([-0.5, -0.5], [0.0, 0.0])
    assert evaluate(r, [-0.25, -0.25]) == 1.0
    assert evaluate(r, [0.75, 0.0]) == 0.0
    K = ProductKernel("epanechnikov", 1)
    assert evaluate(K, [0.0]) == 1.5
    assert evaluate(ProductKernel("epanechnikov", 2), [0.75, 0.0]) == 0.0


def test_inner_product_examples():
    a = RectIndicator([-0.5, -0.5], [0.0, 0.0])
    b = RectIndicator([-0.25, -0.25], [0.25, 0.25])
    assert inner_product(a, b) == pytest.approx(0.0625, abs=1e-15)
    K = ProductKernel("epanechnikov", 1)
    assert inner_product(K, K) == pytest.approx(1.2, abs=1e-12)
    c = RectIndicator([0.1, 0.1], [0.5, 0.5])
    assert inner_product(a, c) == 0.0


def test_l2_distance_examples():
    a = RectIndicator([-0.5, -0.5], [0.0, 0.0])
    b = RectIndicator([0.0, 0.0], [0.5, 0.5])
    assert l2_distance(a, a) == 0.0
    assert l2_distance(a, b) == pytest.approx(np.sqrt(0.5), abs=1e-12)
    cube = ([0.0], [1.0])
    t, u = 0.3, 0.75
    assert l2_distance(RectIndicator([0], [t], cube), RectIndicator([0], [u], cube)) == \
        pytest.approx(np.sqrt(u - t), abs=1e-12)


def test_gram_examples():
    cube = ([0.0], [1.0])
    G = gram_matrix([RectIndicator([0], [0.5], cube), RectIndicator([0], [1.0], cube)])
    assert np.allclose(G, [[0.5, 0.5], [0.5, 1.0]], atol=1e-15)
    K = ProductKernel("epanechnikov", 1)
    assert gram_matrix([K])[0, 0] == pytest.approx(1.2, abs=1e-12)
    G = gram_matrix([K, K, ProductKernel("uniform", 1)])
    assert abs(np.linalg.eigvalsh(G)[0]) < 1e-10


def test_mixed_gram_matches_quad():
    K = ProductKernel("epanechnikov", 1)
    r = RectIndicator([-0.1], [0.4])
    oracle = quad(lambda t: K(np.array([[t]]))[0], -0.1, 0.4, epsabs=1e-13)[0]
    assert inner_product(K, r) == pytest.approx(oracle, abs=1e-10)


def test_ellipse_and_radial_inner_products():
    e = EllipsoidIndicator([0.0, 0.0], np.eye(2) * 16.0)  # radius 1/4
    assert inner_product(e, e) == pytest.approx(np.pi / 16, abs=1e-9)
    R = RadialKernel(np.eye(2))
    # grid oracle for int R^2 over the disk of radius 1/2
    x = np.linspace(-0.5, 0.5, 2001)
    X, Y = np.meshgrid(x, x, indexing="ij")
    vals = R(np.stack([X.ravel(), Y.ravel()], 1)).reshape(X.shape) ** 2
    assert inner_product(R, R) == pytest.approx(trapezoid(trapezoid(vals, x), x), abs=1e-5)


def test_kernel_norms():
    assert kernel_norm_sq(ProductKernel("uniform", 1)) == pytest.approx(1.0)
    assert kernel_norm_sq(ProductKernel("epanechnikov", 1)) == pytest.approx(1.2)
    assert kernel_norm_sq(ProductKernel("epanechnikov", 2)) == pytest.approx(1.44)


def test_build_net_examples():
    net = build_net({"kind": "intervals"}, mesh_delta=0.1)
    assert net.q == 100
    levels = np.array([g.hi[0] for g in net.members])
    assert np.allclose(levels, np.arange(1, 101) / 100)
    assert build_net({"kind": "kernel"}).q == 1
    with pytest.raises(ValueError):
        build_net({"kind": "polygons"})


def test_rectangle_net_covers():
    net = build_net({"kind": "rectangles", "d": 2}, mesh_delta=0.25)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(10 ** 4):
        c = np.sort(rng.uniform(-0.5, 0.5, size=(2, 2)), axis=0)
        k = net.nearest(c[0], c[1])
        a, b = net.lo[k], net.hi[k]
        va = np.prod(c[1] - c[0])
        vb = np.prod(np.clip(b - a, 0, None))
        vab = np.prod(np.clip(np.minimum(c[1], b) - np.maximum(c[0], a), 0, None))
        worst = max(worst, np.sqrt(max(va + vb - 2 * vab, 0.0)))
    assert worst <= 0.25


@pytest.mark.parametrize("spec", [{"kind": "intervals", "q": 12},
                                  {"kind": "anchored-rectangles", "d": 2},
                                  {"kind": "anchored-intervals", "q": 5}])
def test_cauchy_schwarz_and_psd(spec):
    G = build_net(spec).gram
    assert np.allclose(G, G.T)
    assert np.linalg.eigvalsh(G)[0] > -1e-12
    dg = np.sqrt(np.diag(G))
    assert np.all(np.abs(G) <= np.outer(dg, dg) + 1e-12)


def _members_2d():
    return [RectIndicator([-0.3, -0.1], [0.2, 0.4]),
            EllipsoidIndicator([0.1, -0.1], [[30.0, 5.0], [5.0, 20.0]]),
            ProductKernel("biweight", 2),
            ProductKernel(["epanechnikov", "triangular"], 2),
            RadialKernel([[1.2, 0.2], [0.2, 2.0]])]


def test_bounds_and_support():
    rng = np.random.default_rng(3)
    for g in _members_2d():
        x = rng.uniform(-0.5, 0.5, size=(20000, 2))
        assert np.all(np.abs(g(x)) <= g.bound_kappa + 1e-12)
        # probe just outside every face of the cube
        edge = rng.uniform(-0.5, 0.5, size=(2000, 2))
        for j in range(2):
            for s in (-1, 1):
                y = edge.copy()
                y[:, j] = s * (0.5 + 1e-9)
                assert np.all(g(y) == 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.floats(1.0, 4.0), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3),
       st.integers(0, 10 ** 6))
def test_transform_consistent(k, lam, z0, z1, seed):
    g = _members_2d()[k]
    z = np.array([z0, z1])
    t = g.transformed(z, lam)
    x = np.random.default_rng(seed).uniform(-0.6, 0.6, size=(200, 2))
    assert np.allclose(t(x), g(z - lam * x))


def test_affine_combo_and_zero():
    a = RectIndicator([-0.5], [0.0])
    b = RectIndicator([-0.25], [0.25])
    c = AffineCombo([(2.0, a), (-1.0, b)])
    assert inner_product(c, c) == pytest.approx(4 * 0.5 - 4 * 0.25 + 0.5)
    assert inner_product(zero_function(1), a) == 0.0


def test_net_dump_roundtrip(tmp_path):
    net = build_net({"kind": "anchored-rectangles", "d": 2})
    p = tmp_path / "net.json"
    net.dump(p)
    back = FunctionNet.load(p)
    assert back.q == net.q
    assert np.array_equal(back.gram, net.gram)
