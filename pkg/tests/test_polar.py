import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from artifact import engine as en
from artifact import geometry as geo
from artifact import polar as po
from artifact import special as sp


def test_gl_panel():
    x, w = leggauss(8)
    assert po.gl_panel(np.ones(8), w, 0.7) == pytest.approx(1.4)
    assert po.gl_panel(x ** 15 + x ** 14, w, 1.0) == pytest.approx(2 / 15, rel=1e-14)


def test_bjorck_pereyra_vs_solve():
    x = leggauss(16)[0]
    b = np.random.default_rng(0).normal(size=16)
    V = np.vander(x, increasing=True).T
    assert np.allclose(po.bjorck_pereyra(x, b), np.linalg.solve(V, b), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("p", [1.5, 2.5])
@pytest.mark.parametrize("t0", [0.2 + 0.01j, -0.7 + 0.1j, 1.3 + 0.05j])
def test_ssq_polynomial_exact(p, t0):
    n = 16
    x, _ = leggauss(n)
    c = np.random.default_rng(1).normal(size=n)
    h = np.polynomial.polynomial.polyval(x, c)
    got = po.ssq_panel(h, x, t0, p, 1.0)
    f = lambda t: np.polynomial.polynomial.polyval(t, c) / abs(t - t0) ** (2 * p - 1)
    pts = [t0.real] if abs(t0.real) < 1 else None
    ref = quad(f, -1, 1, points=pts, epsabs=0, epsrel=1e-13, limit=400)[0]
    aref = quad(lambda t: abs(f(t)), -1, 1, points=pts, epsabs=0, epsrel=1e-10, limit=400)[0]
    assert abs(got - ref) <= 1e-11 * aref


def test_ssq_single_node_and_scaling():
    t0 = 0.1 + 0.3j
    got = po.ssq_panel(np.array([2.0]), np.array([0.0]), t0, 1.5, 0.5)
    assert got == pytest.approx(0.5 ** (2 - 3) * 2.0 * sp.nu_initial(1.5, t0)[0])


def test_ssq_even_symmetry():
    x = leggauss(8)[0]
    w = po.ssq_weights(x, 0.4j, 2.5)
    assert np.allclose(w, w[::-1], rtol=1e-12)


def test_barycentric():
    x = leggauss(40)[0]
    c = np.random.default_rng(2).normal(size=20)
    xq = np.linspace(-1, 1, 101)
    v = np.polynomial.polynomial.polyval(x, c)
    assert np.allclose(po.barycentric_interpolate(x, v, xq), np.polynomial.polynomial.polyval(xq, c),
                       atol=1e-13 * np.sum(np.abs(c)))
    assert po.barycentric_interpolate(x, v, x[[3]])[0] == v[3]
    pm = geo.ParamMap(0.0, np.pi)
    th = geo.map_t_to_theta(pm, x)
    err = po.interpolate_density(x, np.sin(5 * th), xq) - np.sin(5 * geo.map_t_to_theta(pm, xq))
    assert np.max(np.abs(err)) < 1e-12


def test_subdivide_properties():
    t0 = 0.1 + 0.01j
    est = lambda a, b: (b - a) ** 12 / max(abs(t0.imag), 1e-30) * 1e-2
    part = po.subdivide(t0, 1e-8, 16, 1.5, est, None)
    part.check()
    assert part.panels[0].ta == -1.0 and part.panels[-1].tb == 1.0
    assert sum(P.eps for P in part.panels) <= 1e-8 * (1 + 1e-12)
    c = part.panels[part.center]
    assert c.ta < t0.real < c.tb and c.method == "SSQ"
    single = po.subdivide(5.0j, 1e-8, 16, 0.5, lambda a, b: 1e-12, None)
    assert len(single) == 1 and single.panels[0].method == "GL"


def test_dtmax_bracketing():
    theta0 = 1.0 + 0.01j
    est = lambda L: 1e-3 * (L / 0.05) ** 20
    L, info = po.dtmax_solve(est, theta0, 1e-8, 0.5)
    assert est(L) <= 1e-8 <= est(1.05 * L)


def _s3_target(d, theta=0.6, phi=10 * np.pi / 11):
    surf = geo.AxisymSurface(geo.spheroid(1.0, 3.0))
    n, _ = geo.normal_and_jacobian(surf.curve, theta, phi)
    return surf, surf.target(geo.surface_point(surf.curve, theta, phi) + d * n)


@pytest.mark.parametrize("kern", [en.LAPLACE_SLP, en.LAPLACE_DLP])
def test_integrate_base_panel_meets_tolerance(kern):
    surf, tg = _s3_target(1e-3)
    eps = 1e-8
    th0 = en._theta0(surf, tg)
    num = kern.numerator(surf.curve, en.fig1_density, tg)
    res = po.integrate_base_panel(surf, num, tg, geo.FULL, th0, kern.p, eps, 16)
    ref = en.reduced_oracle(surf, en.fig1_density, kern, tg)[0]
    assert abs(res.value[0] - ref) <= 10 * eps
    assert len(res.partition) <= 30


def test_h_eval_finite_at_root():
    from artifact import azimuthal as az
    surf, tg = _s3_target(1e-3)
    th0 = en._theta0(surf, tg)
    num = en.LAPLACE_DLP.numerator(surf.curve, en.fig1_density, tg)
    th = np.array([th0.real - 1e-3, th0.real, th0.real + 1e-3])
    red = az.reduce(surf, num, tg, th, 1.5)
    h = po.h_eval(red, th0, 1.5)
    assert np.all(np.isfinite(h)) and np.isrealobj(h)
    assert np.max(np.abs(h)) < 100 * np.min(np.abs(h)) + 1e-300
