import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from artifact import estimates as es
from artifact import geometry as geo
from artifact import roots as rt
from artifact import targets as tgs
from artifact.geometry import ParamMap, Target
from artifact.validation import measured_errors

SPHERE = geo.spheroid(1.0, 1.0)
PM = ParamMap(1.0, 2.14)


def test_xi_and_radius():
    assert es.xi(1.0) == pytest.approx(1.0)
    assert abs(es.xi(0.3)) == pytest.approx(1.0)
    assert es.xi(1j) == pytest.approx(1j * (1 + np.sqrt(2)))
    assert es.bernstein_radius(1j) == pytest.approx(2.41421356237, rel=1e-11)


def test_branch_cut():
    t0 = 0.3 + 0.4j
    g, dg = es.branch_cut(t0, [1.0, 1e6])
    assert g[0] == pytest.approx(t0)
    assert abs(g[1]) > 1e5
    # derivative by finite differences
    h = 1e-6
    gp, _ = es.branch_cut(t0, [2.0 + h])
    gm, _ = es.branch_cut(t0, [2.0 - h])
    _, d2 = es.branch_cut(t0, [2.0])
    assert (gp[0] - gm[0]) / (2 * h) == pytest.approx(d2[0], rel=1e-7)


def test_truncation_point():
    assert es.truncation_point(65) == pytest.approx(10 ** (10 / 65))
    assert es.truncation_point(65, 1.0) == 1.0
    assert es.truncation_point(33) > es.truncation_point(65)
    with pytest.raises(ValueError):
        es.truncation_point(0)


def test_node_polynomial():
    x = np.array([-1, 1]) / np.sqrt(3)
    ell, w = es.node_polynomial_and_weights(x)
    assert ell(0.0) == pytest.approx(-1 / 3)
    x16 = leggauss(16)[0]
    ell, _ = es.node_polynomial_and_weights(x16)
    assert np.max(np.abs(ell(x16))) < 1e-15
    z = 7.0 + 5.0j
    assert abs(ell(z)) == pytest.approx(abs(es.xi(z)) ** 16 / 2 ** 16, rel=0.1)
    with pytest.raises(ValueError):
        es.node_polynomial_and_weights([0.1, 0.1])


def test_geometry_factor():
    w, c = 0.2 + 0.5j, 1.7
    R = lambda t: c * (t - w) * (t - np.conj(w))
    dR = lambda t: c * (2 * t - w - np.conj(w))
    assert es.geometry_factor(dR, w) == pytest.approx(1 / (c * (w - np.conj(w))))
    assert (1e-9) / R(w + 1e-9) == pytest.approx(es.geometry_factor(dR, w), rel=1e-8)
    with pytest.raises(ZeroDivisionError):
        es.geometry_factor(lambda t: 0.0, w)


def _target(rad, ang=np.pi / 2):
    z0 = rad * np.exp(1j * ang)
    th0 = geo.map_t_to_theta(PM, 0.5 * (z0 + 1 / z0))
    tg = Target.at(tgs.theta_root_target(1.0, 1.0, th0), 2.0)
    return tg, rt.theta0_spheroid(1.0, 1.0, tg, PM).value


@pytest.mark.parametrize("rad", [1.1, 1.5, 2.5])
def test_estimates_track_measured(rad):
    tg, th0 = _target(rad, 1.2)
    eq, _ = measured_errors(SPHERE, tg, PM, 8, th0)
    _, ei = measured_errors(SPHERE, tg, PM, 16, th0)
    q = es.quad_estimate_lsq(SPHERE, tg, 8, PM.theta_a, PM.theta_b, th0).value
    i = es.interp_estimate_lsq(SPHERE, tg, 16, PM.theta_a, PM.theta_b, th0).value
    assert 1e-1 <= eq / q <= 10
    assert 1e-1 <= ei / i <= 10


def test_estimate_decay_rates():
    tg, th0 = _target(2.0)
    q = [es.quad_estimate_lsq(SPHERE, tg, n, PM.theta_a, PM.theta_b, th0).value for n in (8, 12)]
    i = [es.interp_estimate_lsq(SPHERE, tg, n, PM.theta_a, PM.theta_b, th0).value for n in (16, 24)]
    assert np.log(q[0] / q[1]) / 4 == pytest.approx(2 * np.log(2.0), rel=0.15)
    assert np.log(i[0] / i[1]) / 8 == pytest.approx(np.log(2.0), rel=0.15)
    far, th_far = _target(30.0)
    assert es.quad_estimate_lsq(SPHERE, far, 16, PM.theta_a, PM.theta_b, th_far).value < 1e-14


def test_log_quad_estimate():
    n, ta, tb = 8, 0.0, 1.0
    th0 = 0.4 + 0.02j
    x, w = leggauss(n)
    pm = ParamMap(ta, tb)
    f = lambda th: np.log(np.abs(th - th0) ** 2)
    ex = quad(f, ta, tb, points=[0.4], epsabs=0, epsrel=1e-13, limit=200)[0]
    meas = abs(pm.dtheta * np.sum(w * f(geo.map_t_to_theta(pm, x))) - ex)
    est = es.log_quad_estimate(n, ta, tb, th0)
    assert 0.1 <= meas / est <= 10


def test_regular_surface_estimate_far_target():
    from artifact import engine as en
    surf = geo.AxisymSurface(geo.spheroid(1.0, 1.5))
    tg = surf.target([0.0, 0.0, 40.0])
    assert en.gate_estimate(surf, en.fig1_density, en.LAPLACE_SLP, tg) < 1e-14
    tg = surf.target([6.0, 1.0, 2.0])
    assert en.gate_estimate(surf, en.fig1_density, en.LAPLACE_SLP, tg) < 1e-14
