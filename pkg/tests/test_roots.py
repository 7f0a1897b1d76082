import numpy as np
import pytest

from artifact import geometry as geo
from artifact import roots as rt
from artifact.geometry import ParamMap, Target

SPHERE = geo.spheroid(1.0, 1.0)


def test_phi0_sphere_equator():
    r = rt.phi0_analytic(SPHERE, np.pi / 2, Target(2.0, 0.0, 0.0))
    assert r.value == pytest.approx(1j * np.log(2), abs=1e-15)
    r2 = rt.phi0_analytic(SPHERE, np.pi / 2, Target(0.0, 2.0, 0.0))
    assert r2.value.real == pytest.approx(np.pi / 2)
    assert r2.value.imag == pytest.approx(np.log(2))


def test_phi0_axis_raises():
    with pytest.raises(rt.AxisTargetError):
        rt.phi0_analytic(SPHERE, 1.0, Target(0.0, 0.0, 2.0))


def test_theta0_spheroid_known():
    for t in (Target(2.0, 0.0, 0.0), Target(0.0, 2.0, 0.0)):
        r = rt.theta0_spheroid(1.0, 1.0, t)
        assert r.value == pytest.approx(np.pi / 2 + 1j * np.log(2), abs=1e-14)
    r = rt.theta0_spheroid(1.0, 2.0, Target(1.5, 0.0, 0.3))
    assert r.residual <= 1e-12
    assert abs(geo.r2_lambda(geo.spheroid(1, 2), np.conj(r.value), Target(1.5, 0.0, 0.3))) < 1e-12


def test_quartic_root_and_newton_agree():
    t = Target(2.0, 0.0, 1.0)
    q = rt.theta0_of_r2_spheroid(1.0, 3.0, t, 0.0, theta_star=1.2)
    c = geo.spheroid(1.0, 3.0)
    assert abs(geo.r2(c, q.value, 0.0, t)) <= 1e-10
    assert abs(geo.r2(c, np.conj(q.value), 0.0, t)) <= 1e-10
    n = rt.newton_root(lambda th: geo.r2(c, th, 0.0, t), lambda th: rt._dr2_dtheta(c, th, 0.0, t),
                       complex(1.2, 0.1))
    assert n.converged
    assert n.value == pytest.approx(q.value, abs=1e-10)


def test_quartic_excluded_azimuth():
    with pytest.raises(ValueError):
        rt.theta0_of_r2_spheroid(1.0, 3.0, Target(2.0, 0.0, 0.0), np.pi / 2)


def test_newton_contract():
    t = Target(2.0, 0.0, 0.0)
    r = rt.newton_root(lambda th: geo.r2_lambda(SPHERE, th, t), lambda th: geo.dr2_lambda(SPHERE, th, t),
                       complex(np.pi / 2, 0.1))
    assert r.converged and r.method == "newton" and r.iterations <= 10
    assert r.value == pytest.approx(np.pi / 2 + 1j * np.log(2), abs=1e-10)
    q = rt.newton_root(lambda z: z * z + 1, lambda z: 2 * z, 0.3 + 0.8j)
    assert q.value == pytest.approx(1j, abs=1e-12)
    bad = rt.newton_root(lambda z: z * z + 1, lambda z: 2 * z, 0.5 + 0.0j)  # stays on the real line
    assert not bad.converged and bad.iterations == 50


def test_nearest_root_in_t():
    th0 = np.pi / 2 + 1j * np.log(2)
    t0 = rt.nearest_root_in_t(geo.FULL, [th0])
    assert t0 == pytest.approx(1j * 2 * np.log(2) / np.pi)
    assert rt.nearest_root_in_t(ParamMap(1.0, 2.0), [1.5]) == pytest.approx(0.0)
    pm = ParamMap(1.0, 2.0)
    assert rt.nearest_root(pm, [1.5 + 0.4j, 1.5 + 0.1j]) == pytest.approx(1.5 + 0.1j)


def test_newton_matches_analytic_spheroid():
    rng = np.random.default_rng(3)
    surf = geo.AxisymSurface(geo.spheroid(1.0, 3.0))
    agree = 0
    for _ in range(40):
        th, ph = rng.uniform(0.2, np.pi - 0.2), rng.uniform(0, 2 * np.pi)
        n, _ = geo.normal_and_jacobian(surf.curve, th, ph)
        t = surf.target(geo.surface_point(surf.curve, th, ph) + rng.uniform(0.01, 0.5) * n)
        a = rt.theta0_spheroid(1.0, 3.0, t).value
        b = rt.theta0_lambda_newton(surf.curve, t, geo.nearest_grid_theta(surf, t))
        agree += int(b.converged and abs(a - b.value) <= 1e-10)
    assert agree >= 0.95 * 40
