import numpy as np
import pytest

from artifact import geometry as geo
from artifact.geometry import AxisymSurface, ParamMap, Target

SPHERE = geo.spheroid(1.0, 1.0)
X2 = Target(2.0, 0.0, 0.0)


def test_surface_points():
    assert np.allclose(geo.surface_point(SPHERE, np.pi / 2, 0.0), [1, 0, 0])
    assert np.allclose(geo.surface_point(geo.spheroid(1, 3), 0.0, 1.7), [0, 0, 3])
    assert np.allclose(geo.surface_point(geo.spheroid(1, 2), np.pi / 2, np.pi / 2), [0, 1, 0], atol=1e-15)


@pytest.mark.parametrize("curve", [SPHERE, geo.spheroid(1.0, 2.0)])
def test_equatorial_normal(curve):
    for phi in (0.0, 0.7, 2.5):
        n, J = geo.normal_and_jacobian(curve, np.pi / 2, phi)
        assert np.allclose(n, [np.cos(phi), np.sin(phi), 0.0], atol=1e-15)
    n, J = geo.normal_and_jacobian(SPHERE, np.pi / 4, 0.3)
    assert J == pytest.approx(np.sin(np.pi / 4))


def test_jacobian_integrates_to_area():
    # prolate spheroid a=1, b=2: area = 2 pi a^2 (1 + b/(a e) asin e)
    a, b = 1.0, 2.0
    e = np.sqrt(1 - a * a / (b * b))
    exact = 2 * np.pi * a * a * (1 + b / (a * e) * np.arcsin(e))
    surf = AxisymSurface(geo.spheroid(a, b), n_t=40, n_phi=8)
    th, wt = surf.theta_nodes()
    _, J = geo.normal_and_jacobian(surf.curve, th, 0.0)
    assert 2 * np.pi * np.sum(wt * J) == pytest.approx(exact, rel=1e-13)


def test_distance_functions_unit_sphere():
    assert geo.r2(SPHERE, np.pi / 2, 0.0, X2) == pytest.approx(1.0)
    assert abs(geo.r2(SPHERE, np.pi / 2, 1j * np.log(2), X2)) < 1e-14
    assert geo.lambda_fn(SPHERE, np.pi / 2, X2) == pytest.approx(2.5)
    assert geo.lambda_fn(SPHERE, 0.0, Target(0, 0, 2.0)) == pytest.approx(0.5)
    assert geo.r2_lambda(SPHERE, np.pi / 2, X2) == pytest.approx(1.0)
    assert geo.l_sq(SPHERE, np.pi / 2, X2) == pytest.approx(0.5)


def test_on_surface_zero():
    c = geo.spheroid(1.0, 3.0)
    p = geo.surface_point(c, 0.8, 1.1)
    t = Target.at(p)
    assert abs(geo.r2(c, 0.8, 1.1, t)) < 1e-14
    assert abs(geo.r2_lambda(c, 0.8, t)) < 1e-14


def test_l_sq_axis_limit():
    t = Target(0.0, 0.0, 2.5)
    th = np.linspace(0.1, 3.0, 7)
    lam = geo.lambda_fn(SPHERE, th, t)
    assert np.allclose(geo.l_sq(SPHERE, th, t), (2 * lam) ** -0.5)


def test_quotient_identity_definition():
    # |e^{i phi} - e^{i phi0}|^2 / R^2 = 1 / (a (lambda + sqrt(disc)))
    c = geo.trig_curve(0.3, 2)
    t = Target(0.4, -0.9, 0.3)
    th = 1.2
    from artifact import roots as rt
    phi0 = rt.phi0_analytic(c, th, t).value
    ph = np.linspace(0, 2 * np.pi, 17)
    q = np.abs(np.exp(1j * ph) - np.exp(1j * phi0)) ** 2 / geo.r2(c, th, ph, t)
    ref = 1 / (c.a(th) * (geo.lambda_fn(c, th, t) + np.sqrt(geo.disc(c, th, t))))
    assert np.allclose(q, ref, rtol=1e-13)


def test_param_maps():
    full = ParamMap(0.0, np.pi)
    assert geo.map_t_to_theta(full, 0.0) == pytest.approx(np.pi / 2)
    assert geo.map_theta_to_t(full, np.pi) == pytest.approx(1.0)
    assert geo.map_t_to_theta(ParamMap(1.0, 2.0), 0.5) == pytest.approx(1.75)


def test_surface_validation():
    with pytest.raises(ValueError):
        geo.spheroid(-1.0, 1.0)
    with pytest.raises(ValueError):
        AxisymSurface(SPHERE, panels=((0.0, 1.0), (1.2, np.pi)))
    with pytest.raises(ValueError):
        geo.trig_curve(1.2)
    s = AxisymSurface(SPHERE, panels=((0.0, 1.0), (1.0, np.pi)), n_t=8)
    th, w = s.theta_nodes()
    assert th.size == 16 and np.sum(w) == pytest.approx(np.pi)
