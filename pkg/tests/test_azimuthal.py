import numpy as np
import pytest
from scipy.integrate import quad

from artifact import azimuthal as az
from artifact import engine as en
from artifact import geometry as geo
from artifact.geometry import AxisymSurface, Target


def test_fourier_coefficients():
    ph = 2 * np.pi * np.arange(40) / 40
    c = az.fourier_coefficients(np.full(40, 2.5))
    assert c[19] == pytest.approx(2.5) and np.max(np.abs(np.delete(c, 19))) < 1e-15
    c = az.fourier_coefficients(np.cos(3 * ph))
    assert c[19 + 3] == pytest.approx(0.5) and c[19 - 3] == pytest.approx(0.5)
    ph64 = 2 * np.pi * np.arange(64) / 64
    c = az.fourier_coefficients(np.exp(-np.cos(ph64) ** 2))
    k = np.abs(np.arange(-31, 32))
    assert np.max(np.abs(c[k >= 22])) < 1e-14
    assert np.max(np.abs(c[k == 10])) > 1e-8


def test_slp_numerator_on_sphere():
    surf = AxisymSurface(geo.spheroid(1.0, 1.0))
    num = en.LAPLACE_SLP.numerator(surf.curve, en.const_density(), Target(0.3, 0.0, 2.0))
    th = np.array([0.4, 1.3])
    f = az.f_assemble(surf, num, th)
    assert np.allclose(f[..., 0], np.sin(th)[:, None])


def test_single_mode_f_theta():
    from artifact import special as sp
    fhat = np.zeros((2, 1, 5))
    fhat[:, 0, 2] = 1.7
    r = np.array([0.3, 0.8])
    mu = sp.mu_table(1.5, r, 2).values
    F = az.f_theta(fhat, np.zeros(2), 1.5, mu)
    assert np.allclose(F[:, 0], 2 * 1.7 * mu[:, 0])


def test_reduction_matches_direct_phi_integral():
    # integrand(theta) equals the phi integral of f / R^{2p}
    surf = AxisymSurface(geo.spheroid(1.0, 3.0), n_phi=64)
    tg = Target(0.9, 0.4, 1.1)
    for kern in (en.LAPLACE_SLP, en.LAPLACE_DLP):
        num = kern.numerator(surf.curve, en.fig1_density, tg)
        th = 0.7
        red = az.reduce(surf, num, tg, [th], kern.p, 1e-15)
        g = lambda ph: float(np.real(num(th, ph)) / geo.r2(surf.curve, th, ph, tg) ** kern.p)
        ref = quad(g, 0, 2 * np.pi, epsabs=0, epsrel=1e-13, limit=200)[0]
        assert red.integrand[0, 0] == pytest.approx(ref, rel=1e-12)


def test_p_half_exponent_zero_and_axis():
    surf = AxisymSurface(geo.spheroid(1.0, 1.0))
    tg = Target(0.0, 0.0, 2.0)
    num = en.LAPLACE_SLP.numerator(surf.curve, en.const_density(), tg)
    th = np.array([0.5, 1.5])
    red = az.reduce(surf, num, tg, th, 0.5)
    direct = 2 * np.pi * np.sin(th) / np.sqrt(geo.r2(surf.curve, th, 0.0, tg))
    assert np.allclose(red.integrand[:, 0], direct, rtol=1e-13)
