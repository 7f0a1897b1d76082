"""Singularity-swap quadrature in the azimuthal direction.

For fixed theta the phi-integral of f / (R^2)^p is done exactly for the
trigonometric interpolant of f.  With r = exp(-Im phi0) and
F = 2 sum_k fhat_k e^{ik Re phi0} mu_|k|^p(r), the surface integral becomes
the polar line integral of

    a(theta)^{-1/2} L(theta) F(theta) R_lambda(theta)^{-(p - 1/2)}.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry as geo
from . import roots as rt
from .special import mu_table
from .geometry import AxisymSurface, GeneratingCurve, Target


class ImaginaryResidueWarning(RuntimeWarning):
    """F(theta) picked up an imaginary part larger than the accepted residue."""


@dataclass(frozen=True)
class AzimuthalReduction:
    theta: np.ndarray
    r: np.ndarray
    phi0: np.ndarray
    fhat: np.ndarray          # (n_theta, n_comp, 2*kmax+1), k = -kmax..kmax
    F: np.ndarray             # (n_theta, n_comp)
    prefactor: np.ndarray     # a^{-1/2} L
    r2_lambda: np.ndarray
    integrand: np.ndarray     # (n_theta, n_comp)

    @property
    def kmax(self) -> int:
        return (self.fhat.shape[-1] - 1) // 2


def fourier_coefficients(samples, axis: int = -1):
    """Discrete Fourier coefficients fhat_{-kmax..kmax} of equispaced samples on [0, 2pi)."""
    samples = np.asarray(samples)
    n = samples.shape[axis]
    kmax = (n - 1) // 2
    c = np.fft.fft(samples, axis=axis) / n
    c = np.moveaxis(c, axis, -1)
    out = np.concatenate([c[..., n - kmax:], c[..., :kmax + 1]], axis=-1)
    return np.moveaxis(out, -1, axis)


def f_assemble(surface: AxisymSurface, numerator: Callable, theta) -> np.ndarray:
    """Samples f(theta_i, phi_l) with shape (n_theta, n_phi, n_comp)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi, _ = surface.phi_nodes()
    vals = np.asarray(numerator(theta[:, None], phi[None, :]))
    if vals.ndim == 2:
        vals = vals[..., None]
    return vals


def f_theta(fhat, phi0_real, p: float, mu, tol: float = 1e-10):
    """F = 2 sum_k fhat_k e^{ik Re phi0} mu_|k|.

    ``fhat`` has shape (n, c, 2kmax+1); ``mu`` shape (n, >= kmax+1).
    """
    fhat = np.asarray(fhat)
    kmax = (fhat.shape[-1] - 1) // 2
    k = np.arange(-kmax, kmax + 1)
    phase = np.exp(1j * k[None, :] * np.asarray(phi0_real)[:, None])
    muk = np.asarray(mu)[:, np.abs(k)]
    F = 2.0 * np.sum(fhat * (phase * muk)[:, None, :], axis=-1)
    if np.iscomplexobj(F):
        bad = np.abs(F.imag) > tol * (1.0 + np.abs(F.real))
        if np.any(bad):
            warnings.warn(f"imaginary residue in F up to {np.max(np.abs(F.imag)):.3e}",
                          ImaginaryResidueWarning, stacklevel=2)
        F = F.real
    return F


def reduce_samples(curve: GeneratingCurve, target: Target, theta, fsamples, p: float,
                   mu_eps: float = 1e-14) -> AzimuthalReduction:
    """Polar integrand from f samples on the phi grid (shape (n_theta, n_phi, n_comp))."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    fhat = fourier_coefficients(np.moveaxis(np.asarray(fsamples), 1, -1), axis=-1)
    kmax = (fhat.shape[-1] - 1) // 2
    a = curve.a(theta)
    rl = geo.r2_lambda(curve, theta, target)
    if target.on_axis:
        r = np.zeros_like(theta)
        phi0 = np.full(theta.shape, 1j * np.inf)
        re = np.zeros_like(theta)
    else:
        r = rt.phi0_r(curve, theta, target)
        phi0 = target.azimuth - 1j * np.log(r)
        re = np.full(theta.shape, target.azimuth)
    mu = mu_table(p, r, kmax, max(mu_eps, 1e-16)).values
    F = f_theta(fhat, re, p, mu)
    pref = geo.l_sq(curve, theta, target) / np.sqrt(a)
    integrand = (pref * rl ** (-(p - 0.5)))[:, None] * F
    return AzimuthalReduction(theta, r, phi0, fhat, F, pref, rl, integrand)


def reduce(surface: AxisymSurface, numerator: Callable, target: Target, theta, p: float,
           mu_eps: float = 1e-14) -> AzimuthalReduction:
    """Azimuthal reduction at the polar nodes ``theta``."""
    fs = f_assemble(surface, numerator, theta)
    return reduce_samples(surface.curve, target, theta, fs, p, mu_eps)
