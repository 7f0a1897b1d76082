"""Axisymmetric surfaces, squared-distance functions and parameter maps.

A body of revolution is described by a generating curve
``(a(theta) sin(theta), b(theta) cos(theta))`` in the (rho, z) half plane,
revolved about the z-axis.  Every function here accepts complex ``theta``
and ``phi`` so that roots and error estimates can use analytic continuation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss


def _const(value: float) -> Callable:
    return lambda th: value + 0.0 * np.asarray(th)


def _zero(th):
    return 0.0 * np.asarray(th)


@dataclass(frozen=True)
class GeneratingCurve:
    """Profile functions a(theta), b(theta) and their first derivatives."""

    a: Callable
    b: Callable
    da: Callable
    db: Callable
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def is_spheroid(self) -> bool:
        return self.kind == "spheroid"

    def validate(self, n: int = 257) -> None:
        th = np.linspace(0.0, np.pi, n)
        if np.any(np.real(self.a(th)) <= 0) or np.any(np.real(self.b(th)) <= 0):
            raise ValueError("generating curve requires a(theta) > 0 and b(theta) > 0 on [0, pi]")

    def profile(self, theta):
        """Point (rho, z) of the generating curve."""
        return self.a(theta) * np.sin(theta), self.b(theta) * np.cos(theta)

    def dprofile(self, theta):
        """Derivative d/dtheta of the generating curve."""
        a, b = self.a(theta), self.b(theta)
        s, c = np.sin(theta), np.cos(theta)
        return self.da(theta) * s + a * c, self.db(theta) * c - b * s

    def diameter(self) -> float:
        th = np.linspace(0.0, np.pi, 513)
        rho, z = self.profile(th)
        return float(max(2.0 * np.max(rho), np.max(z) - np.min(z)))


def spheroid(a: float, b: float) -> GeneratingCurve:
    """Spheroid with equatorial semi-axis ``a`` and polar semi-axis ``b``."""
    if a <= 0 or b <= 0:
        raise ValueError("spheroid semi-axes must be positive")
    return GeneratingCurve(_const(float(a)), _const(float(b)), _zero, _zero,
                           kind="spheroid", params={"a": float(a), "b": float(b)})


def trig_curve(beta: float, m: int = 2, scale: float = 1.0, aspect: float = 1.0) -> GeneratingCurve:
    """Curve with a(theta) = scale*(1 + beta cos(m theta)) and b = aspect*a.

    ``m=2`` gives a peanut-like body for beta in (0, 0.6); larger ``m`` gives
    star-like bodies.  Both are stand-ins for shapes only shown graphically
    in the literature.
    """
    if not (0.0 <= beta < 1.0):
        raise ValueError("beta must lie in [0, 1)")
    m = int(m)

    def a(th):
        return scale * (1.0 + beta * np.cos(m * np.asarray(th)))

    def da(th):
        return -scale * beta * m * np.sin(m * np.asarray(th))

    curve = GeneratingCurve(a, lambda th: aspect * a(th), da, lambda th: aspect * da(th),
                            kind="trig", params={"beta": beta, "m": m, "scale": scale, "aspect": aspect})
    curve.validate()
    return curve


@dataclass(frozen=True)
class Target:
    """Evaluation point; ``on_axis`` compares rho with ``axis_tol``."""

    x: float
    y: float
    z: float
    axis_tol: float = 0.0

    @property
    def rho(self) -> float:
        return float(np.hypot(self.x, self.y))

    @property
    def on_axis(self) -> bool:
        return self.rho <= self.axis_tol

    @property
    def azimuth(self) -> float:
        return float(np.arctan2(self.y, self.x))

    @property
    def point(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def at(cls, p: Sequence[float], diameter: float = 1.0) -> "Target":
        return cls(float(p[0]), float(p[1]), float(p[2]), axis_tol=1e-13 * diameter)


@dataclass(frozen=True)
class ParamMap:
    """Affine map between t in [-1, 1] and theta in [theta_a, theta_b]."""

    theta_a: float
    theta_b: float

    def __post_init__(self):
        if self.theta_b == self.theta_a:
            raise ValueError("degenerate parameter map (zero length)")

    @property
    def dtheta(self) -> float:
        return 0.5 * (self.theta_b - self.theta_a)

    @property
    def mid(self) -> float:
        return 0.5 * (self.theta_a + self.theta_b)


FULL = ParamMap(0.0, np.pi)


def map_t_to_theta(pm: ParamMap, t):
    return pm.mid + pm.dtheta * t


def map_theta_to_t(pm: ParamMap, theta):
    return (theta - pm.mid) / pm.dtheta


@dataclass(frozen=True)
class AxisymSurface:
    """Generating curve plus the base tensor discretization."""

    curve: GeneratingCurve
    panels: tuple = ((0.0, np.pi),)
    n_t: int = 40
    n_phi: int = 40

    def __post_init__(self):
        if self.n_phi < 3:
            raise ValueError("n_phi must be at least 3")
        edges = [p[0] for p in self.panels] + [self.panels[-1][1]]
        if abs(edges[0]) > 1e-14 or abs(edges[-1] - np.pi) > 1e-12:
            raise ValueError("panels must cover [0, pi]")
        for (a0, b0), (a1, _) in zip(self.panels[:-1], self.panels[1:]):
            if abs(b0 - a1) > 1e-14 or b0 <= a0:
                raise ValueError("panels must be contiguous and ordered")

    @property
    def param_maps(self) -> list[ParamMap]:
        return [ParamMap(float(a), float(b)) for a, b in self.panels]

    def theta_nodes(self):
        """Gauss-Legendre nodes/weights in theta (weights include dtheta)."""
        t, w = leggauss(self.n_t)
        ths, ws = [], []
        for pm in self.param_maps:
            ths.append(map_t_to_theta(pm, t))
            ws.append(w * pm.dtheta)
        return np.concatenate(ths), np.concatenate(ws)

    def phi_nodes(self):
        phi = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        return phi, np.full(self.n_phi, 2.0 * np.pi / self.n_phi)

    @property
    def diameter(self) -> float:
        return self.curve.diameter()

    def target(self, p) -> Target:
        return Target.at(p, self.diameter)


def surface_point(curve: GeneratingCurve, theta, phi):
    """gamma(theta, phi) stacked along the last axis."""
    theta, phi = np.broadcast_arrays(np.asarray(theta), np.asarray(phi))
    rs = curve.a(theta) * np.sin(theta)
    return np.stack([rs * np.cos(phi), rs * np.sin(phi), curve.b(theta) * np.cos(theta)], axis=-1)


def tangents(curve: GeneratingCurve, theta, phi):
    theta, phi = np.broadcast_arrays(np.asarray(theta), np.asarray(phi))
    drho, dz = curve.dprofile(theta)
    rs = curve.a(theta) * np.sin(theta)
    c, s = np.cos(phi), np.sin(phi)
    g_t = np.stack([drho * c, drho * s, dz], axis=-1)
    g_p = np.stack([-rs * s, rs * c, 0.0 * rs], axis=-1)
    return g_t, g_p


def area_vector(curve: GeneratingCurve, theta, phi):
    """Unnormalized outward normal dgamma/dtheta x dgamma/dphi."""
    g_t, g_p = tangents(curve, theta, phi)
    return np.cross(g_t, g_p)


def normal_and_jacobian(curve: GeneratingCurve, theta, phi):
    """Unit outward normal and areal Jacobian |gamma_theta x gamma_phi|.

    For complex arguments the Jacobian is the analytic continuation
    sqrt(sum of squares).  At the poles the normal is taken from the limit
    rho -> 0 (it is +-e_z).
    """
    nv = area_vector(curve, theta, phi)
    jac = np.sqrt(np.sum(nv * nv, axis=-1))
    theta = np.asarray(theta)
    if np.isrealobj(theta):
        jac = np.abs(jac)
        zero = jac == 0
        if np.any(zero):
            th = np.broadcast_to(theta, jac.shape)
            if np.any(np.abs(np.sin(th[zero])) > 1e-15):
                raise ValueError("degenerate tangents: zero Jacobian away from the poles")
            nrm = np.zeros(nv.shape)
            nrm[..., 2] = np.sign(np.cos(th))
            nrm[~zero] = nv[~zero] / jac[~zero][..., None]
            return nrm, jac
    return nv / jac[..., None], jac


def r2(curve: GeneratingCurve, theta, phi, target: Target):
    """Squared distance sum_i (gamma_i - x_i)^2 (no conjugation)."""
    g = surface_point(curve, theta, phi)
    return (g[..., 0] - target.x) ** 2 + (g[..., 1] - target.y) ** 2 + (g[..., 2] - target.z) ** 2


def lambda_fn(curve: GeneratingCurve, theta, target: Target):
    a = curve.a(theta)
    at = a * np.sin(theta)
    bt = curve.b(theta) * np.cos(theta)
    return (at * at + target.rho ** 2 + (bt - target.z) ** 2) / (2.0 * a)


def r2_lambda(curve: GeneratingCurve, theta, target: Target):
    """Squared distance in the (rho, z) plane: (a sin - rho)^2 + (b cos - z)^2."""
    rho_c, z_c = curve.profile(theta)
    return (rho_c - target.rho) ** 2 + (z_c - target.z) ** 2


def dr2_lambda(curve: GeneratingCurve, theta, target: Target):
    """Derivative of :func:`r2_lambda` with respect to theta."""
    rho_c, z_c = curve.profile(theta)
    drho, dz = curve.dprofile(theta)
    return 2.0 * (rho_c - target.rho) * drho + 2.0 * (z_c - target.z) * dz


def disc(curve: GeneratingCurve, theta, target: Target):
    """lambda^2 - rho^2 sin^2(theta), written to limit cancellation.

    Uses lambda - rho sin = R_lambda / (2a).
    """
    a = curve.a(theta)
    rs = target.rho * np.sin(theta)
    lam = lambda_fn(curve, theta, target)
    return r2_lambda(curve, theta, target) / (2.0 * a) * (lam + rs)


def l_sq(curve: GeneratingCurve, theta, target: Target):
    """(lambda + sqrt(lambda^2 - rho^2 sin^2 theta))^(-1/2)."""
    lam = lambda_fn(curve, theta, target)
    return 1.0 / np.sqrt(lam + np.sqrt(disc(curve, theta, target)))


def nearest_grid_theta(surface: AxisymSurface, target: Target) -> float:
    """Polar angle of the base grid node closest to the target."""
    th, _ = surface.theta_nodes()
    return float(th[np.argmin(r2_lambda(surface.curve, th, target))])
