"""Target-point generators: plane grids, surface-normal lines and rings of
constant Bernstein radius."""
from __future__ import annotations

import numpy as np

from . import geometry as geo
from .geometry import GeneratingCurve, ParamMap


def plane_grid(x0: float, x1: float, nx: int, z0: float, z1: float, nz: int, y: float = 0.0):
    """Uniform grid in the plane y = const; x varies slowest."""
    X, Z = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(z0, z1, nz), indexing="ij")
    return np.stack([X.ravel(), np.full(X.size, float(y)), Z.ravel()], axis=-1)


def normal_line(curve: GeneratingCurve, theta: float, phi: float, distances, side: str = "out"):
    """Points gamma(theta, phi) +- d n at the given distances."""
    if side not in ("out", "in"):
        raise ValueError("side must be 'out' or 'in'")
    g = geo.surface_point(curve, theta, phi)
    n, _ = geo.normal_and_jacobian(curve, theta, phi)
    d = np.asarray(distances, dtype=float)
    sgn = 1.0 if side == "out" else -1.0
    return g[None, :] + sgn * d[:, None] * n[None, :]


def log_distances(dmin: float, dmax: float, n: int):
    return np.logspace(np.log10(dmin), np.log10(dmax), n)


def theta_root_target(a: float, b: float, theta0: complex, azimuth: float = 0.0):
    """Real point that makes theta0 a root of the spheroid R_lambda.

    R_lambda = 0 means a sin theta0 - rho = +-i (b cos theta0 - z), i.e.
    rho -+ i z = a sin theta0 -+ i b cos theta0; the first branch giving
    rho >= 0 is returned (None if neither does).
    """
    s, c = a * np.sin(theta0), b * np.cos(theta0)
    for rho, z in (((s - 1j * c).real, -(s - 1j * c).imag), ((s + 1j * c).real, (s + 1j * c).imag)):
        if rho >= 0:
            return np.array([rho * np.cos(azimuth), rho * np.sin(azimuth), z])
    return None


def ring_targets(a: float, b: float, pm: ParamMap, rho_b: float, n: int, azimuth: float = 0.0,
                 psi_range=(0.05, np.pi - 0.05)):
    """Targets whose panel-local R_lambda root lies on the Bernstein ellipse rho_b."""
    out = []
    for psi in np.linspace(psi_range[0], psi_range[1], n):
        z0 = rho_b * np.exp(1j * psi)
        t0 = 0.5 * (z0 + 1.0 / z0)
        p = theta_root_target(a, b, geo.map_t_to_theta(pm, t0), azimuth)
        if p is not None:
            out.append(p)
    return np.array(out)


def inside_spheroid(a: float, b: float, pts) -> np.ndarray:
    pts = np.atleast_2d(pts)
    rho2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    return rho2 / a ** 2 + pts[:, 2] ** 2 / b ** 2 < 1.0
