"""Complex roots of the squared-distance functions R^2 and R_lambda.

Spheroids admit closed forms (inverse Joukowsky map, a quartic in e^{i theta});
general generating curves use Newton's method from theta* + i/10.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from .geometry import GeneratingCurve, ParamMap, Target

ROOT_TOL = 1e-12


class AxisTargetError(ValueError):
    """Raised when a root formula needs rho > 0 but the target is on the axis."""


@dataclass(frozen=True)
class ComplexRoot:
    value: complex
    residual: float
    method: str
    converged: bool = True
    iterations: int = 0

    def conj(self) -> "ComplexRoot":
        return ComplexRoot(self.value.conjugate(), self.residual, self.method,
                           self.converged, self.iterations)


def _scale(curve: GeneratingCurve, target: Target) -> float:
    """Characteristic size of R^2 used for relative residuals."""
    return max(1.0, (curve.diameter() + np.linalg.norm(target.point)) ** 2)


def _upper(z: complex) -> complex:
    return z if z.imag >= 0 else z.conjugate()


# ---------------------------------------------------------------------------
# azimuthal root


def phi0_analytic(curve: GeneratingCurve, theta: float, target: Target) -> ComplexRoot:
    """Root of phi -> R^2(theta, phi, x) with positive imaginary part."""
    if target.on_axis:
        raise AxisTargetError("no azimuthal root for an on-axis target")
    s = np.sin(theta)
    lam = geo.lambda_fn(curve, theta, target)
    sq = np.sqrt(geo.disc(curve, theta, target))
    im = np.log((lam + sq) / (target.rho * s))
    val = complex(target.azimuth, im)
    res = abs(geo.r2(curve, theta, val, target))
    return ComplexRoot(val, float(res), "analytic")


def phi0_r(curve: GeneratingCurve, theta, target: Target):
    """Vectorized r = exp(-|Im phi0|) = rho sin(theta) / (lambda + sqrt(lambda^2 - rho^2 sin^2))."""
    lam = geo.lambda_fn(curve, theta, target)
    return target.rho * np.sin(theta) / (lam + np.sqrt(geo.disc(curve, theta, target)))


# ---------------------------------------------------------------------------
# polar roots


def _wrap(th: complex) -> complex:
    re = (th.real + np.pi) % (2 * np.pi) - np.pi
    return complex(re, th.imag)


def theta0_spheroid_candidates(a: float, b: float, target: Target) -> list[complex]:
    """All roots of R_lambda for the spheroid (both Joukowsky branches, conjugates)."""
    w = complex(target.z, target.rho)
    c2 = (b * b - a * a) / 4.0
    sq = np.sqrt(w * w - 4.0 * c2)
    at = 0.5 * (a + b)
    out = []
    for u in (0.5 * (w + sq), 0.5 * (w - sq)):
        if u == 0:
            continue
        th = complex(np.angle(u), -np.log(abs(u) / at))
        out += [th, th.conjugate()]
    return out


def theta0_spheroid(a: float, b: float, target: Target, pm: ParamMap = geo.FULL) -> ComplexRoot:
    """Root of R_lambda for the spheroid (a, b) nearest to the interval of ``pm``."""
    if target.on_axis:
        raise AxisTargetError("spheroid R_lambda root formula needs rho > 0")
    curve = geo.spheroid(a, b)
    cands = theta0_spheroid_candidates(a, b, target)
    th = nearest_root(pm, cands)
    res = abs(geo.r2_lambda(curve, th, target))
    return ComplexRoot(th, float(res), "analytic")


def quartic_coefficients(a: float, b: float, target: Target, phibar: float):
    """Coefficients (highest first) of the quartic in beta = exp(i theta) for R^2(., phibar)."""
    delta = b * b - a * a
    q = target.x * np.cos(phibar) + target.y * np.sin(phibar)
    tau = complex(-b * target.z, a * q)
    mid = 0.5 * (a * a + b * b) + float(np.dot(target.point, target.point))
    return np.array([delta / 4, tau, mid, tau.conjugate(), delta / 4], dtype=complex)


def theta0_of_r2_spheroid(a: float, b: float, target: Target, phibar: float,
                          theta_star: float | None = None) -> ComplexRoot:
    """Root of theta -> R^2(theta, phibar, x) with smallest |Im|, from the quartic."""
    curve = geo.spheroid(a, b)
    if theta_star is None:
        theta_star = float(np.pi / 2)
    if abs(b * b - a * a) <= 1e-14 * max(a, b) ** 2:
        return newton_root(lambda t: geo.r2(curve, t, phibar, target),
                           lambda t: _dr2_dtheta(curve, t, phibar, target),
                           complex(theta_star, 0.1))
    if target.z == 0 and abs(np.cos(phibar - target.azimuth)) < 1e-14 and not target.on_axis:
        raise ValueError("excluded azimuth: z = 0 and phibar - atan2(y, x) = pi/2 + k pi")
    betas = np.roots(quartic_coefficients(a, b, target, phibar))
    thetas = [_wrap(complex(np.angle(bt), -np.log(abs(bt)))) for bt in betas if bt != 0]
    key = [(round(abs(t.imag), 12), abs(t.real - theta_star)) for t in thetas]
    th = _upper(thetas[min(range(len(thetas)), key=key.__getitem__)])
    res = abs(geo.r2(curve, th, phibar, target))
    return ComplexRoot(th, float(res), "quartic")


def _dr2_dtheta(curve, theta, phi, target):
    g = geo.surface_point(curve, theta, phi)
    g_t, _ = geo.tangents(curve, theta, phi)
    return 2.0 * np.sum((g - target.point) * g_t, axis=-1)


def newton_root(f: Callable, df: Callable, guess: complex, tol: float = ROOT_TOL,
                maxit: int = 10, damped_maxit: int = 50) -> ComplexRoot:
    """Newton iteration; on failure, restart from ``guess`` with step damping 0.5.

    ``iterations`` counts the steps of the pass that produced the result.
    """
    z = complex(guess)
    for step, nit, tag in ((1.0, maxit, "newton"), (0.5, damped_maxit, "newton-damped")):
        z = complex(guess)
        with np.errstate(all="ignore"):
            for it in range(nit + 1):
                fz = complex(f(z))
                if abs(fz) <= tol:
                    return ComplexRoot(z, abs(fz), tag, True, it)
                if it == nit:
                    break
                d = complex(df(z))
                if d == 0 or not np.isfinite(d) or not np.isfinite(fz):
                    break
                z = z - step * fz / d
    with np.errstate(all="ignore"):
        res = abs(complex(f(z))) if np.isfinite(z) else np.inf
    return ComplexRoot(z, float(res), "newton-damped", False, damped_maxit)


def theta0_lambda_newton(curve: GeneratingCurve, target: Target, theta_star: float) -> ComplexRoot:
    tol = ROOT_TOL * _scale(curve, target)
    root = newton_root(lambda t: geo.r2_lambda(curve, t, target),
                       lambda t: geo.dr2_lambda(curve, t, target),
                       complex(theta_star, 0.1), tol=tol)
    return root if root.value.imag >= 0 else root.conj()


def theta0_lambda_multistart(curve: GeneratingCurve, target: Target, pm: ParamMap = geo.FULL,
                             n_sample: int = 513) -> ComplexRoot:
    """Fallback when Newton from theta* + i/10 fails (typically far targets).

    Starts from the real minimiser theta_m of R_lambda, with imaginary parts
    sqrt(R_min)/|gamma'(theta_m)| and 0.05 * 2^j, and keeps the converged root
    with the smallest Bernstein radius.
    """
    tol = ROOT_TOL * _scale(curve, target)
    th = np.linspace(0.0, np.pi, n_sample)
    R = np.real(geo.r2_lambda(curve, th, target))
    i = int(np.argmin(R))
    drho, dz = curve.dprofile(th[i])
    speed = max(float(np.hypot(drho, dz)), 1e-12)
    ims = [np.sqrt(max(R[i], 0.0)) / speed] + [0.05 * 2.0 ** j for j in range(8)]
    # on the axis R_lambda is even about the poles and real on Re theta = 0, pi;
    # shifted real parts let Newton leave that line
    res = [th[i], th[i] + 0.1, th[i] - 0.1]
    found = []
    for x0 in res:
        for y in ims:
            r = newton_root(lambda t: geo.r2_lambda(curve, t, target),
                            lambda t: geo.dr2_lambda(curve, t, target), complex(x0, y), tol=tol)
            if r.converged and r.value.imag != 0:
                found.append(r)
        if found:
            break
    if not found:
        return ComplexRoot(complex(th[i], ims[0]), float(np.inf), "newton-multistart", False, 0)
    from .estimates import bernstein_radius
    best = min(found, key=lambda r: bernstein_radius(geo.map_theta_to_t(pm, _upper(r.value))))
    return ComplexRoot(_upper(best.value), best.residual, "newton-multistart", True, best.iterations)


def theta0_spheroid_axis(a: float, b: float, target: Target, pm: ParamMap = geo.FULL) -> ComplexRoot:
    """On-axis spheroid root: the Joukowsky candidates stay valid at rho = 0."""
    th = nearest_root(pm, theta0_spheroid_candidates(a, b, target))
    res = abs(geo.r2_lambda(geo.spheroid(a, b), th, target))
    return ComplexRoot(th, float(res), "analytic")


def theta0_lambda(curve: GeneratingCurve, target: Target, theta_star: float,
                  pm: ParamMap = geo.FULL) -> ComplexRoot:
    """Root of R_lambda used for the polar direction (analytic when possible)."""
    if curve.is_spheroid:
        a, b = curve.params["a"], curve.params["b"]
        if target.on_axis:
            return theta0_spheroid_axis(a, b, target, pm)
        return theta0_spheroid(a, b, target, pm)
    root = theta0_lambda_newton(curve, target, theta_star)
    if not root.converged:
        root = theta0_lambda_multistart(curve, target, pm)
    return root


def nearest_root(pm: ParamMap, candidates: Sequence[complex]) -> complex:
    """Candidate (in theta) with the smallest Bernstein radius w.r.t. ``pm``; Im >= 0."""
    from .estimates import bernstein_radius

    rads = [bernstein_radius(geo.map_theta_to_t(pm, c)) for c in candidates]
    return _upper(complex(candidates[int(np.argmin(rads))]))


def nearest_root_in_t(pm: ParamMap, theta_roots) -> complex:
    """Panel-coordinate root t0 minimizing the Bernstein radius."""
    if np.ndim(theta_roots) == 0:
        theta_roots = [theta_roots]
    vals = [r.value if isinstance(r, ComplexRoot) else complex(r) for r in theta_roots]
    return complex(geo.map_theta_to_t(pm, nearest_root(pm, vals)))
