"""A-priori error estimates.

* Branch-cut estimates of the Gauss-Legendre quadrature error and of the
  polynomial interpolation error for L(theta) = (lambda + sqrt(lambda^2 -
  rho^2 sin^2 theta))^(-1/2), whose nearest singularities are square-root
  branch points at the complex roots of R_lambda.
* A gate estimate of the regular tensor (Gauss-Legendre x trapezoidal)
  quadrature error for the full surface integral.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar
from scipy.special import gamma, gammaln

from . import geometry as geo
from . import roots as rt
from .geometry import AxisymSurface, GeneratingCurve, ParamMap, Target

KAPPA = 1e-10
N_BRANCH = 8
FLOOR = 1e-17


@dataclass(frozen=True)
class RemainderParams:
    kappa: float = KAPPA
    n_branch: int = N_BRANCH

    def __post_init__(self):
        if not (0.0 < self.kappa < 1.0) and self.kappa != 1.0:
            raise ValueError("kappa must lie in (0, 1]")
        if self.n_branch < 4:
            raise ValueError("at least 4 branch-cut quadrature points are required")


@dataclass(frozen=True)
class EstimateResult:
    value: float
    root: complex
    rho: float
    L: float


# ---------------------------------------------------------------------------
# elementary pieces


def xi(z):
    """z + sqrt(z+1) sqrt(z-1) with principal square roots."""
    z = np.asarray(z, dtype=complex)
    return z + np.sqrt(z + 1) * np.sqrt(z - 1)


def bernstein_radius(t0) -> float:
    return float(np.abs(xi(t0)))


def branch_cut(t0, s):
    """Point gamma(s) on the branch cut from t0 and its derivative."""
    zeta = complex(xi(t0))
    s = np.asarray(s, dtype=float)
    zs = zeta * s
    return 0.5 * (zs + 1.0 / zs), 0.5 * (zeta - 1.0 / (zeta * s * s))


def truncation_point(m, kappa: float = KAPPA) -> float:
    if m < 1:
        raise ValueError("exponent must be >= 1")
    return float(kappa ** (-1.0 / m))


def node_polynomial_and_weights(nodes):
    """Node polynomial ell_n (callable, complex-capable) and barycentric weights."""
    t = np.asarray(nodes, dtype=float)
    diff = t[:, None] - t[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0):
        raise ValueError("duplicate interpolation nodes")
    weights = 1.0 / np.prod(diff, axis=1)

    def ell(z):
        z = np.asarray(z)
        return np.prod(z[..., None] - t, axis=-1)

    return ell, weights


def geometry_factor(dfun: Callable, w: complex, scale: float = 1.0) -> complex:
    """lim_{t->w} (t - w) / R(t) for a simple root w, i.e. 1 / R'(w)."""
    d = complex(dfun(w))
    if abs(d) <= 1e-14 * scale:
        raise ZeroDivisionError("vanishing derivative: root is not simple")
    return 1.0 / d


def _continuous_sqrt(v, start=None):
    """sqrt along a path, choosing branches so consecutive values stay close."""
    out = np.sqrt(np.asarray(v, dtype=complex))
    if start is not None and abs(out[0] - start) > abs(out[0] + start):
        out[0] = -out[0]
    for i in range(1, out.size):
        if abs(out[i] - out[i - 1]) > abs(out[i] + out[i - 1]):
            out[i] = -out[i]
    return out


def _panel_root(curve, target, pm, theta0):
    if theta0 is None:
        theta0 = rt.theta0_lambda(curve, target, pm.mid, pm).value
    return complex(theta0)


def _branch_integrals(curve: GeneratingCurve, target: Target, pm: ParamMap, theta0: complex,
                      m: int, params: RemainderParams, taus=None):
    """|sum w s^-m gamma' (L_+ - L_-) / (gamma - tau)| for tau in taus (None: no tau factor)."""
    t0 = complex(geo.map_theta_to_t(pm, theta0))
    Lt = truncation_point(m, params.kappa)
    x, w = leggauss(params.n_branch)
    s = 1.0 + 0.5 * (Lt - 1.0) * (x + 1.0)
    w = 0.5 * (Lt - 1.0) * w
    g, dg = branch_cut(t0, s)
    thg = pm.mid + pm.dtheta * g
    # far out on long cuts (small m) sin/cos overflow; L vanishes there
    with np.errstate(all="ignore"):
        lam = geo.lambda_fn(curve, thg, target)
        if target.on_axis:
            diff = 2.0 / _continuous_sqrt(2.0 * lam)
        else:
            gbar = geo.disc(curve, thg, target) / ((thg - theta0) * (thg - np.conj(theta0)))
            S = (_continuous_sqrt(gbar) * pm.dtheta * np.sqrt(g - t0)
                 * _continuous_sqrt(g - np.conj(t0)))
            lam0 = complex(geo.lambda_fn(curve, theta0, target))
            ref = np.sqrt(lam0)
            diff = 1.0 / _continuous_sqrt(lam + S, ref) - 1.0 / _continuous_sqrt(lam - S, ref)
    diff = np.where(np.isfinite(diff), diff, 0.0)
    base = w * s ** (-float(m)) * dg * diff
    if taus is None:
        return t0, Lt, abs(np.sum(base))
    return t0, Lt, [abs(np.sum(base / (g - tau))) for tau in taus]


def _clamp(v: float) -> float:
    if not np.isfinite(v):
        return np.inf
    return max(float(v), FLOOR)


def quad_estimate_lsq(curve: GeneratingCurve, target: Target, n: int, theta_a: float, theta_b: float,
                      theta0: complex | None = None, params: RemainderParams = RemainderParams()
                      ) -> EstimateResult:
    """Estimated n-point Gauss-Legendre error for int L dtheta over [theta_a, theta_b]."""
    pm = ParamMap(theta_a, theta_b)
    theta0 = _panel_root(curve, target, pm, theta0)
    t0 = complex(geo.map_theta_to_t(pm, theta0))
    rad = bernstein_radius(t0)
    m = 2 * n + 1
    if rad <= 1 + 1e-12:
        return EstimateResult(np.inf, t0, rad, np.inf)
    _, Lt, beta = _branch_integrals(curve, target, pm, theta0, m, params)
    val = 2.0 * abs(pm.dtheta) * np.exp(-m * np.log(rad)) * beta
    return EstimateResult(_clamp(val), t0, rad, Lt)


def interp_estimate_lsq(curve: GeneratingCurve, target: Target, n: int, theta_a: float, theta_b: float,
                        theta0: complex | None = None, params: RemainderParams = RemainderParams()
                        ) -> EstimateResult:
    """Estimated max error of the degree n-1 Gauss-Legendre interpolant of L on the panel."""
    pm = ParamMap(theta_a, theta_b)
    theta0 = _panel_root(curve, target, pm, theta0)
    t0 = complex(geo.map_theta_to_t(pm, theta0))
    rad = bernstein_radius(t0)
    if rad <= 1 + 1e-12:
        return EstimateResult(np.inf, t0, rad, np.inf)
    ell, _ = node_polynomial_and_weights(leggauss(n)[0])
    taus = (-1.0, 0.0, 1.0)
    _, Lt, betas = _branch_integrals(curve, target, pm, theta0, n, params, taus)
    val = max(abs(ell(tau)) * b for tau, b in zip(taus, betas)) / (np.pi * abs(ell(t0)))
    return EstimateResult(_clamp(val), t0, rad, Lt)


def log_quad_estimate(n: int, theta_a: float, theta_b: float, theta0: complex,
                      params: RemainderParams = RemainderParams()) -> float:
    """Estimated n-point Gauss-Legendre error for int log|theta - theta0|^2 dtheta.

    The logarithm jumps by 2 pi i across each of the two conjugate branch cuts.
    """
    pm = ParamMap(theta_a, theta_b)
    t0 = complex(geo.map_theta_to_t(pm, theta0))
    rad = bernstein_radius(t0)
    if rad <= 1 + 1e-12:
        return np.inf
    m = 2 * n + 1
    Lt = truncation_point(m, params.kappa)
    x, w = leggauss(params.n_branch)
    s = 1.0 + 0.5 * (Lt - 1.0) * (x + 1.0)
    w = 0.5 * (Lt - 1.0) * w
    _, dg = branch_cut(t0, s)
    beta = abs(np.sum(w * s ** (-float(m)) * dg))
    return _clamp(4.0 * np.pi * abs(pm.dtheta) * np.exp(-m * np.log(rad)) * beta)


# ---------------------------------------------------------------------------
# regular-quadrature gate


def _q_ratio(curve, target, theta):
    return geo.lambda_fn(curve, theta, target) / (target.rho * np.sin(theta))


def stationary_theta(curve: GeneratingCurve, target: Target, n_sample: int = 257):
    """theta_s minimizing lambda / (rho sin theta) (closest azimuthal root) and the curvature
    of beta = arccosh(lambda / (rho sin theta)) there."""
    th = np.linspace(0.0, np.pi, n_sample)[1:-1]
    q = _q_ratio(curve, target, th)
    i = int(np.argmin(q))
    lo, hi = th[max(i - 1, 0)], th[min(i + 1, th.size - 1)]
    res = minimize_scalar(lambda t: _q_ratio(curve, target, t), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    ts = float(res.x)
    h = 1e-4 * max(min(ts, np.pi - ts), 1e-3)
    qs = float(_q_ratio(curve, target, ts))
    q2 = (_q_ratio(curve, target, ts + h) - 2 * qs + _q_ratio(curve, target, ts - h)) / h ** 2
    qs = max(qs, 1.0 + 1e-300)
    return ts, qs, float(q2) / np.sqrt(qs * qs - 1.0)


def _absmax(v) -> float:
    return float(np.max(np.abs(np.atleast_1d(v))))


def regular_surface_estimate(surface: AxisymSurface, numerator: Callable, p: float, target: Target,
                             theta0: complex | None = None) -> float:
    """Estimated error of the regular tensor quadrature of int f / (R^2)^p dtheta dphi.

    ``numerator(theta, phi)`` returns f (any number of components; the largest
    modulus is used) and must accept complex arguments.  The two one-directional
    remainders are integrated over the complementary variable by a Laplace
    collapse about the point of closest approach.
    """
    curve = surface.curve
    n_phi = surface.n_phi
    g1p = abs(gamma(1.0 - p))
    try:
        if theta0 is None:
            root = rt.theta0_lambda(curve, target, geo.nearest_grid_theta(surface, target))
            if not root.converged:
                return np.inf
            theta0 = root.value
    except (ValueError, ZeroDivisionError, FloatingPointError):
        return np.inf
    theta0 = complex(theta0)
    alpha = target.azimuth

    # trapezoidal (azimuthal) part, integrated over theta
    e_phi = 0.0
    if not target.on_axis:
        ts, qs, kap = stationary_theta(curve, target)
        beta = float(np.arccosh(qs))
        a = float(curve.a(ts))
        rs = target.rho * np.sin(ts)
        gphi = 1.0 / (2.0 * a * rs * np.sinh(beta))
        fval = _absmax(numerator(ts, complex(alpha, beta)))
        ephi = 4.0 * g1p * n_phi ** (p - 1.0) * np.exp(-n_phi * beta) * fval * gphi ** p
        width = np.pi if kap <= 0 else min(np.pi, np.sqrt(2 * np.pi / (n_phi * kap)))
        e_phi = ephi * width

    # Gauss-Legendre (polar) part, integrated over phi, summed over base panels
    e_t = 0.0
    m = 2 * surface.n_t + 1
    gfac = g1p * np.exp(gammaln(m + p - 1.0) - gammaln(m))
    dR = complex(geo.dr2_lambda(curve, theta0, target))
    if dR == 0:
        return np.inf
    fval = _absmax(numerator(theta0, alpha))
    for pm in surface.param_maps:
        t0 = complex(geo.map_theta_to_t(pm, theta0))
        rad = bernstein_radius(t0)
        if rad <= 1 + 1e-12:
            return np.inf
        gt = 1.0 / abs(pm.dtheta * dR)
        sq = np.sqrt(t0 + 1) * np.sqrt(t0 - 1)
        et = (abs(pm.dtheta) * 4.0 * gfac * np.exp(-m * np.log(rad))
              * abs(t0 * t0 - 1) ** ((1.0 - p) / 2.0) * fval * gt ** p)
        if target.on_axis:
            width = 2 * np.pi
        else:
            a0 = complex(curve.a(theta0))
            t2 = -2.0 * a0 * target.rho * np.sin(theta0) / (pm.dtheta * dR)
            kphi = float(np.real(t2 / sq))
            width = 2 * np.pi if kphi <= 0 else min(2 * np.pi, np.sqrt(2 * np.pi / (m * kphi)))
        e_t += et * width
    return _clamp(e_phi + e_t)
