"""Adaptive polar integration of the azimuthally reduced integrand.

A panel centred on Re(theta0) is made as long as the error estimate allows;
the remaining pieces are bisected until each meets its share of the budget.
p = 1/2 panels use Gauss-Legendre; p > 1/2 panels use singularity-swap
quadrature against |t - t0|^{-(2p-1)} with monomial weights from the nu tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from . import estimates as es
from . import geometry as geo
from .azimuthal import reduce, AzimuthalReduction
from .geometry import AxisymSurface, GeneratingCurve, ParamMap, Target
from .special import mu_initial, nu_initial, nu_table

MAX_DEPTH = 30


@dataclass(frozen=True)
class Panel:
    ta: float
    tb: float
    eps: float
    method: str
    n: int = 16
    t0: complex | None = None  # root in local panel coordinates

    def __post_init__(self):
        if not self.tb > self.ta:
            raise ValueError("panel needs tb > ta")


@dataclass(frozen=True)
class PanelPartition:
    panels: tuple
    eps: float
    center: int | None = None
    dt_max: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.panels)

    def check(self, tol: float = 1e-14) -> None:
        ps = self.panels
        if abs(ps[0].ta + 1) > tol or abs(ps[-1].tb - 1) > tol:
            raise AssertionError("partition does not cover [-1, 1]")
        for a, b in zip(ps[:-1], ps[1:]):
            if abs(a.tb - b.ta) > tol:
                raise AssertionError("partition is not contiguous")
        if sum(p.eps for p in ps) > self.eps * (1 + 1e-12):
            raise AssertionError("panel budgets exceed the tolerance")


# ---------------------------------------------------------------------------
# panel rules


def gl_panel(g, w, dtheta):
    """sum_k g(t_k) w_k dtheta (g may carry trailing component axes)."""
    return dtheta * np.tensordot(np.asarray(w), np.asarray(g), axes=(0, 0))


def bjorck_pereyra(x, b):
    """Solve sum_j x_j^i z_j = b_i, i = 0..n-1, in O(n^2) operations."""
    x = np.asarray(x, dtype=float)
    z = np.array(b, dtype=float)
    n = x.size - 1
    for k in range(n):
        z[k + 1:] = z[k + 1:] - x[k] * z[k:n]
    for k in range(n - 1, -1, -1):
        z[k + 1:] = z[k + 1:] / (x[k + 1:] - x[:n - k])
        z[k:n] = z[k:n] - z[k + 1:]
    if not np.all(np.isfinite(z)):
        raise np.linalg.LinAlgError("Vandermonde solve failed")
    return z


def ssq_weights(t_nodes, t0_local, p: float, eps: float = 1e-14):
    """Weights xi with sum_j xi_j t_j^(k-1) = nu_k^p(t0), k = 1..n."""
    n = len(t_nodes)
    nu = nu_table(p, complex(t0_local), n, eps).values
    return bjorck_pereyra(t_nodes, nu)


def ssq_panel(h, t_nodes, t0_local, p: float, dtheta: float, eps: float = 1e-14):
    """dtheta^(2(1-p)) xi^T h, approximating int H(theta) / |theta - theta0|^(2p-1) dtheta."""
    xi = ssq_weights(t_nodes, t0_local, p, eps)
    return abs(dtheta) ** (2.0 * (1.0 - p)) * np.tensordot(xi, np.asarray(h), axes=(0, 0))


def h_eval(red: AzimuthalReduction, theta0: complex, p: float):
    """H = a^{-1/2} L F |theta - theta0|^(2p-1) / R_lambda^(p-1/2) from a reduction."""
    th = red.theta
    d2 = (th - theta0.real) ** 2 + theta0.imag ** 2
    return (red.prefactor * (d2 / red.r2_lambda) ** (p - 0.5))[:, None] * red.F


def barycentric_interpolate(nodes, values, x, weights=None):
    """Barycentric Lagrange interpolation from ``nodes`` (axis 0 of ``values``) to ``x``."""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values)
    x = np.atleast_1d(np.asarray(x))
    if weights is None:
        _, weights = es.node_polynomial_and_weights(nodes)
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    c = weights[None, :] / diff
    out = np.tensordot(c, values, axes=(1, 0)) / np.sum(c, axis=1).reshape((-1,) + (1,) * (values.ndim - 1))
    rows, cols = np.nonzero(exact)
    if rows.size:
        out[rows] = values[cols]
    return out


interpolate_density = barycentric_interpolate


# ---------------------------------------------------------------------------
# centred panel length


def secant_guess(theta0: complex, amp: float, eps: float, m: int) -> float:
    """Length where amp * (s + sqrt(s^2 + 1))^(-m) = eps, s = 2|Im theta0| / length."""
    if amp <= 0:
        return np.inf
    C = eps / amp
    if not (0 < C < 1):
        return np.inf if C >= 1 else 0.0
    s = (1.0 - C ** (2.0 / m)) / (2.0 * C ** (1.0 / m))
    return 2.0 * abs(theta0.imag) / s


def dtmax_solve(est_len: Callable[[float], float], theta0: complex, eps_c: float,
                dth0: float, dth1: float | None = None, tol: float = 1e-2, maxit: int = 20):
    """Largest centred panel length (in theta) whose estimate stays <= eps_c.

    Secant iteration on log(length); falls back to a bracketing solve and finally
    to ``dth0``.  Returns (length, info dict).
    """
    def g(x):
        e = est_len(math.exp(x))
        return math.log(max(e, 1e-300)) - math.log(eps_c) if np.isfinite(e) else 50.0

    x0 = math.log(dth0)
    g0 = g(x0)
    if g0 <= 0:
        return dth0, {"method": "max", "iterations": 0}
    if dth1 is None or not np.isfinite(dth1) or dth1 <= 0 or dth1 >= dth0:
        dth1 = 0.5 * dth0
    xa, ga = x0, g0
    xb = math.log(dth1)
    gb = g(xb)
    it, ok = 0, False
    while it < maxit:
        it += 1
        if gb == ga:
            break
        step = -gb * (xb - xa) / (gb - ga)
        step = max(-1.0, min(1.0, step))
        xn = min(xb + step, x0)
        xa, ga = xb, gb
        xb, gb = xn, g(xn)
        if abs(xb - xa) < tol:
            ok = True
            break
    method = "secant"
    if not ok or not np.isfinite(gb):
        method = "bracket"
        try:
            lo = xb if np.isfinite(gb) else x0 - 1.0
            glo = g(lo)
            k = 0
            while glo > 0 and k < 60:
                lo -= 1.0
                glo = g(lo)
                k += 1
            xb = brentq(g, lo, x0, xtol=tol / 10) if glo <= 0 else None
        except (ValueError, RuntimeError):
            xb = None
        if xb is None:
            return dth0, {"method": "fallback", "iterations": it}
    length = math.exp(xb)
    for _ in range(400):
        if est_len(length) <= eps_c:
            break
        length *= 0.99
    return min(length, dth0), {"method": method, "iterations": it}


# ---------------------------------------------------------------------------
# subdivision


def subdivide(t0: complex, eps: float, n_gl: int, p: float, estimate: Callable[[float, float], float],
              dtmax: Callable[[float], float] | None = None, max_depth: int = MAX_DEPTH) -> PanelPartition:
    """Partition [-1, 1] around the root t0 (parent coordinates).

    ``estimate(ta, tb)`` is the error estimate for an n_gl-point panel on [ta, tb];
    ``dtmax(eps_c)`` returns the largest admissible centred length.
    The centre panel gets eps/2, each side starts at eps/4 and every bisection
    halves the share.
    """
    method = "SSQ" if p > 0.5 else "GL"

    def mk(a, b, e):
        return Panel(float(a), float(b), float(e), method, n_gl)

    if estimate(-1.0, 1.0) <= eps:
        return PanelPartition((mk(-1.0, 1.0, eps),), eps, center=0, diagnostics={"single": True})

    def bisect(a, b, budget, depth):
        if estimate(a, b) <= budget:
            return [mk(a, b, budget)]
        if depth >= max_depth:
            raise RecursionError(f"panel subdivision exceeded depth {max_depth} on [{a}, {b}]")
        m = 0.5 * (a + b)
        return bisect(a, m, budget / 2, depth + 1) + bisect(m, b, budget / 2, depth + 1)

    c = t0.real
    if abs(c) >= 1.0:
        return PanelPartition(tuple(bisect(-1.0, 1.0, eps, 0)), eps, center=None)
    dt_edge = 2.0 * (1.0 - abs(c))
    dt_max = dtmax(eps / 2) if dtmax is not None else dt_edge
    dt_c = min(dt_edge, dt_max)
    ta, tb = c - dt_c / 2, c + dt_c / 2
    if dt_c == dt_edge:
        ta, tb = (ta, 1.0) if c > 0 else (-1.0, tb)
    ta, tb = max(ta, -1.0), min(tb, 1.0)
    left = bisect(-1.0, ta, eps / 4, 0) if ta > -1.0 else []
    right = bisect(tb, 1.0, eps / 4, 0) if tb < 1.0 else []
    panels = tuple(left + [mk(ta, tb, eps / 2)] + right)
    return PanelPartition(panels, eps, center=len(left), dt_max=dt_max)


# ---------------------------------------------------------------------------
# driver for one base panel


@dataclass
class PolarResult:
    value: np.ndarray
    partition: PanelPartition
    n_eval: int
    center_amp: float = 0.0  # max of a^{-1/2} L 2 sum|fhat_k| mu_0 on the centre panel


def _smooth_scale(surface, numerator, target, theta0, p, mu_eps):
    """Factors multiplying the L-estimates.

    Returns (m, c): m = |a^{-1/2} F| for p = 1/2, else
    |a^{-1/2} F |theta - theta0|^(2p-1) / R_lambda^(p-1/2)|; c is the modulus of the
    coefficient of log R_lambda in the p = 1/2 integrand, -a^{-1/2} L f(theta, phi_x),
    coming from mu_k ~ -log(1 - r) as r -> 1 (zero on the axis, where r = 0).
    Both are maximised over Re theta0 and Re theta0 +- |Im theta0|, so that a
    factor vanishing at a pole (the area element) does not hide a root sitting
    next to it.
    """
    h = abs(theta0.imag)
    ts = np.unique(np.clip(theta0.real + np.array([-h, 0.0, h]), 1e-8, np.pi - 1e-8))
    red = reduce(surface, numerator, target, ts, p, mu_eps)
    fa = np.max(np.abs(red.F), axis=1) / np.sqrt(np.asarray(surface.curve.a(ts), dtype=float))
    if p == 0.5:
        c = 0.0
        if not target.on_axis:
            fx = np.array([np.max(np.abs(np.atleast_1d(numerator(t, target.azimuth)))) for t in ts])
            c = float(np.max(red.prefactor * fx))
        return float(np.max(fa)), c
    d2 = (ts - theta0.real) ** 2 + theta0.imag ** 2
    return float(np.max(fa * (d2 / np.real(red.r2_lambda)) ** (p - 0.5))), 0.0


def integrate_base_panel(surface: AxisymSurface, numerator: Callable, target: Target, pm: ParamMap,
                         theta0: complex, p: float, eps: float, n_gl: int = 16) -> PolarResult:
    """S3Q on one base polar panel with tolerance ``eps``."""
    curve = surface.curve
    t0 = complex(geo.map_theta_to_t(pm, theta0))
    scale, clog = _smooth_scale(surface, numerator, target, theta0, p, 1e-16)
    ell, _ = es.node_polynomial_and_weights(leggauss(n_gl)[0])

    def est_theta(tha, thb):
        # an L-estimate at the floor means the panel is resolved to rounding
        if p == 0.5:
            e = es.quad_estimate_lsq(curve, target, n_gl, tha, thb, theta0).value
            el = es.log_quad_estimate(n_gl, tha, thb, theta0) if clog else 0.0
            if e <= es.FLOOR and el <= es.FLOOR:
                return 0.0
            return e * scale + el * clog
        e = es.interp_estimate_lsq(curve, target, n_gl, tha, thb, theta0).value
        if e <= es.FLOOR:
            return 0.0
        sub = ParamMap(tha, thb)
        tl = complex(geo.map_theta_to_t(sub, theta0))
        return e * scale * abs(sub.dtheta) ** (2 - 2 * p) * abs(nu_initial(p, tl)[0])

    def estimate(ta, tb):
        return est_theta(pm.mid + pm.dtheta * ta, pm.mid + pm.dtheta * tb)

    c = theta0.real

    def dtmax(eps_c):
        if target.on_axis:
            dth0 = np.pi * abs(theta0.imag)
        else:
            dth0 = 2.0 * min(c - pm.theta_a, pm.theta_b - c)
        dth0 = min(dth0, 2.0 * min(c - pm.theta_a, pm.theta_b - c))
        if dth0 <= 0:
            return 0.0

        def est_len(length):
            return est_theta(c - length / 2, c + length / 2)

        m = 2 * n_gl + 1 if p == 0.5 else n_gl
        if p == 0.5:
            s0 = 2 * abs(theta0.imag) / dth0
            amp = est_len(dth0) * (s0 + math.sqrt(s0 * s0 + 1)) ** m
        else:
            Lt = es.truncation_point(n_gl)
            tau_max = max(abs(ell(tau)) for tau in (-1.0, 0.0, 1.0))
            raw = 2.0 ** (n_gl - 1) / np.pi * (Lt - 1.0) * tau_max * abs(theta0.imag)
            e0 = es.interp_estimate_lsq(curve, target, n_gl, c - dth0 / 2, c + dth0 / 2, theta0).value
            amp = raw * est_len(dth0) / max(e0, 1e-300)
        dth1 = secant_guess(theta0, amp, eps_c, m)
        length, _ = dtmax_solve(est_len, theta0, eps_c, dth0, dth1)
        return length / pm.dtheta

    part = subdivide(t0, eps, n_gl, p, estimate, dtmax)
    npts = len(part) * n_gl
    mu_eps = max(eps / (10.0 * npts), 1e-16)
    x, w = leggauss(n_gl)
    total = 0.0
    panels = []
    amp = 0.0
    ic = part.center
    for i, P in enumerate(part.panels):
        tha, thb = pm.mid + pm.dtheta * P.ta, pm.mid + pm.dtheta * P.tb
        sub = ParamMap(tha, thb)
        th = geo.map_t_to_theta(sub, x)
        red = reduce(surface, numerator, target, th, p, mu_eps)
        tl = complex(geo.map_theta_to_t(sub, theta0))
        if p == 0.5:
            total = total + gl_panel(red.integrand, w, sub.dtheta)
        else:
            total = total + ssq_panel(h_eval(red, theta0, p), x, tl, p, sub.dtheta)
        panels.append(Panel(P.ta, P.tb, P.eps, P.method, n_gl, tl))
        if ic is None or i == ic:
            bound = 2.0 * np.max(np.sum(np.abs(red.fhat), axis=-1), axis=-1) * mu_initial(p, red.r)[0]
            amp = max(amp, float(np.max(np.abs(red.prefactor) * bound)))
    part = PanelPartition(tuple(panels), part.eps, part.center, part.dt_max, part.diagnostics)
    return PolarResult(np.atleast_1d(total), part, npts, amp)
