"""Kernels, densities and end-to-end evaluation of layer potentials.

Each target is first tested with the regular-quadrature error estimate (the
gate); targets that fail it are evaluated with the singularity swap surface
quadrature (azimuthal reduction followed by adaptive polar panels), and the
closest ones are flagged when floating-point cancellation is predicted to
exceed the tolerance.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial.legendre import leggauss
from scipy.special import beta as beta_fn

from . import estimates as es
from . import geometry as geo
from . import polar
from . import roots as rt
from .azimuthal import reduce
from .geometry import AxisymSurface, GeneratingCurve, ParamMap, Target

EPS_MACHINE = 2.2e-16
METHODS = ("regular", "s3q", "flagged")


class OracleError(RuntimeError):
    """The reference quadrature did not converge within its budget."""


class UnderResolvedWarning(RuntimeWarning):
    """Trailing Legendre/Fourier coefficients of the density are not small."""


# ---------------------------------------------------------------------------
# densities


def fig1_density(theta, phi):
    """sin(5 theta) exp(-cos^2 phi) + 1.03."""
    return np.sin(5 * theta) * np.exp(-np.cos(phi) ** 2) + 1.03


def s10_density(theta, phi):
    """1 + sin(6 phi + theta) sin^2 theta."""
    return 1.0 + np.sin(6 * phi + theta) * np.sin(theta) ** 2


def const_density(value=1.0) -> Callable:
    """Constant scalar or vector density."""
    v = np.asarray(value)

    def sigma(theta, phi):
        shape = np.broadcast(np.asarray(theta), np.asarray(phi)).shape
        base = np.ones(shape, dtype=np.result_type(np.asarray(theta), np.asarray(phi), float))
        return base * v if v.ndim == 0 else base[..., None] * v

    return sigma


NAMED_DENSITIES = {"fig1": fig1_density, "s10": s10_density, "const": const_density(1.0)}


class GridDensity:
    """Density given by samples on the base grid of ``surface``.

    Real arguments are interpolated (barycentric Lagrange per polar panel,
    trigonometric in phi).  Complex arguments, needed by the gate, use a
    quadratic Taylor expansion about the nearest grid node.
    """

    def __init__(self, surface: AxisymSurface, values):
        values = np.asarray(values, dtype=float)
        nth = surface.n_t * len(surface.panels)
        if values.shape[:2] != (nth, surface.n_phi):
            raise ValueError(f"grid density needs shape ({nth}, {surface.n_phi}, ...), got {values.shape}")
        self.surface = surface
        self.values = values
        self.theta, _ = surface.theta_nodes()
        self.phi, _ = surface.phi_nodes()
        self._nodes = leggauss(surface.n_t)[0]
        _, self._bw = es.node_polynomial_and_weights(self._nodes)

    @classmethod
    def sample(cls, surface: AxisymSurface, sigma: Callable) -> "GridDensity":
        th, _ = surface.theta_nodes()
        ph, _ = surface.phi_nodes()
        return cls(surface, sigma(th[:, None], ph[None, :]))

    def _theta_rows(self, th):
        """Polar interpolation: rows of grid-phi values at the polar angles ``th``."""
        n = self.surface.n_t
        out = np.empty((th.size,) + self.values.shape[1:])
        edges = np.array([p[1] for p in self.surface.panels])
        idx = np.minimum(np.searchsorted(edges, th, side="left"), len(edges) - 1)
        for j, pm in enumerate(self.surface.param_maps):
            m = idx == j
            if np.any(m):
                t = geo.map_theta_to_t(pm, th[m])
                out[m] = polar.barycentric_interpolate(self._nodes, self.values[j * n:(j + 1) * n],
                                                       t, self._bw)
        return out

    def _real(self, theta, phi):
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        shape = theta.shape
        uth, inv = np.unique(theta.ravel(), return_inverse=True)
        rows = self._theta_rows(uth)[inv]                       # (N, n_phi, ...)
        nphi = self.surface.n_phi
        pos = np.mod(phi.ravel(), 2 * np.pi) * nphi / (2 * np.pi)
        k = np.rint(pos)
        if np.all(np.abs(pos - k) < 1e-9):
            vals = rows[np.arange(rows.shape[0]), k.astype(int) % nphi]
        else:
            kmax = (nphi - 1) // 2
            c = np.fft.fft(rows, axis=1) / nphi
            ks = np.r_[0:kmax + 1, -kmax:0]
            cc = np.concatenate([c[:, :kmax + 1], c[:, nphi - kmax:]], axis=1)
            e = np.exp(1j * ks[None, :] * phi.ravel()[:, None])
            if cc.ndim == 3:
                e = e[..., None]
            vals = np.real(np.sum(cc * e, axis=1))
        return vals.reshape(shape + self.values.shape[2:])

    def _taylor(self, theta, phi, h=1e-3):
        theta, phi = np.broadcast_arrays(np.asarray(theta, complex), np.asarray(phi, complex))
        tr, pr = theta.real.ravel(), phi.real.ravel()
        it = np.argmin(np.abs(tr[:, None] - self.theta[None, :]), axis=1)
        dp = np.angle(np.exp(1j * (pr[:, None] - self.phi[None, :])))
        ip = np.argmin(np.abs(dp), axis=1)
        t0, p0 = self.theta[it], self.phi[ip]
        dt = theta.ravel() - t0
        dph = phi.ravel() - p0 - 2 * np.pi * np.rint((pr - p0) / (2 * np.pi))

        def f(a, b):
            return self._real(a, b)

        f0 = f(t0, p0)
        ft = (f(t0 + h, p0) - f(t0 - h, p0)) / (2 * h)
        fp = (f(t0, p0 + h) - f(t0, p0 - h)) / (2 * h)
        ftt = (f(t0 + h, p0) - 2 * f0 + f(t0 - h, p0)) / h ** 2
        fpp = (f(t0, p0 + h) - 2 * f0 + f(t0, p0 - h)) / h ** 2
        ftp = (f(t0 + h, p0 + h) - f(t0 + h, p0 - h) - f(t0 - h, p0 + h) + f(t0 - h, p0 - h)) / (4 * h * h)
        ex = (slice(None),) + (None,) * (f0.ndim - 1)
        dt, dph = dt[ex], dph[ex]
        val = (f0 + ft * dt + fp * dph + 0.5 * ftt * dt * dt + ftp * dt * dph + 0.5 * fpp * dph * dph)
        return val.reshape(theta.shape + self.values.shape[2:])

    def __call__(self, theta, phi):
        if np.iscomplexobj(theta) or np.iscomplexobj(phi):
            return self._taylor(theta, phi)
        return self._real(theta, phi)


def resolution_check(surface: AxisymSurface, density: Callable, tol: float = 1e-10) -> float:
    """Relative size of the trailing Legendre / Fourier coefficients of ``density``.

    Warns with :class:`UnderResolvedWarning` above ``tol``.
    """
    th, _ = surface.theta_nodes()
    ph, _ = surface.phi_nodes()
    v = np.asarray(density(th[:, None], ph[None, :]), dtype=float)
    v = v.reshape(v.shape[0], v.shape[1], -1)
    scale = max(np.max(np.abs(v)), 1e-300)
    n = surface.n_t
    x, w = leggauss(n)
    worst = 0.0
    # Legendre coefficients per panel by Gauss quadrature
    P = npleg.legvander(x, n - 1) * w[:, None] * (2 * np.arange(n) + 1) / 2
    for j in range(len(surface.panels)):
        c = np.tensordot(P, v[j * n:(j + 1) * n], axes=(0, 0))
        worst = max(worst, float(np.max(np.abs(c[-2:]))) / scale)
    c = np.fft.fft(v, axis=1) / surface.n_phi
    kmax = (surface.n_phi - 1) // 2
    tail = np.abs(np.concatenate([c[:, kmax - 1:kmax + 1], c[:, surface.n_phi - kmax:surface.n_phi - kmax + 2]], axis=1))
    worst = max(worst, float(np.max(tail)) / scale)
    if worst > tol:
        warnings.warn(f"density trailing coefficients {worst:.2e} exceed {tol:.0e}",
                      UnderResolvedWarning, stacklevel=2)
    return worst


# ---------------------------------------------------------------------------
# kernels


def _slp(curve, sigma, target):
    def f(theta, phi):
        _, jac = geo.normal_and_jacobian(curve, theta, phi)
        return sigma(theta, phi) * jac
    return f


def _dlp(curve, sigma, target):
    x = target.point

    def f(theta, phi):
        nv = geo.area_vector(curve, theta, phi)
        g = geo.surface_point(curve, theta, phi)
        return sigma(theta, phi) * np.sum(nv * (g - x), axis=-1)
    return f


def _stokes(curve, sigma, target):
    x = target.point

    def f(theta, phi):
        nv = geo.area_vector(curve, theta, phi)
        r = x - geo.surface_point(curve, theta, phi)
        s = np.asarray(sigma(theta, phi))
        if s.shape[-1:] != (3,):
            raise ValueError("the Stokes double layer needs a 3-vector density")
        return -6.0 * r * (np.sum(r * s, axis=-1) * np.sum(r * nv, axis=-1))[..., None]
    return f


@dataclass(frozen=True)
class Kernel:
    """Layer-potential kernel k(x, y) / |y - x|^(2p)."""

    name: str
    p: float
    arity: int
    builder: Callable

    def __post_init__(self):
        if 2 * self.p not in (1, 3, 5):
            raise ValueError("2p must be 1, 3 or 5")

    def numerator(self, curve: GeneratingCurve, density: Callable, target: Target) -> Callable:
        """f(theta, phi): kernel numerator times density times area element."""
        return self.builder(curve, density, target)


LAPLACE_SLP = Kernel("laplace_slp", 0.5, 1, _slp)
LAPLACE_DLP = Kernel("laplace_dlp", 1.5, 1, _dlp)
STOKES_DLP = Kernel("stokes_dlp", 2.5, 3, _stokes)
KERNELS = {k.name: k for k in (LAPLACE_SLP, LAPLACE_DLP, STOKES_DLP)}


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class QuadConfig:
    eps: float = 1e-6
    n_gl: int = 16
    eps_machine: float = EPS_MACHINE
    force: str | None = None  # "regular" or "s3q" bypasses the gate

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 1 <= self.n_gl <= 40:
            raise ValueError("n_gl must lie in [1, 40]")
        if self.force not in (None, "regular", "s3q"):
            raise ValueError("force must be None, 'regular' or 's3q'")


@dataclass
class EvalResult:
    target: Target
    value: np.ndarray
    method: str
    gate: float
    npan: int = 0
    d: float = np.nan
    theta0: complex | None = None
    partitions: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


def regular_quadrature(surface: AxisymSurface, density: Callable, kernel: Kernel, target: Target):
    """Tensor Gauss-Legendre x trapezoidal rule on the base grid."""
    th, wt = surface.theta_nodes()
    ph, wp = surface.phi_nodes()
    f = np.asarray(kernel.numerator(surface.curve, density, target)(th[:, None], ph[None, :]))
    if f.ndim == 2:
        f = f[..., None]
    R = geo.r2(surface.curve, th[:, None], ph[None, :], target) ** kernel.p
    return np.tensordot(wt[:, None] * wp[None, :] / R, f, axes=([0, 1], [0, 1]))


def distance_estimate(curve: GeneratingCurve, theta0: complex) -> float:
    """|Im theta0| times the speed of the generating curve at Re theta0."""
    drho, dz = curve.dprofile(theta0.real)
    return float(abs(theta0.imag) * math.hypot(float(drho), float(dz)))


def cancellation_scale(p: float, amp: float, speed: float) -> float:
    """Integral of the un-regularized integrand over the centre panel, up to d^{-2(p-1)}.

    The integrand behaves like amp / (speed^2 ((theta - Re theta0)^2 + Im theta0^2))^(p-1/2),
    whose integral is amp B(1/2, p-1) / (speed d^{2(p-1)}); p = 1/2 has no
    power singularity and is bounded by amp * pi.
    """
    if p == 0.5:
        return amp * np.pi
    return amp * float(beta_fn(0.5, p - 1.0)) / speed


def cancellation_flag(p: float, d: float, scale: float, eps: float, eps_machine: float = EPS_MACHINE) -> bool:
    """True when eps_machine * scale / d^{2(p-1)} exceeds eps."""
    if d <= 0:
        return True
    return bool(eps_machine * scale / d ** (2.0 * (p - 1.0)) > eps)


def _theta0(surface: AxisymSurface, target: Target, pm: ParamMap = geo.FULL) -> complex:
    curve = surface.curve
    root = rt.theta0_lambda(curve, target, geo.nearest_grid_theta(surface, target), pm)
    if not root.converged:
        raise ArithmeticError(f"polar root did not converge (residual {root.residual:.2e})")
    return complex(root.value)


def gate_estimate(surface: AxisymSurface, density: Callable, kernel: Kernel, target: Target,
                  theta0: complex | None = None) -> float:
    num = kernel.numerator(surface.curve, density, target)
    try:
        return es.regular_surface_estimate(surface, num, kernel.p, target, theta0)
    except (ValueError, ZeroDivisionError, ArithmeticError, FloatingPointError):
        return np.inf


def s3q_evaluate(surface: AxisymSurface, density: Callable, kernel: Kernel, target: Target,
                 cfg: QuadConfig, theta0: complex | None = None):
    """S3Q value, partitions, centre amplitude and the root used."""
    curve = surface.curve
    num = kernel.numerator(curve, density, target)
    if theta0 is None:
        theta0 = _theta0(surface, target)
    pms = surface.param_maps
    eps_b = cfg.eps / len(pms)
    total = np.zeros(kernel.arity)
    parts, amp = [], 0.0
    for pm in pms:
        th0 = theta0
        if len(pms) > 1 and curve.is_spheroid and not target.on_axis:
            th0 = rt.theta0_spheroid(curve.params["a"], curve.params["b"], target, pm).value
        res = polar.integrate_base_panel(surface, num, target, pm, th0, kernel.p, eps_b, cfg.n_gl)
        total = total + res.value
        parts.append(res.partition)
        amp = max(amp, res.center_amp)
    return total, parts, amp, theta0


def evaluate_target(surface: AxisymSurface, density: Callable, kernel: Kernel, target: Target,
                    cfg: QuadConfig = QuadConfig()) -> EvalResult:
    nan = np.full(kernel.arity, np.nan)
    try:
        theta0 = _theta0(surface, target)
    except (ValueError, ArithmeticError) as exc:
        theta0 = None
        root_err = str(exc)
    else:
        root_err = None
    gate = np.inf if theta0 is None else gate_estimate(surface, density, kernel, target, theta0)
    use_regular = cfg.force == "regular" or (cfg.force is None and gate <= cfg.eps)
    if use_regular:
        val = regular_quadrature(surface, density, kernel, target)
        d = distance_estimate(surface.curve, theta0) if theta0 is not None else np.nan
        return EvalResult(target, val, "regular", gate, 0, d, theta0)
    if theta0 is None:
        return EvalResult(target, nan, "flagged", gate, diagnostics={"error": root_err})
    try:
        val, parts, amp, theta0 = s3q_evaluate(surface, density, kernel, target, cfg, theta0)
    except (ValueError, ArithmeticError, RecursionError, np.linalg.LinAlgError) as exc:
        return EvalResult(target, nan, "flagged", gate, theta0=theta0, diagnostics={"error": str(exc)})
    d = distance_estimate(surface.curve, theta0)
    drho, dz = surface.curve.dprofile(theta0.real)
    scale = cancellation_scale(kernel.p, amp, math.hypot(float(drho), float(dz)))
    flagged = cancellation_flag(kernel.p, d, scale, cfg.eps, cfg.eps_machine)
    npan = sum(len(pp) for pp in parts)
    return EvalResult(target, val, "flagged" if flagged else "s3q", gate, npan, d, theta0, parts,
                      {"scale": scale})


def evaluate(surface: AxisymSurface, density: Callable, kernel: Kernel, targets: Sequence,
             cfg: QuadConfig = QuadConfig()) -> list[EvalResult]:
    """Evaluate the layer potential at every target (results in input order)."""
    resolution_check(surface, density)
    out = []
    for t in targets:
        tg = t if isinstance(t, Target) else surface.target(t)
        out.append(evaluate_target(surface, density, kernel, tg, cfg))
    return out


# ---------------------------------------------------------------------------
# reference quadratures


def _graded_breaks(lo, hi, c, w, levels):
    """Breakpoints on [lo, hi] refined geometrically towards c down to width ~ w 2^-levels."""
    br = {lo, hi}
    if lo < c < hi:
        br.add(c)
    span = hi - lo
    j = 0
    while True:
        h = span * 2.0 ** (-j)
        if h < w * 2.0 ** (-levels):
            break
        for s in (c - h, c + h):
            if lo < s < hi:
                br.add(s)
        j += 1
    return np.array(sorted(br))


def _composite(br, n):
    x, w = leggauss(n)
    mid, half = 0.5 * (br[1:] + br[:-1]), 0.5 * (br[1:] - br[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _near_point(surface: AxisymSurface, target: Target):
    """Polar angle of closest approach and a length scale of the near-singularity."""
    curve = surface.curve
    try:
        th0 = _theta0(surface, target)
        c = float(np.clip(th0.real, 0.0, np.pi))
        w = max(abs(th0.imag), 1e-12)
    except (ValueError, ArithmeticError):
        c, w = geo.nearest_grid_theta(surface, target), 1e-3
    return c, w


def _theta_breaks(surface, c, w, levels):
    br = _graded_breaks(0.0, np.pi, c, w, levels)
    edges = [p[0] for p in surface.panels[1:]]
    return np.unique(np.concatenate([br, edges]))


def reduced_oracle(surface: AxisymSurface, density: Callable, kernel: Kernel, target: Target,
                   tol: float = 1e-11, n_phi: int | None = None, max_refine: int = 3):
    """Polar integral of the azimuthally reduced integrand by graded composite quadrature.

    The phi-direction is exact for the trigonometric interpolant with ``n_phi``
    points (default: the surface's).  Two resolutions must agree to ``tol``
    (relative to the integral of the absolute integrand).
    """
    surf = surface if n_phi is None else AxisymSurface(surface.curve, surface.panels, surface.n_t, n_phi)
    num = kernel.numerator(surf.curve, density, target)
    c, w = _near_point(surf, target)
    levels, n = 6, 24
    for _ in range(max_refine + 1):
        br = _theta_breaks(surf, c, w, levels)
        vals = []
        for m in (n, n + 8):
            th, wt = _composite(br, m)
            red = reduce(surf, num, target, th, kernel.p, 1e-16)
            vals.append((wt @ red.integrand, wt @ np.abs(red.integrand)))
        diff = np.max(np.abs(vals[0][0] - vals[1][0]))
        if diff <= tol * max(np.max(vals[1][1]), 1e-300):
            return vals[1][0]
        levels, n = levels + 6, n + 8
    raise OracleError(f"reduced oracle did not converge (difference {diff:.2e})")


def oracle_evaluate(surface: AxisymSurface, density: Callable, kernel: Kernel, target: Target,
                    tol: float = 1e-13, max_refine: int = 2, block: int = 64):
    """Two-dimensional graded tensor quadrature of the layer potential.

    Breakpoints are bisected towards the point of closest approach in both
    variables; resolution is increased until two levels agree to ``tol``
    (relative to the integral of the absolute integrand).
    """
    curve = surface.curve
    num = kernel.numerator(curve, density, target)
    c, w = _near_point(surface, target)
    alpha = target.azimuth
    d = max(distance_estimate(curve, complex(c, w)), 1e-12)
    wphi = d / max(target.rho, 1e-300) if not target.on_axis else np.pi
    levels, n = 4, 20

    def run(br_t, br_p, m):
        th, wt = _composite(br_t, m)
        ph, wp = _composite(br_p, m)
        tot = 0.0
        atot = 0.0
        for i in range(0, th.size, block):
            t = th[i:i + block]
            f = np.asarray(num(t[:, None], ph[None, :]))
            if f.ndim == 2:
                f = f[..., None]
            g = f / (geo.r2(curve, t[:, None], ph[None, :], target) ** kernel.p)[..., None]
            ww = wt[i:i + block, None] * wp[None, :]
            tot = tot + np.tensordot(ww, g, axes=([0, 1], [0, 1]))
            atot = atot + np.tensordot(ww, np.abs(g), axes=([0, 1], [0, 1]))
        return tot, atot

    for _ in range(max_refine + 1):
        br_t = _theta_breaks(surface, c, w, levels)
        br_p = _graded_breaks(alpha - np.pi, alpha + np.pi, alpha, min(wphi, np.pi), levels)
        v1, _ = run(br_t, br_p, n)
        v2, a2 = run(br_t, br_p, n + 8)
        diff = np.max(np.abs(v1 - v2))
        if diff <= tol * max(np.max(a2), 1e-300):
            return v2
        levels, n = levels + 4, n + 8
    raise OracleError(f"2D oracle did not converge (difference {diff:.2e})")
