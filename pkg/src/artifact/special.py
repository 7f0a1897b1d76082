"""Elliptic integrals and recurrences for the azimuthal and polar basis integrals.

Azimuthal:  omega_k^p(alpha) = int_0^pi cos(k phi) / (1 - 2 alpha cos phi + alpha^2)^p dphi
            mu_k^p(alpha)    = (1 - alpha)^(2p - 1) omega_k^p(alpha)
Polar:      nu_k^p(t0)       = int_{-1}^{1} t^(k-1) / |t - t0|^(2p - 1) dt
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ellipe, ellipk

_PS = (0.5, 1.5, 2.5)

# Decay constants C(p) in mu_k ~ C(p) mu_0 alpha^k and the numerators/denominators
# of the forward-recursion error model E_rec = num / (den * mu_0 * alpha^k).
MU_DECAY = {0.5: 2.0 ** -3, 1.5: 2.0 ** 2, 2.5: 2.0 ** 4}
_EREC = {0.5: (1e-16, 2.0 ** -2), 1.5: (1e-14, 2.0 ** 3), 2.5: (1e-13, 2.0 ** 6)}
K0_CAP = 10 ** 6
STRETCH = 1.5


def _check_p(p, allowed=_PS):
    p = float(p)
    if p not in allowed:
        raise ValueError(f"p must be one of {allowed}, got {p}")
    return p


def elliptic_ke(m):
    """Complete elliptic integrals K(m), E(m) with parameter m = k^2."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 0) or np.any(m >= 1):
        raise ValueError("elliptic_ke requires 0 <= m < 1")
    return ellipk(m), ellipe(m)


def elliptic_e(m):
    """E(m) on the closed interval [0, 1] (E(1) = 1)."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 0) or np.any(m > 1):
        raise ValueError("elliptic_e requires 0 <= m <= 1")
    return ellipe(m)


@dataclass(frozen=True)
class MuTable:
    """mu_0..mu_kmax for each alpha (rows) at fixed p."""

    p: float
    alpha: np.ndarray
    values: np.ndarray
    path: np.ndarray  # per-alpha: "forward" or "stabilized"

    @property
    def kmax(self) -> int:
        return self.values.shape[-1] - 1


def mu_initial(p, alpha):
    """(mu_0, mu_1) for p = 1/2, (mu_0, None) otherwise."""
    p = _check_p(p)
    al = np.asarray(alpha, dtype=float)
    if np.any(al < 0) or np.any(al >= 1):
        raise ValueError("alpha must lie in [0, 1)")
    K, E = elliptic_ke(al * al)
    if p == 0.5:
        mu0 = 2.0 * K
        small = al < 1e-3
        with np.errstate(divide="ignore", invalid="ignore"):
            mu1 = np.where(small, 0.0, 2.0 / np.where(small, 1.0, al) * (K - E))
        # K - E = (pi/2)(m/2 + 3m^2/16 + 15m^3/128 + ...), m = alpha^2
        a2 = al * al
        series = np.pi * al * (0.5 + a2 * (3.0 / 16.0 + a2 * 15.0 / 128.0))
        mu1 = np.where(small, series, mu1)
        return mu0, mu1
    if p == 1.5:
        return 2.0 / (1 + al) * (2.0 / (1 + al) * E - (1 - al) * K), None
    return (2.0 / (3.0 * (1 + al) ** 4)
            * (8.0 * (1 + al * al) * E - (1 - al) * (1 + al) * (5 + 3 * al * al) * K)), None


def mu_forward(p, alpha, kmax: int, lower=None):
    """Forward recursion for mu_0..mu_kmax, shape (len(alpha), kmax+1).

    For p > 1/2 the recursion couples to the p-1 table; ``lower`` may supply
    it (shape (n, >= kmax)), otherwise it is built by this same forward path.
    """
    p = _check_p(p)
    al = np.atleast_1d(np.asarray(alpha, dtype=float))
    kmax = int(kmax)
    out = np.zeros((al.size, kmax + 1))
    tiny = al < 1e-300
    a = np.where(tiny, 1.0, al)
    with np.errstate(over="ignore", invalid="ignore"):
        if p == 0.5:
            mu0, mu1 = mu_initial(p, al)
            out[:, 0] = mu0
            if kmax >= 1:
                out[:, 1] = mu1
            c = (1 + a * a) / a
            for k in range(2, kmax + 1):
                out[:, k] = (c * 2.0 * (k - 1) / (2 * k - 1) * out[:, k - 1]
                             - (2 * k - 3) / (2 * k - 1) * out[:, k - 2])
        else:
            out[:, 0] = mu_initial(p, al)[0]
            if kmax >= 1:
                if lower is None:
                    lower = mu_forward(p - 1, al, kmax - 1)
                lower = np.atleast_2d(lower)
                c1 = (1 + a * a) / (2 * a)
                c2 = (1 - a) ** 2 / (2 * a)
                for k in range(1, kmax + 1):
                    out[:, k] = c1 * out[:, k - 1] - c2 * (p + k - 2) / (p - 1) * lower[:, k - 1]
    out[tiny, 1:] = 0.0
    return out


def mu_recurrence_error_estimate(p, alpha, k, mu0=None):
    """A-priori absolute error of forward recursion up to index k."""
    p = _check_p(p)
    al = np.asarray(alpha, dtype=float)
    if mu0 is None:
        mu0 = mu_initial(p, al)[0]
    num, den = _EREC[p]
    with np.errstate(divide="ignore", over="ignore"):
        return num / (den * mu0 * al ** int(k))


def _k0(p, alpha, mu0, kmax, eps):
    al = np.asarray(alpha, dtype=float)
    ratio = eps / (MU_DECAY[p] * mu0)
    with np.errstate(divide="ignore"):
        kbar = np.where(ratio >= 1.0, 0.0, np.ceil(np.log(ratio) / np.log(al)))
    return np.maximum(np.maximum(np.ceil(STRETCH * kbar), kmax + 1), 2).astype(np.int64)


def _thomas(sub, diag, sup, rhs):
    """Batched tridiagonal solve; arrays of shape (batch, n), row-wise elimination."""
    n = diag.shape[1]
    c = np.empty_like(diag)
    d = np.empty_like(rhs)
    c[:, 0] = sup[:, 0] / diag[:, 0]
    d[:, 0] = rhs[:, 0] / diag[:, 0]
    for i in range(1, n):
        m = diag[:, i] - sub[:, i] * c[:, i - 1]
        c[:, i] = sup[:, i] / m
        d[:, i] = (rhs[:, i] - sub[:, i] * d[:, i - 1]) / m
    x = np.empty_like(rhs)
    x[:, -1] = d[:, -1]
    for i in range(n - 2, -1, -1):
        x[:, i] = d[:, i] - c[:, i] * x[:, i + 1]
    return x


def mu_stabilized(p, alpha, kmax: int, eps: float = 1e-14):
    """mu_0..mu_kmax from a boundary-value solve of the three-term recurrence.

    For every p the coefficients obey
        (k - p + 1) mu_{k+1} - k (alpha + 1/alpha) mu_k + (k + p - 1) mu_{k-1} = 0,
    a consequence of the coupled recurrence and the k -> k+1 shift of the same
    relations.  Multiplied through by alpha, the system with mu_0 pinned and
    mu_{k0} = 0 is diagonally dominant, so elimination without pivoting is safe.
    """
    p = _check_p(p)
    al = np.atleast_1d(np.asarray(alpha, dtype=float))
    kmax = int(kmax)
    mu0 = mu_initial(p, al)[0]
    out = np.zeros((al.size, kmax + 1))
    out[:, 0] = mu0
    if kmax == 0:
        return out
    live = al >= 1e-300
    if not np.any(live):
        return out
    k0s = _k0(p, al[live], mu0[live], kmax, eps)
    if np.max(k0s) > K0_CAP:
        raise ValueError(f"stabilized recurrence needs k0={int(np.max(k0s))} > {K0_CAP}")
    # batch alphas of similar k0 so the work arrays stay small
    idx = np.flatnonzero(live)[np.argsort(k0s, kind="stable")]
    k0_sorted = np.sort(k0s, kind="stable")
    start = 0
    while start < idx.size:
        stop = start + 1
        while stop < idx.size and (stop - start + 1) * k0_sorted[stop] <= _BATCH:
            stop += 1
        sel = idx[start:stop]
        out[sel, 1:] = _stabilized_block(p, al[sel], mu0[sel], int(k0_sorted[stop - 1]), kmax)
        start = stop
    return out


_BATCH = 2 ** 22


def _stabilized_block(p, a, mu0, k0, kmax):
    k = np.arange(1, k0, dtype=float)[None, :]
    A = a[:, None]
    sub = A * (k + p - 1)
    diag = -k * (1 + A * A)
    sup = A * (k - p + 1)
    rhs = np.zeros_like(diag)
    rhs[:, 0] = -A[:, 0] * p * mu0
    sub[:, 0] = 0.0
    sup[:, -1] = 0.0
    if not np.all(np.abs(diag) >= (np.abs(sub) + np.abs(sup)) * (1 - 1e-12)):
        raise ArithmeticError("tridiagonal system lost diagonal dominance")
    return _thomas(sub, diag, sup, rhs)[:, :kmax]


def mu_table(p, alpha, kmax: int, eps: float = 1e-14) -> MuTable:
    """Forward recursion where its error model allows it, stabilized elsewhere."""
    p = _check_p(p)
    al = np.atleast_1d(np.asarray(alpha, dtype=float))
    kmax = int(kmax)
    mu0 = mu_initial(p, al)[0]
    erec = mu_recurrence_error_estimate(p, al, kmax, mu0)
    # forward also when the recursion does not amplify its base error: a
    # requested eps below that floor cannot be met by the stabilized path either
    fwd = (erec <= eps) | (erec <= 10.0 * mu_recurrence_error_estimate(p, al, 0, mu0))
    if kmax == 0:
        fwd[:] = True
    vals = np.empty((al.size, kmax + 1))
    if np.any(fwd):
        lower = None
        if p > 0.5 and kmax >= 1:
            lower = mu_table(p - 1, al[fwd], kmax - 1, eps).values
        vals[fwd] = mu_forward(p, al[fwd], kmax, lower=lower)
    if np.any(~fwd):
        vals[~fwd] = mu_stabilized(p, al[~fwd], kmax, eps)
    return MuTable(p, al, vals, np.where(fwd, "forward", "stabilized"))


def omega(p, alpha, k, eps: float = 1e-14):
    """omega_k^p(alpha); symmetric in k."""
    p = _check_p(p)
    k = abs(int(k))
    al = np.atleast_1d(np.asarray(alpha, dtype=float))
    mu = mu_table(p, al, k, eps).values[:, k]
    out = mu / (1 - al) ** (2 * p - 1)
    return out if np.ndim(alpha) else float(out[0])


# ---------------------------------------------------------------------------
# polar integrals


@dataclass(frozen=True)
class NuTable:
    p: float
    t0: complex
    values: np.ndarray  # nu_1..nu_n
    path: str


def _nu5_first(tr, ti):
    """nu_1^{5/2} = int_{-B}^{A} du / (u^2 + c^2)^2 with A = 1 - tr, B = 1 + tr."""
    A, B, c = 1.0 - tr, 1.0 + tr, ti
    delta = abs(tr) - 1.0
    if c == 0.0 or (delta > 0 and c < 0.05 * delta):
        # (u^2 + c^2)^-2 = sum_j (-1)^j (j+1) c^(2j) u^(-4-2j); u stays away from 0
        total = 0.0
        for j in range(8):
            m = 4 + 2 * j
            prim = (A ** (1 - m) - (-B) ** (1 - m)) / (1 - m)
            total += (-1) ** j * (j + 1) * c ** (2 * j) * prim
        return total
    return (A / (A * A + c * c) + B / (B * B + c * c) + _nu3_first(tr, ti)) / (2 * c * c)


def _nu3_first(tr, ti):
    """nu_1^{3/2}: atan((1-tr)/ti) + atan((1+tr)/ti) over ti, merged into one atan2."""
    if ti == 0.0:
        return 2.0 / (tr * tr - 1.0)
    AB = (1.0 - tr) * (1.0 + tr)
    return np.arctan2(2.0 * ti, ti * ti - AB) / ti


def nu_initial(p, t0):
    """(nu_1, nu_2) in closed form."""
    p = _check_p(p, (1.5, 2.5))
    t0 = complex(t0)
    tr, ti = t0.real, abs(t0.imag)
    if ti == 0.0 and abs(tr) <= 1.0:
        raise ValueError("t0 must not lie on [-1, 1]")
    A2, B2 = (1 - tr) ** 2 + ti * ti, (1 + tr) ** 2 + ti * ti
    if p == 1.5:
        n1 = _nu3_first(tr, ti)
        n2 = 0.5 * np.log(A2 / B2) + tr * n1
    else:
        n1 = _nu5_first(tr, ti)
        n2 = 0.5 * (1.0 / B2 - 1.0 / A2) + tr * n1
    if tr == 0.0:
        n2 = 0.0
    return float(n1), float(n2)


_GL64 = leggauss(64)


def _nu_gl(p, t0, ks):
    t, w = _GL64
    den = ((t - t0.real) ** 2 + t0.imag ** 2) ** (p - 0.5)
    return np.array([np.sum(w * t ** (k - 1) / den) for k in ks])


def nu_seed_error(p, t0, n: int, n_gl: int = 64) -> float:
    """Pole-based estimate of the Gauss-Legendre error in the seed nu_n.

    The weight has poles at t0 and conj(t0) (simple for p=3/2, double for
    p=5/2); the remainder kernel there is about 2 pi / rho^(2 n_gl + 1).
    """
    t0 = complex(t0)
    sq = np.sqrt(t0 + 1) * np.sqrt(t0 - 1)
    rad = abs(t0 + sq)
    if rad <= 1 + 1e-12:
        return np.inf
    m = 2 * n_gl + 1
    ti = max(abs(t0.imag), 1e-3)
    # combine in logs: |t0|^(n-1) and rho^-m can both leave double range
    if p == 1.5:
        lres = (n - 1) * np.log(abs(t0)) - np.log(2 * ti)
    else:
        lres = (n - 1) * np.log(abs(t0)) - 2 * np.log(2 * ti) + np.log(m / max(abs(sq), 1e-300))
    return float(4 * np.pi * np.exp(min(lres - m * np.log(rad), 700.0)))


def _nu_forward(p, t0, n, lower=None):
    tr, ti = t0.real, abs(t0.imag)
    mod2 = tr * tr + ti * ti
    out = np.zeros(max(n, 2))
    out[0], out[1] = nu_initial(p, t0)
    for k in range(3, n + 1):
        if p == 1.5:
            src = (1 - (-1) ** (k - 2)) / (k - 2)
        else:
            src = lower[k - 3]
        out[k - 1] = src + 2 * tr * out[k - 2] - mod2 * out[k - 3]
    return out[:n]


def _nu_backward(p, t0, n, lower=None):
    tr, ti = t0.real, abs(t0.imag)
    mod2 = tr * tr + ti * ti
    out = np.zeros(n)
    out[n - 2:] = _nu_gl(p, t0, [n - 1, n])
    n1, n2 = nu_initial(p, t0)
    # nu_{k-2} = (src_k + 2 tr nu_{k-1} - nu_k) / |t0|^2
    for k in range(n, 4, -1):
        src = (1 - (-1) ** (k - 2)) / (k - 2) if p == 1.5 else lower[k - 3]
        out[k - 3] = (src + 2 * tr * out[k - 2] - out[k - 1]) / mod2
    out[0], out[1] = n1, n2
    return out


def nu_table(p, t0, n: int, eps: float = 1e-14, forward_max_n: int = 40) -> NuTable:
    """nu_1..nu_n; forward recursion near the interval, backward further out."""
    p = _check_p(p, (1.5, 2.5))
    t0 = complex(t0.real, abs(t0.imag)) if isinstance(t0, complex) else complex(t0)
    if t0.imag == 0.0 and abs(t0.real) <= 1.0:
        raise ValueError("t0 must not lie on [-1, 1]")
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    lower = None
    if p == 2.5:
        lower = nu_table(1.5, t0, max(n, 2), eps, forward_max_n).values
    r = abs(t0)
    path = "forward"
    if n > 2 and not (r <= 1.1 and (n <= forward_max_n or r <= 1.0)):
        scale = max(abs(v) for v in nu_initial(p, t0))
        if nu_seed_error(p, t0, n) <= eps * max(scale, 1e-300):
            path = "backward"
    if path == "forward":
        vals = _nu_forward(p, t0, n, lower)
    else:
        vals = _nu_backward(p, t0, n, lower)
    if t0.real == 0.0:
        vals = vals.copy()
        vals[1::2] = 0.0
    return NuTable(p, t0, vals[:n], path)
