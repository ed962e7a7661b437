"""The cosine-power localization window and its renormalized potentials.

chi(x) = C_M (zeta(x1) zeta(x2) zeta(x3))^(M+2) with zeta(y) = cos(pi y) on
|y| <= 1/2 and 0 beyond, M in 4N. C_M is fixed by int chi^2 = 1; the Wallis
integral gives C_M = (4^n / binom(2n, n))^(3/2) with n = M + 2. chi is C^M,
separable, and chi = f^2 with f = chi^(1/2) having M/2 derivatives.

The renormalized potentials divide by the autocorrelation:

    W  = v / (chi*chi)(x/ell),
    W1 = g / (chi*chi)(x/ell),
    W2 = (g + g omega) / (chi*chi)(x/ell).

(chi*chi) is separable into 1-d autocorrelations of cos^n; radial sampling
uses the coordinate-axis direction (the quadratic Taylor term of chi*chi is
isotropic, so the direction choice enters only at fourth order in |x|/ell,
far below the bounds being checked).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .potentials import RadialPotential
from .quadrature import gl_nodes
from .scattering import RadialKernel, ScatteringSolution, g_of

__all__ = [
    "LocalizationFunction",
    "chi_normalization",
    "log_chi_normalization",
    "cos_power_coefficients",
    "chi_value",
    "chi_hat",
    "chi_hat_axis",
    "chi_decay_constant",
    "max_hessian_entry",
    "chi_autocorr_1d",
    "chi_autocorr_radial",
    "chi_autocorr_3d",
    "renormalized_potential",
    "smeared_pair_integral",
    "FourierResidualReport",
    "fourier_residual_check",
]


def _check_M(M: int) -> int:
    if M <= 0 or M % 4 != 0:
        raise ValueError("M must be a positive multiple of 4")
    return M


def log_chi_normalization(M: int) -> float:
    """log C_M via log-gamma, safe for large M."""
    n = _check_M(M) + 2
    log_binom = math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1)
    return 1.5 * (n * math.log(4.0) - log_binom)


def chi_normalization(M: int) -> float:
    """C_M = (4^n / binom(2n, n))^(3/2), n = M + 2."""
    return math.exp(log_chi_normalization(M))


@lru_cache(maxsize=None)
def cos_power_coefficients(n: int) -> tuple:
    """Coefficients c_m with cos^n(pi y) = sum_{m} c_m cos(m pi y), m = 0, 2, .., n."""
    if n % 2 != 0:
        raise ValueError("n must be even")
    coeffs = {}
    scale = 0.5**n
    for j in range(n + 1):
        m = abs(n - 2 * j)
        coeffs[m] = coeffs.get(m, 0.0) + math.comb(n, j) * scale
    ms = sorted(coeffs)
    return tuple((m, coeffs[m]) for m in ms)


def _h(y, n: int):
    """cos^n(pi y) on |y| <= 1/2, zero outside."""
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) <= 0.5
    return np.where(inside, np.cos(np.pi * y) ** n, 0.0)


def chi_value(x, M: int):
    """chi at 3-vector(s) x, shape (..., 3)."""
    n = _check_M(M) + 2
    x = np.asarray(x, dtype=float)
    return chi_normalization(M) * _h(x[..., 0], n) * _h(x[..., 1], n) * _h(x[..., 2], n)


def _sin_over(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-8
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(xs) / xs)


def _h_hat(q, n: int):
    """1-d transform int_{-1/2}^{1/2} cos^n(pi y) e^{-i q y} dy (real, even)."""
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    for m, c in cos_power_coefficients(n):
        term = 0.5 * (_sin_over((m * np.pi - q) / 2.0) + _sin_over((m * np.pi + q) / 2.0))
        out = out + c * term
    return out


def chi_hat(k, M: int):
    """Fourier transform of chi at 3-vector(s) k: C_M prod_i h_hat(k_i)."""
    n = _check_M(M) + 2
    k = np.asarray(k, dtype=float)
    return chi_normalization(M) * _h_hat(k[..., 0], n) * _h_hat(k[..., 1], n) * _h_hat(k[..., 2], n)


def chi_hat_axis(k, M: int):
    """chi_hat along a coordinate axis: chi_hat((k, 0, 0))."""
    n = _check_M(M) + 2
    k = np.asarray(k, dtype=float)
    return chi_normalization(M) * _h_hat(k, n) * _h_hat(np.zeros(()), n) ** 2


def chi_decay_constant(M: int, order: int = 48) -> float:
    """C_chi = int |(1 - Laplacian)^(M/2) chi|, from the exact cosine series.

    The operator acts diagonally on the product cosine basis with factor
    (1 + pi^2 (m1^2 + m2^2 + m3^2))^(M/2); differentiation is exact. Only
    meant for moderate M (the factor grows like (pi^2 n^2)^(M/2)).
    """
    n = _check_M(M) + 2
    if M > 16:
        raise ValueError("decay constant evaluation is limited to M <= 16")
    coeffs = cos_power_coefficients(n)
    ms = np.array([m for m, _ in coeffs], dtype=float)
    cs = np.array([c for _, c in coeffs])
    x, w = gl_nodes(order)
    y = x - 0.5  # cube [-1/2, 1/2]
    cos_table = np.cos(np.pi * np.outer(ms, y))  # (n_m, n_y)
    lam = (1.0 + math.pi**2 * (ms[:, None, None] ** 2
                               + ms[None, :, None] ** 2
                               + ms[None, None, :] ** 2)) ** (M / 2.0)
    coef3 = cs[:, None, None] * cs[None, :, None] * cs[None, None, :] * lam
    field = np.einsum("abc,ai,bj,ck->ijk", coef3, cos_table, cos_table, cos_table)
    volume_weights = w[:, None, None] * w[None, :, None] * w[None, None, :]
    return chi_normalization(M) * float(np.sum(np.abs(field) * volume_weights))


def max_hessian_entry(M: int, grid: int = 4001) -> float:
    """max_{i,j} sup |d_i d_j chi|, from exact series derivatives on a fine grid."""
    n = _check_M(M) + 2
    coeffs = cos_power_coefficients(n)
    y = np.linspace(-0.5, 0.5, grid)
    h = np.zeros_like(y)
    hp = np.zeros_like(y)
    hpp = np.zeros_like(y)
    for m, c in coeffs:
        h += c * np.cos(m * np.pi * y)
        hp += -c * m * np.pi * np.sin(m * np.pi * y)
        hpp += -c * (m * np.pi) ** 2 * np.cos(m * np.pi * y)
    cm = chi_normalization(M)
    diag = cm * np.max(np.abs(hpp)) * np.max(h) ** 2
    cross = cm * np.max(np.abs(hp)) ** 2 * np.max(h)
    return float(max(diag, cross))


@dataclass(frozen=True)
class LocalizationFunction:
    """Window data: regularity M (multiple of 4), exponent n = M + 2, C_M."""

    M: int

    def __post_init__(self):
        _check_M(self.M)

    @property
    def n(self) -> int:
        return self.M + 2

    @property
    def C_M(self) -> float:
        return chi_normalization(self.M)

    @property
    def log_C_M(self) -> float:
        return log_chi_normalization(self.M)


# -- autocorrelation -------------------------------------------------------


def chi_autocorr_1d(y, n: int, order: int = 80):
    """(h*h)(y) for h = cos^n(pi .) on [-1/2, 1/2]; support |y| <= 1."""
    y = np.abs(np.asarray(y, dtype=float))
    out = np.zeros_like(y)
    x, w = gl_nodes(order)
    m = y < 1.0
    if np.any(m):
        ym = y[m]
        lo = ym - 0.5
        hi = np.full_like(ym, 0.5)
        width = hi - lo
        t = lo[:, None] + width[:, None] * x[None, :]
        vals = _h(t, n) * _h(ym[:, None] - t, n)
        out[m] = np.sum(vals * w[None, :], axis=1) * width
    return out


def chi_autocorr_radial(r, M: int):
    """(chi*chi) sampled along a coordinate axis at radius r."""
    n = _check_M(M) + 2
    r = np.asarray(r, dtype=float)
    a0 = float(chi_autocorr_1d(np.zeros(1), n)[0])
    return chi_normalization(M) ** 2 * chi_autocorr_1d(r, n) * a0 * a0


def chi_autocorr_3d(y, M: int):
    """(chi*chi) at 3-vector(s) y, shape (..., 3)."""
    n = _check_M(M) + 2
    y = np.asarray(y, dtype=float)
    cm2 = chi_normalization(M) ** 2
    return (cm2 * chi_autocorr_1d(y[..., 0], n) * chi_autocorr_1d(y[..., 1], n)
            * chi_autocorr_1d(y[..., 2], n))


# -- renormalized potentials -------------------------------------------------


def _divided_kernel(src: RadialKernel, denom) -> RadialKernel:
    funcs = [(lo, hi, (lambda r, f=f: f(r) / denom(r))) for lo, hi, f in src.funcs]
    shells = [(rho, m / float(denom(np.array([rho]))[0])) for rho, m in src.shells]
    return RadialKernel(funcs=funcs, shells=shells, scale=src.scale)


def renormalized_potential(v: RadialPotential, sol: ScatteringSolution,
                           ell: float, M: int):
    """Return (W, W1, W2) on the radial grid.

    W = v/(chi*chi)(./ell) carries only the integrable part of v (a hard core
    is not a function; its renormalized interaction enters through W1 and W2,
    whose kernels include the core's boundary shell). Requires support < ell/2
    so the denominator is positive on the support.
    """
    _check_M(M)
    R = v.support_radius
    if R >= 0.5 * ell:
        raise ValueError("need support_radius < ell/2")

    def denom(r):
        return np.asarray(chi_autocorr_radial(np.asarray(r, dtype=float) / ell, M))

    g = g_of(v, sol)
    w_funcs = []
    for p in v.pieces:
        def f(r, p=p):
            return np.asarray(p.value(r), dtype=float) / denom(r)
        w_funcs.append((p.r_lo, p.r_hi, f))
    w_shells = [(s.radius, s.mass / float(denom(np.array([s.radius]))[0])) for s in v.shells]
    W = RadialKernel(funcs=w_funcs, shells=w_shells, scale=g.scale)
    W1 = _divided_kernel(g, denom)

    def times_one_plus_omega(f):
        def g2(r, f=f):
            return f(r) * (1.0 + np.atleast_1d(sol.omega(r)))
        return g2

    w2_funcs = [(lo, hi, times_one_plus_omega(f)) for lo, hi, f in g.funcs]
    w2_shells = [(rho, m * (1.0 + float(np.atleast_1d(sol.omega(rho))[0])))
                 for rho, m in g.shells]
    W2 = _divided_kernel(RadialKernel(funcs=w2_funcs, shells=w2_shells, scale=g.scale),
                         denom)
    return W, W1, W2


def smeared_pair_integral(W1: RadialKernel, ell: float, M: int,
                          n_angle: int = 16) -> float:
    """ell^-3 double integral of chi(x/ell) chi(y/ell) W1(x - y).

    Change of variables reduces it to int W1(z) (chi*chi)(z/ell) dz; the
    autocorrelation is evaluated with its full 3-d separable form averaged
    over directions, so the result tests the radial reduction used to build
    W1 rather than restating it.
    """
    xc, wc = gl_nodes(n_angle)
    cos_t = xc  # cos(theta) in (0, 1): octant symmetry
    phi = 0.25 * math.pi * xc
    wphi = wc * 0.25 * math.pi
    sin_t = np.sqrt(1.0 - cos_t**2)
    nx = sin_t[:, None] * np.cos(phi)[None, :]
    ny = sin_t[:, None] * np.sin(phi)[None, :]
    nz = np.broadcast_to(cos_t[:, None], nx.shape)
    dirs = np.stack([nx, ny, nz], axis=-1).reshape(-1, 3)
    dir_w = (wc[:, None] * wphi[None, :]).reshape(-1)
    dir_w = dir_w / dir_w.sum()

    def avg_autocorr(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        pts = (r[:, None, None] / ell) * dirs[None, :, :]
        vals = chi_autocorr_3d(pts, M)
        return vals @ dir_w

    return W1.weighted_integral(avg_autocorr)


@dataclass
class FourierResidualReport:
    """Residuals of the smeared-interaction Fourier identities.

    residual1 = (2pi)^-3 int W1_hat^2/(2k^2) dk - int g omega dx, expected
    O(R a^2 / ell^2); residual2 = int (W1_hat - g_hat)^2/(2k^2) dk, expected
    O(R^3 a^2 / ell^4). The `scaled` fields divide by those envelopes.
    """

    residual1: float
    residual1_scaled: float
    residual2: float
    residual2_scaled: float
    g_omega: float
    R: float
    ell: float


def fourier_residual_check(v: RadialPotential, sol: ScatteringSolution,
                           ell: float, M: int) -> FourierResidualReport:
    from .scattering import fhat_product_integral, g_omega_integral

    _, W1, _ = renormalized_potential(v, sol, ell, M)
    g = g_of(v, sol)

    def denom(r):
        return np.asarray(chi_autocorr_radial(np.asarray(r, dtype=float) / ell, M))

    d_funcs = []
    for lo, hi, f in g.funcs:
        def fd(r, f=f):
            dd = denom(r)
            return f(r) * (1.0 - dd) / dd
        d_funcs.append((lo, hi, fd))
    d_shells = [(rho, m * (1.0 - float(denom(np.array([rho]))[0]))
                 / float(denom(np.array([rho]))[0])) for rho, m in g.shells]
    D = RadialKernel(funcs=d_funcs, shells=d_shells, scale=g.scale)

    # int (W1_hat^2 - g_hat^2) dk = int D_hat (D_hat + 2 g_hat) dk
    dd = fhat_product_integral(D, D)
    dg = fhat_product_integral(D, g)
    residual1 = (dd + 2.0 * dg) / (4.0 * math.pi**2)
    residual2 = 2.0 * math.pi * dd
    a = sol.a
    R = v.support_radius
    env1 = R * a * a / ell**2
    env2 = R**3 * a * a / ell**4
    return FourierResidualReport(
        residual1=residual1,
        residual1_scaled=residual1 / env1 if env1 > 0 else 0.0,
        residual2=residual2,
        residual2_scaled=residual2 / env2 if env2 > 0 else 0.0,
        g_omega=g_omega_integral(sol, g),
        R=R,
        ell=ell,
    )
