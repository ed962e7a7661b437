"""Bogoliubov mode data, the two-mode diagonalization identity, and the
dilute-gas ground-state integral.

A quadratic pair of modes  A (a+*a+ + a-*a-) + B (a+*a-* + a+a-)
+ kappa (a+* + a-) + conj(kappa) (a+ + a-*)  with A > 0 and |B| < A or B = A
diagonalizes to D (b+*b+ + b-*b-) plus the scalar shift
-(A - sqrt(A^2 - B^2)) - 2|kappa|^2/(A+B), with
D = (A + sqrt(A^2-B^2))/2.  `diagonalize_mode_numeric` verifies the shift on
a truncated two-mode Fock space.

The ground-state integral (1/2)(2pi)^-3 int (A(k) - sqrt(A(k)^2 - B(k)^2)) dk
with A = (1-eps_N) tau(k) + rho W1_hat(k), B = rho W1_hat(k) is regularized by
subtracting rho^2 W1_hat^2 / (2 (1-eps_N) k^2); for ideal inputs the
regularized part reproduces the universal sqrt(rho a^3) energy correction
with coefficient 128/(15 sqrt(pi)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import quad

from .quadrature import panel_integrate

__all__ = [
    "ModeCoefficients",
    "Dispersion",
    "tau",
    "dispersion",
    "diagonalize_mode_numeric",
    "lhy_constant",
    "LHY_COEFFICIENT",
    "lhy_energy",
    "GroundStateIntegral",
    "ground_state_integral",
    "AprioriIntegralReport",
    "apriori_integral_check",
]

LHY_COEFFICIENT = 128.0 / (15.0 * math.sqrt(math.pi))
_8PI = 8.0 * math.pi


def tau(p, eps_T: float, s: float, d: float, ell: float):
    """Box-localized kinetic multiplier with two soft infrared shifts.

    tau(p) = (1-eps_T) [p - (2 s ell)^-1]_+^2 + eps_T [p - (2 d s ell)^-1]_+^2.
    """
    if not (0.0 <= eps_T < 1.0):
        raise ValueError("eps_T must lie in [0, 1)")
    if min(s, d, ell) <= 0:
        raise ValueError("s, d, ell must be positive")
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("p must be >= 0")
    t1 = np.maximum(p - 0.5 / (s * ell), 0.0)
    t2 = np.maximum(p - 0.5 / (d * s * ell), 0.0)
    out = (1.0 - eps_T) * t1 * t1 + eps_T * t2 * t2
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ModeCoefficients:
    A: float
    B: float
    kappa: complex = 0.0

    def __post_init__(self):
        if self.A < 0:
            raise ValueError("A must be >= 0")
        if not (abs(self.B) < self.A or self.B == self.A):
            raise ValueError("need |B| < A or B = A")


@dataclass(frozen=True)
class Dispersion:
    D: float
    alpha: float
    c0: complex
    ground_shift: float


def dispersion(m: ModeCoefficients) -> Dispersion:
    """Closed-form diagonalization data for one mode pair."""
    A, B, kap = m.A, m.B, m.kappa
    root = math.sqrt(max(A * A - B * B, 0.0))
    shift_quad = B * B / (A + root) if A + root > 0 else 0.0  # A - root, stable
    D = 0.5 * (A + root)
    alpha = B / (A + root) if A + root > 0 else 0.0
    c0 = 2.0 * np.conj(kap) / (A + B + root) if (A + B + root) > 0 else 0.0 + 0.0j
    shift = -shift_quad
    if kap != 0:
        shift -= 2.0 * abs(kap) ** 2 / (A + B)
    return Dispersion(D=D, alpha=alpha, c0=complex(c0), ground_shift=shift)


def _two_mode_hamiltonian(m: ModeCoefficients, n_max: int) -> sp.csr_matrix:
    dim = n_max + 1
    i, j = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    i, j = i.ravel(), j.ravel()
    idx = i * dim + j
    dtype = complex if m.kappa != 0 else float
    rows, cols, vals = [idx], [idx], [m.A * (i + j).astype(float)]

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    # B (a+^dag a-^dag + h.c.)
    mask = (i < n_max) & (j < n_max)
    src = idx[mask]
    dst = (i[mask] + 1) * dim + (j[mask] + 1)
    amp = m.B * np.sqrt((i[mask] + 1.0) * (j[mask] + 1.0))
    add(dst, src, amp)
    add(src, dst, amp)
    if m.kappa != 0:
        kap = m.kappa
        # kappa a+^dag : |i,j> -> |i+1,j>
        mask = i < n_max
        add((i[mask] + 1) * dim + j[mask], idx[mask], kap * np.sqrt(i[mask] + 1.0))
        add(idx[mask], (i[mask] + 1) * dim + j[mask], np.conj(kap) * np.sqrt(i[mask] + 1.0))
        # kappa a- : |i,j> -> |i,j-1>
        mask = j > 0
        add(i[mask] * dim + (j[mask] - 1), idx[mask], kap * np.sqrt(j[mask].astype(float)))
        add(idx[mask], i[mask] * dim + (j[mask] - 1), np.conj(kap) * np.sqrt(j[mask].astype(float)))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate([np.asarray(v, dtype=dtype) for v in vals])
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim * dim, dim * dim)).tocsr()


def diagonalize_mode_numeric(m: ModeCoefficients, n_max: int) -> float:
    """Lowest eigenvalue of the two-mode Hamiltonian truncated at n_max bosons.

    Converges to dispersion(m).ground_shift as n_max grows (geometrically
    for |B| < A).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    H = _two_mode_hamiltonian(m, n_max)
    if H.shape[0] <= 400:
        w = np.linalg.eigvalsh(H.toarray())
        return float(w[0])
    w = spla.eigsh(H, k=1, which="SA", maxiter=20000)[0]
    return float(w[0])


# -- the universal dilute-gas integral ---------------------------------------


def _reg_integrand(k, A, B, one_minus_eps, tau_vals):
    """A - sqrt(A^2-B^2) - B^2/(2 (1-eps_N) k^2), evaluated without cancellation.

    Uses (2(1-e)k^2 - A)^2 - (A^2 - B^2)
       = B^2 + 4(1-e)k^2 [ (1-e)(k^2 - tau) - B ],
    which is exact algebra and avoids the difference of large squares.
    """
    k = np.asarray(k, dtype=float)
    k2 = k * k
    S = np.sqrt(np.maximum((A - B) * (A + B), 0.0))
    denom_ct = 2.0 * one_minus_eps * k2
    D = denom_ct - A
    num = B * B + 4.0 * one_minus_eps * k2 * (one_minus_eps * (k2 - tau_vals) - B)
    M = np.where(D + S > 0, num / np.where(D + S > 0, D + S, 1.0), D - S)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = B * B * M / ((A + S) * denom_ct)
    return out


@dataclass
class GroundStateIntegral:
    """Split evaluation of (1/2)(2 pi)^-3 int (A - sqrt(A^2-B^2)) dk."""

    total: float
    leading: float
    second_order: float
    lhy_prediction: float
    rel_deviation: float


def ground_state_integral(rho: float, a: float, W1_hat, *, eps_N: float = 0.0,
                          tau_fn=None, W1_hat_sq_integral: float | None = None,
                          k_support: float | None = None,
                          rel_tol: float = 1e-10) -> GroundStateIntegral:
    """Evaluate the mode integral with A = (1-eps_N) tau + rho W1_hat, B = rho W1_hat.

    `W1_hat` is a vectorized function of k >= 0. The counterterm part
    (`leading`) integrates rho^2 W1_hat^2 / (2(1-eps_N) k^2); pass
    `W1_hat_sq_integral` = int_0^inf W1_hat(k)^2 dk when a closed form is
    available. `second_order` = leading - total is compared against the
    universal prediction 4 pi (128/(15 sqrt(pi))) rho^2 a sqrt(rho a^3).

    Raises ValueError if A < |B| anywhere on the quadrature grid.
    """
    if rho <= 0 or a <= 0:
        raise ValueError("rho and a must be positive")
    one_minus = 1.0 - eps_N
    if tau_fn is None:
        tau_fn = lambda k: np.asarray(k) ** 2  # noqa: E731

    def reg(k):
        k = np.asarray(k, dtype=float)
        W = np.asarray(W1_hat(k), dtype=float)
        B = rho * W
        tv = np.asarray(tau_fn(k), dtype=float)
        A = one_minus * tv + B
        if np.any(A - np.abs(B) < -1e-12 * np.maximum(A, 1e-300)):
            raise ValueError("A(k) < |B(k)| on the quadrature grid")
        return _reg_integrand(k, A, B, one_minus, tv)

    kh = math.sqrt(rho * a)
    t0 = 1e3
    k0 = kh * t0

    # healing window, integrated in dimensionless t-units so scipy's absolute
    # tolerance is meaningful for arbitrarily small rho
    scale = (rho * a) ** 2.5

    def f_t(t):
        t = np.asarray(t, dtype=float)
        k = kh * t
        return reg(k) * k * k * kh / scale

    inner_t, _ = quad(f_t, 0.0, t0, limit=400)
    inner = inner_t * scale

    # octaves across the potential scale
    if k_support is None:
        k_support = 1.0 / a
    acc = inner
    lo = k0
    width = k0
    small = 0
    while True:
        hi = lo + width
        part = panel_integrate(lambda k: reg(k) * k * k, lo, hi,
                               panels=max(16, int(min(200, 8 * width * a))))
        acc += part
        done_range = hi > 300.0 * k_support
        if abs(part) < rel_tol * max(abs(acc), 1e-300) and done_range:
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        lo, width = hi, width * 2.0
        if width > 1e9 * k_support:
            break
    reg_total = acc / (4.0 * math.pi ** 2)

    if W1_hat_sq_integral is None:
        W1_hat_sq_integral = _w1_sq_numeric(W1_hat, k_support, rel_tol)
    leading = rho * rho * W1_hat_sq_integral / (8.0 * math.pi ** 2 * one_minus)

    total = leading + reg_total
    second = -reg_total
    pred = 4.0 * math.pi * LHY_COEFFICIENT * rho * rho * a * math.sqrt(rho * a ** 3)
    rel_dev = abs(second - pred) / pred if pred > 0 else math.nan
    return GroundStateIntegral(total=total, leading=leading, second_order=second,
                               lhy_prediction=pred, rel_deviation=rel_dev)


def _w1_sq_numeric(W1_hat, k_support: float, rel_tol: float) -> float:
    def f(k):
        w = np.asarray(W1_hat(k), dtype=float)
        return w * w

    acc, _ = quad(f, 0.0, 8.0 * k_support, limit=400)
    lo = 8.0 * k_support
    width = lo
    small = 0
    for _ in range(80):
        part = panel_integrate(f, lo, lo + width,
                               panels=max(16, int(min(4000, 8 * width / k_support))))
        acc += part
        if abs(part) < rel_tol * max(abs(acc), 1e-300):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        lo, width = lo + width, 2.0 * width
    return acc


def lhy_constant(tol: float = 1e-8) -> float:
    """The radial integral 4 pi int_0^inf [t^2 + 8 pi - (8 pi)^2/(2 t^2)
    - sqrt((t^2+8 pi)^2 - (8 pi)^2)] t^2 dt.

    Equals -64 pi^4 (128/(15 sqrt(pi))). Split quadrature: adaptive on
    [0, T0] plus the analytic tail -(4 pi)(8 pi)^3/(2 T0)
    + (5/24)(4 pi)(8 pi)^4/T0^3 whose remainder is O(T0^-5) and is checked
    against the tolerance budget.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = _8PI
    closed = -64.0 * math.pi ** 4 * LHY_COEFFICIENT

    def f(t):
        t = np.asarray(t, dtype=float)
        A = t * t + b
        return _reg_integrand(t, A, np.full_like(A, b), 1.0, t * t) * t * t * 4.0 * math.pi

    T0 = 1e3
    # enlarge T0 until the neglected O(T0^-5) remainder is under tol/10
    while 40.0 * math.pi * b ** 5 / T0 ** 5 > 0.1 * tol * abs(closed):
        T0 *= 2.0
        if T0 > 1e8:
            raise RuntimeError("tail estimate exceeds the tolerance budget")
    inner, _ = quad(f, 0.0, T0, limit=400)
    tail = -4.0 * math.pi * b ** 3 / (2.0 * T0) + (5.0 / 24.0) * 4.0 * math.pi * b ** 4 / T0 ** 3
    return inner + tail


def lhy_energy(rho: float, a: float) -> float:
    """Two-term energy density 4 pi a rho^2 (1 + (128/(15 sqrt(pi))) sqrt(rho a^3))."""
    if rho <= 0 or a <= 0:
        raise ValueError("rho and a must be positive")
    return 4.0 * math.pi * a * rho * rho * (1.0 + LHY_COEFFICIENT * math.sqrt(rho * a ** 3))


# -- a-priori integral bound --------------------------------------------------


@dataclass
class AprioriIntegralReport:
    lhs: float
    rhs: float
    ratio: float
    C_min: float
    passed: bool


def apriori_integral_check(A_fn, B_fn, kappa_A: float, K1: float, K2: float,
                           P1: float, a: float, C: float = 50.0,
                           p_support: float | None = None) -> AprioriIntegralReport:
    """Check int (A - sqrt(A^2 - B^2)) dp against its closed-form bound.

    Hypotheses: A(p) >= kappa_A [|p| - P1]_+^2 + 2 K1 a, |B(p)| <= K2 a,
    0 < K2 <= K1, 0 < P1 < 1/a. The bound is

        (1/2)(1 + C P1 a) kappa_A^-1 int B^2/p^2 dp + C (K2^2/K1) a P1^3
        + C (K2 a)^2 P1 kappa_A^-1 log(1/(P1 a))
        + C min{ (K2 a)^4 kappa_A^-3 P1^-3,
                 (K2/K1)^2 kappa_A^-1 int B^2/p^2 dp }.

    `C_min` is the smallest constant making the bound hold for these inputs.
    """
    if not (0 < K2 <= K1):
        raise ValueError("need 0 < K2 <= K1")
    if not (0 < P1 < 1.0 / a):
        raise ValueError("need 0 < P1 < 1/a")
    if p_support is None:
        p_support = 4.0 / a
    grid = np.linspace(1e-9, p_support, 4001)
    Ag = np.asarray(A_fn(grid), dtype=float)
    Bg = np.asarray(B_fn(grid), dtype=float)
    if np.any(Ag < kappa_A * np.maximum(grid - P1, 0.0) ** 2 + 2 * K1 * a - 1e-9 * (1 + np.abs(Ag))):
        raise ValueError("A(p) violates its lower-bound hypothesis")
    if np.any(np.abs(Bg) > K2 * a * (1 + 1e-9)):
        raise ValueError("|B(p)| exceeds K2 a")

    def diff(p):
        A = np.asarray(A_fn(p), dtype=float)
        B = np.asarray(B_fn(p), dtype=float)
        S = np.sqrt(np.maximum((A - B) * (A + B), 0.0))
        return np.where(A + S > 0, B * B / (A + S), 0.0)

    lhs = 4.0 * math.pi * panel_integrate(lambda p: diff(p) * p * p, 0.0, p_support,
                                          panels=512)
    intB2 = 4.0 * math.pi * panel_integrate(
        lambda p: np.asarray(B_fn(p), dtype=float) ** 2, 0.0, p_support, panels=512)

    base = 0.5 / kappa_A * intB2
    slope = (0.5 * P1 * a / kappa_A * intB2
             + (K2 ** 2 / K1) * a * P1 ** 3
             + (K2 * a) ** 2 * P1 / kappa_A * math.log(1.0 / (P1 * a))
             + min((K2 * a) ** 4 / (kappa_A ** 3 * P1 ** 3),
                   (K2 / K1) ** 2 / kappa_A * intB2))
    rhs = base + C * slope
    C_min = max(0.0, (lhs - base) / slope) if slope > 0 else math.inf
    return AprioriIntegralReport(lhs=lhs, rhs=rhs, ratio=lhs / rhs if rhs else math.inf,
                                 C_min=C_min, passed=bool(lhs <= rhs))
