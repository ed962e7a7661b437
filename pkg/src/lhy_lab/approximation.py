"""Low-integral approximation of a potential with controlled scattering length.

Given T > 1, any nonnegative radial potential v with finite scattering length
a admits an L^1 minorant v_T with

    (8 pi)^-1 int v_T <= T a(v),
    a(v_T) >= a(v) (1 - (1 + c sqrt(5)/sqrt(T)) / T),

with c = 1 when v is already integrable (pure tail cut) and c = 2 in
general (height cap followed by the tail cut). The tail cut removes the
inner region {|x| <= R_T} where R_T is chosen so the remaining integral is
exactly 8 pi T a. No sub-hard-core approximation can do better than a
relative deficit of 1/(1+T): see `hard_core_obstruction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .potentials import ConstPiece, LinearPiece, RadialPotential, Shell, cap_and_cut
from .scattering import scattering_length, solve

__all__ = [
    "ApproximationCertificate",
    "NothingToCutError",
    "ApproximationError",
    "optimal_lambda",
    "hard_core_obstruction",
    "tail_cut_radius",
    "approximate",
]

EIGHT_PI = 8.0 * math.pi


class NothingToCutError(ValueError):
    """The potential already satisfies (8 pi a)^-1 int v <= T."""


class ApproximationError(RuntimeError):
    """The cap-height search exhausted its doubling budget."""


@dataclass
class ApproximationCertificate:
    T: float
    R_T: float | None
    a_original: float
    a_approx: float
    integral_vT: float
    integral_bound_ok: bool
    length_bound_ok: bool
    lambda_used: float
    c_used: int
    delta: float | None = None
    cap_height: float | None = None
    a_capped: float | None = None
    phi_T_at_RT: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def optimal_lambda(T: float) -> float:
    """Regime-splitting parameter (sqrt(4T+1) - 1) / (2T), in (0, 1]."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return (math.sqrt(4.0 * T + 1.0) - 1.0) / (2.0 * T)


def hard_core_obstruction(T: float) -> float:
    """Minimal relative scattering-length deficit 1/(1+T) of any minorant
    of the unit hard core with integral at most 8 pi T."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return 1.0 / (1.0 + T)


def tail_cut_radius(v: RadialPotential, T: float, a: float) -> float:
    """R_T with int_{|x| >= R_T} v = 8 pi T a, by bisection on the tail integral.

    Raises NothingToCutError when int v <= 8 pi T a. When the cumulative
    tail jumps across the target at a shell radius, R_T is that radius and
    the caller splits the shell mass (see `approximate`).
    """
    target = EIGHT_PI * T * a
    total = v.integral()
    if total <= target:
        raise NothingToCutError(
            f"(8 pi a)^-1 int v = {total / (EIGHT_PI * a):.6g} <= T = {T:.6g}")
    if v.has_hard_core:
        raise ValueError("tail cut needs an integrable potential; cap it first")
    lo, hi = 0.0, v.support_radius
    # tail(lo) = total > target, tail(hi) = 0 < target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if v.tail_integral(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, v.support_radius):
            break
    # land exactly on a shell radius if the jump brackets the target
    for s in v.shells:
        if abs(s.radius - hi) <= 1e-12 * max(1.0, s.radius):
            above = v.tail_integral(s.radius) - _shell_mass_at(v, s.radius)
            if above <= target <= above + _shell_mass_at(v, s.radius):
                return s.radius
    return hi


def _shell_mass_at(v: RadialPotential, radius: float) -> float:
    return sum(s.mass for s in v.shells if s.radius == radius)


def _cut_resolution(v: RadialPotential, R_T: float) -> float:
    """Integral change from moving the cut radius by one float spacing."""
    p = v.piece_at(R_T)
    if p is None:
        return 0.0
    h = p.height if isinstance(p, ConstPiece) else max(p.v_lo, p.v_hi)
    return 4.0 * math.pi * h * R_T * R_T * np.spacing(max(R_T, 1.0))


def _restrict_above(v: RadialPotential, R_T: float, target: float
                    ) -> tuple[RadialPotential, float]:
    """v * 1_{|x| > R_T}, splitting a shell at R_T so the integral hits `target`.

    Returns the cut potential and the float resolution of the cut: for very
    tall capped potentials the integral cannot be matched better than the
    change produced by one representable step of R_T.
    """
    pieces = []
    for p in v.pieces:
        if p.r_hi <= R_T:
            continue
        lo = max(p.r_lo, R_T)
        if isinstance(p, ConstPiece):
            pieces.append(ConstPiece(lo, p.r_hi, p.height))
        else:
            s = p.slope()
            pieces.append(LinearPiece(lo, p.r_hi, p.v_lo + s * (lo - p.r_lo), p.v_hi))
    shells = [s for s in v.shells if s.radius > R_T]
    partial = sum(p.integral() for p in pieces) + sum(s.mass for s in shells)
    deficit = target - partial
    at_cut = _shell_mass_at(v, R_T)
    resolution = _cut_resolution(v, R_T)
    tol = max(1e-12 * max(target, 1.0), 4.0 * resolution)
    if deficit > tol:
        if at_cut + tol < deficit:
            raise ApproximationError("tail cut cannot reach the target integral")
        shells.append(Shell(R_T, min(deficit, at_cut)))
    shells.sort(key=lambda s: s.radius)
    return RadialPotential(pieces=tuple(pieces), shells=tuple(shells)), resolution


def _cap_search(v: RadialPotential, a: float, delta: float,
                max_doublings: int = 60) -> tuple[RadialPotential, float, float]:
    """Smallest doubling cap height n with a(min{v,n}) >= a (1 - delta)."""
    vol = 4.0 * math.pi * v.support_radius**3 / 3.0
    n = max(EIGHT_PI * a / vol, 1e-6)
    for _ in range(max_doublings):
        v_n = cap_and_cut(v, n)
        a_n = scattering_length(v_n)
        if a_n >= a * (1.0 - delta):
            return v_n, a_n, n
        n *= 2.0
    raise ApproximationError(
        f"cap search exceeded {max_doublings} doublings (delta = {delta:.3g})")


def approximate(v: RadialPotential, T: float, delta: float | None = None
                ) -> tuple[RadialPotential, ApproximationCertificate]:
    """Construct v_T <= v with small integral and certified scattering length.

    For integrable v the tail cut applies directly (c = 1). Singular
    potentials are first capped at the smallest doubling height whose
    scattering length is within `delta` of a(v) (default delta = T^-2, which
    keeps the capping error below the T^-1 term), then tail cut (c = 2).
    """
    if T <= 1:
        raise ValueError("T must exceed 1")
    a = scattering_length(v)
    total = v.integral()
    lam = optimal_lambda(T)

    if total <= EIGHT_PI * T * a:
        cert = ApproximationCertificate(
            T=T, R_T=None, a_original=a, a_approx=a, integral_vT=total,
            integral_bound_ok=True, length_bound_ok=True,
            lambda_used=lam, c_used=1)
        return v, cert

    if math.isfinite(total):
        base, a_base, c, cap_height, a_capped, used_delta = v, a, 1, None, None, None
    else:
        used_delta = T**-2 if delta is None else delta
        base, a_base, cap_height = _cap_search(v, a, used_delta)
        a_capped, c = a_base, 2

    if base.integral() <= EIGHT_PI * T * a_base:
        v_T, R_T, resolution = base, None, 0.0
    else:
        R_T = tail_cut_radius(base, T, a_base)
        v_T, resolution = _restrict_above(base, R_T, EIGHT_PI * T * a_base)

    a_T = scattering_length(v_T)
    int_vT = v_T.integral()
    slack = max(1e-12 * max(1.0, T * a), 4.0 * resolution / EIGHT_PI)
    integral_ok = int_vT / EIGHT_PI <= T * a + slack
    bound = a * (1.0 - (1.0 + c * math.sqrt(5.0) / math.sqrt(T)) / T)
    length_ok = a_T >= bound - slack

    phi_RT = None
    if R_T is not None:
        sol_T = solve(v_T)
        phi_RT = float(sol_T.phi(R_T))

    cert = ApproximationCertificate(
        T=T, R_T=R_T, a_original=a, a_approx=a_T, integral_vT=int_vT,
        integral_bound_ok=bool(integral_ok), length_bound_ok=bool(length_ok),
        lambda_used=lam, c_used=c, delta=used_delta, cap_height=cap_height,
        a_capped=a_capped, phi_T_at_RT=phi_RT)
    return v_T, cert
