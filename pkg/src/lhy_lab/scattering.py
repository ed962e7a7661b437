"""Zero-energy radial scattering: profile, scattering length, g, transforms.

The reduced radial profile u(r) = r*phi(r) solves u'' = (1/2) v(r) u with
u(r0) = 0, u'(r0) = 1 at the inner edge r0 (the hard-core radius, possibly 0).
Beyond the support the solution is affine and the scattering length a is read
off from u(r) = r - a after rescaling. A surface measure of mass m at radius
rho imposes the derivative jump u'(rho+) - u'(rho-) = m/(8 pi rho^2) * u(rho).

Constant-height pieces are propagated in closed form (cosh/sinh with an
explicit log-scale so arbitrarily tall caps never overflow); tabulated pieces
use a fixed-step fourth-order integrator with Richardson step-doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potentials import ConstPiece, LinearPiece, RadialPotential
from .quadrature import gl_nodes, panel_integrate_scaled

__all__ = [
    "SolverError",
    "ScatteringSolution",
    "RadialKernel",
    "solve",
    "scattering_length",
    "g_of",
    "radial_fourier",
    "radial_fourier_batch",
    "fhat_product_integral",
    "fhat_squared_integral",
    "g_omega_integral",
    "variational_energy",
]

DEFAULT_TOL = 1e-10
_BIG = 1e100


class SolverError(RuntimeError):
    """Raised when the radial integration cannot certify its own answer."""


# -- propagated pieces -----------------------------------------------------


@dataclass
class _ConstProp:
    """Closed-form segment with constant v; state (u0, up0) at r_lo, amplitude log_amp."""

    r_lo: float
    r_hi: float
    height: float
    u0: float = 0.0
    up0: float = 0.0
    log_amp: float = 0.0

    @property
    def kappa(self) -> float:
        return math.sqrt(self.height / 2.0)

    def eval(self, r):
        """Return (u, up, logf) with true values u * exp(log_amp + logf)."""
        s = np.asarray(r, dtype=float) - self.r_lo
        k = self.kappa
        if k == 0.0:
            u = self.u0 + self.up0 * s
            up = np.full_like(u, self.up0)
            return u, up, np.zeros_like(u)
        x = k * s
        safe = x <= 20.0
        xs = np.where(safe, x, 0.0)
        u_s = self.u0 * np.cosh(xs) + (self.up0 / k) * np.sinh(xs)
        up_s = self.u0 * k * np.sinh(xs) + self.up0 * np.cosh(xs)
        e = self.u0 + self.up0 / k
        f = self.u0 - self.up0 / k
        q = np.exp(-2.0 * np.where(safe, 0.0, x))
        u_b = 0.5 * (e + f * q)
        up_b = 0.5 * k * (e - f * q)
        u = np.where(safe, u_s, u_b)
        up = np.where(safe, up_s, up_b)
        logf = np.where(safe, 0.0, x)
        return u, up, logf

    def end_state(self):
        u, up, logf = self.eval(self.r_hi)
        return float(u), float(up), float(logf)


@dataclass
class _DenseProp:
    """Segment integrated numerically; dense nodes allow Hermite evaluation."""

    r_lo: float
    r_hi: float
    v_lo: float
    v_hi: float
    nodes_r: np.ndarray = None
    nodes_u: np.ndarray = None
    nodes_up: np.ndarray = None
    log_amp: float = 0.0

    @property
    def kappa(self) -> float:
        return math.sqrt(max(self.v_lo, self.v_hi) / 2.0)

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(self.nodes_r, r, side="right") - 1, 0,
                      len(self.nodes_r) - 2)
        r0 = self.nodes_r[idx]
        h = self.nodes_r[idx + 1] - r0
        t = np.where(h > 0, (r - r0) / np.where(h > 0, h, 1.0), 0.0)
        u0, u1 = self.nodes_u[idx], self.nodes_u[idx + 1]
        p0, p1 = self.nodes_up[idx], self.nodes_up[idx + 1]
        # cubic Hermite in t
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        u = h00 * u0 + h10 * h * p0 + h01 * u1 + h11 * h * p1
        d00 = 6 * t * (t - 1)
        d10 = (1 - t) * (1 - 3 * t)
        d01 = -d00
        d11 = t * (3 * t - 2)
        up = (d00 * u0 / np.where(h > 0, h, 1.0) + d10 * p0 + d01 * u1 / np.where(h > 0, h, 1.0)
              + d11 * p1)
        return u, up, np.zeros_like(u)

    def end_state(self):
        return float(self.nodes_u[-1]), float(self.nodes_up[-1]), 0.0


def _rk4_linear_piece(u0, up0, r_lo, r_hi, v_lo, v_hi, tol):
    """Fixed-step RK4 across one linear-ramp piece, Richardson refined.

    Returns (u_end, up_end, nodes_r, nodes_u, nodes_up) from the finest run,
    with the endpoint replaced by the extrapolated value.
    """
    slope = (v_hi - v_lo) / (r_hi - r_lo)

    def vfun(r):
        return v_lo + slope * (r - r_lo)

    def run(n):
        h = (r_hi - r_lo) / n
        r = r_lo
        u, up = u0, up0
        rs = np.empty(n + 1)
        us = np.empty(n + 1)
        ups = np.empty(n + 1)
        rs[0], us[0], ups[0] = r, u, up
        for i in range(n):
            k1u = up
            k1p = 0.5 * vfun(r) * u
            k2u = up + 0.5 * h * k1p
            k2p = 0.5 * vfun(r + 0.5 * h) * (u + 0.5 * h * k1u)
            k3u = up + 0.5 * h * k2p
            k3p = 0.5 * vfun(r + 0.5 * h) * (u + 0.5 * h * k2u)
            k4u = up + h * k3p
            k4p = 0.5 * vfun(r + h) * (u + h * k3u)
            u += h * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0
            up += h * (k1p + 2 * k2p + 2 * k3p + k4p) / 6.0
            r = r_lo + (i + 1) * h
            rs[i + 1], us[i + 1], ups[i + 1] = r, u, up
        return rs, us, ups

    kappa = math.sqrt(max(v_lo, v_hi, 0.0) / 2.0)
    n = max(16, int(math.ceil(8.0 * kappa * (r_hi - r_lo))))
    rs, us, ups = run(n)
    for _ in range(24):
        n2 = 2 * n
        rs2, us2, ups2 = run(n2)
        scale = max(abs(us2[-1]), abs(ups2[-1]), 1e-300)
        err = max(abs(us2[-1] - us[-1]), abs(ups2[-1] - ups[-1])) / scale
        if err < max(tol, 1e-14):
            u_x = us2[-1] + (us2[-1] - us[-1]) / 15.0
            up_x = ups2[-1] + (ups2[-1] - ups[-1]) / 15.0
            us2[-1], ups2[-1] = u_x, up_x
            return rs2, us2, ups2
        n, rs, us, ups = n2, rs2, us2, ups2
    raise SolverError("step-doubling failed to reach the requested tolerance")


# -- the scattering solution ------------------------------------------------


@dataclass
class ScatteringSolution:
    """Reduced profile u = r*phi, its derivative, and the extracted length a.

    Values in `u`, `u_prime` are normalized so that u(r) = r - a beyond the
    support. `normalization` is the factor applied to the raw integration
    (it can underflow to 0.0 for extremely tall potentials; `log_normalization`
    is always finite).
    """

    potential: RadialPotential
    grid: np.ndarray
    u: np.ndarray
    u_prime: np.ndarray
    a: float
    normalization: float
    log_normalization: float
    tol: float
    _pieces: list

    def _piece_for(self, r: float):
        for p in self._pieces:
            if p.r_lo <= r <= p.r_hi:
                return p
        return None

    def u_at(self, r):
        """Normalized u(r); exact affine continuation beyond the solved range."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        r0 = self.potential.hard_core_radius
        rmax = self._pieces[-1].r_hi if self._pieces else r0
        for p in self._pieces:
            m = (r >= p.r_lo) & (r <= p.r_hi)
            if not m.any():
                continue
            u, _, logf = p.eval(r[m])
            out[m] = u * np.exp(p.log_amp + logf + self.log_normalization)
        out[r < r0] = 0.0
        far = r > rmax
        out[far] = r[far] - self.a
        return out if out.shape != (1,) else float(out[0])

    def u_prime_at(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        r0 = self.potential.hard_core_radius
        rmax = self._pieces[-1].r_hi if self._pieces else r0
        for p in self._pieces:
            m = (r >= p.r_lo) & (r <= p.r_hi)
            if not m.any():
                continue
            _, up, logf = p.eval(r[m])
            out[m] = up * np.exp(p.log_amp + logf + self.log_normalization)
        out[r < r0] = 0.0
        out[r > rmax] = 1.0
        return out if out.shape != (1,) else float(out[0])

    def phi(self, r):
        """phi(r) = u(r)/r, extended by 0 inside a hard core and by phi(0) = u'(0)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        u = np.atleast_1d(self.u_at(r))
        with np.errstate(invalid="ignore", divide="ignore"):
            val = np.where(r > 0, u / np.where(r > 0, r, 1.0), 0.0)
        if self.potential.hard_core_radius == 0.0:
            at0 = r == 0.0
            if at0.any():
                val[at0] = np.atleast_1d(self.u_prime_at(0.0))[0]
        return val if val.shape != (1,) else float(val[0])

    def omega(self, r):
        """omega = 1 - phi; equals 1 inside a hard core and a/r far outside."""
        r = np.asarray(r, dtype=float)
        return 1.0 - self.phi(r)


def _segments(v: RadialPotential, r_max: float):
    pts = [b for b in v.breakpoints() if b < r_max]
    pts.append(r_max)
    pts = sorted(set(p for p in pts if p >= v.hard_core_radius))
    if pts[0] > v.hard_core_radius:
        pts.insert(0, v.hard_core_radius)
    segs = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (lo + hi)
        piece = v.piece_at(mid)
        if piece is None:
            segs.append(("const", lo, hi, 0.0, 0.0))
        elif isinstance(piece, ConstPiece):
            segs.append(("const", lo, hi, piece.height, piece.height))
        else:
            s = piece.slope()
            v_lo = piece.v_lo + s * (lo - piece.r_lo)
            v_hi = piece.v_lo + s * (hi - piece.r_lo)
            if abs(v_hi - v_lo) <= 1e-14 * max(abs(v_lo), abs(v_hi), 1.0):
                segs.append(("const", lo, hi, v_lo, v_lo))
            else:
                segs.append(("linear", lo, hi, v_lo, v_hi))
    return segs


def solve(v: RadialPotential, r_max: float | None = None,
          tol: float = DEFAULT_TOL, profile_points: int = 33) -> ScatteringSolution:
    """Integrate the zero-energy equation outward and extract a.

    The extracted a = r - u/u' is required to agree at R*(1 + 1e-8) and at
    r_max within `tol` (absolute, in length units); disagreement signals
    integrator breakdown and raises SolverError.
    """
    R = v.support_radius
    if r_max is None:
        r_max = 2.0 * max(R, 0.5)
    if r_max <= R:
        raise ValueError("r_max must exceed the support radius")
    if tol <= 0:
        raise ValueError("tol must be positive")

    shells = {s.radius: s.mass for s in v.shells}
    pieces = []
    u, up, log_amp = 0.0, 1.0, 0.0
    r0 = v.hard_core_radius
    if r0 in shells:
        # a surface measure exactly on the core edge acts on u(r0) = 0: no jump
        del shells[r0]
    for kind, lo, hi, v_lo, v_hi in _segments(v, r_max):
        if kind == "const":
            p = _ConstProp(lo, hi, v_lo, u0=u, up0=up, log_amp=log_amp)
            u, up, logf = p.end_state()
            log_amp += logf
        else:
            rs, us, ups = _rk4_linear_piece(u, up, lo, hi, v_lo, v_hi, tol)
            p = _DenseProp(lo, hi, v_lo, v_hi, rs, us, ups, log_amp=log_amp)
            u, up = float(us[-1]), float(ups[-1])
        pieces.append(p)
        m = max(abs(u), abs(up))
        if m > _BIG:
            u, up = u / m, up / m
            log_amp += math.log(m)
        if hi in shells:
            up += shells[hi] / (8.0 * math.pi * hi * hi) * u

    def state_at(r: float):
        for p in pieces:
            if p.r_lo <= r <= p.r_hi:
                uu, pp, logf = p.eval(r)
                return float(uu), float(pp), p.log_amp + float(logf)
        raise ValueError(f"r={r} outside the solved range")

    a_candidates = []
    for r_ext in (R * (1.0 + 1e-8) if R > 0 else 0.5 * (R + r_max), r_max):
        uu, pp, _ = state_at(min(r_ext, r_max))
        if pp == 0.0:
            raise SolverError("vanishing derivative at the matching radius")
        a_candidates.append(min(r_ext, r_max) - uu / pp)
    a1, a2 = a_candidates
    if abs(a1 - a2) > tol:
        raise SolverError(
            f"scattering length drifts beyond the support: {a1!r} vs {a2!r}")
    a = a2

    u_end, up_end, log_end = state_at(r_max)
    log_norm = -(log_end + math.log(abs(up_end)))
    norm = math.exp(log_norm) if log_norm > -700 else 0.0

    sol = ScatteringSolution(
        potential=v,
        grid=np.empty(0),
        u=np.empty(0),
        u_prime=np.empty(0),
        a=a,
        normalization=norm,
        log_normalization=log_norm,
        tol=tol,
        _pieces=pieces,
    )
    grids = []
    for p in pieces:
        if isinstance(p, _DenseProp):
            grids.append(p.nodes_r)
        else:
            grids.append(np.linspace(p.r_lo, p.r_hi, profile_points))
    grid = np.unique(np.concatenate(grids)) if grids else np.array([r0])
    sol.grid = grid
    sol.u = np.atleast_1d(sol.u_at(grid))
    sol.u_prime = np.atleast_1d(sol.u_prime_at(grid))
    return sol


def scattering_length(v: RadialPotential, r_max: float | None = None,
                      tol: float = DEFAULT_TOL) -> float:
    """a(v) for any nonnegative compactly supported radial potential."""
    if v.support_radius == 0.0 and not v.pieces and not v.shells:
        return 0.0
    return solve(v, r_max=r_max, tol=tol).a


# -- g = v*(1 - omega) and radial transforms --------------------------------


@dataclass
class RadialKernel:
    """A radial function given piecewise plus finite spherical shell measures.

    `funcs` holds (r_lo, r_hi, f) with f vectorized; `shells` holds
    (radius, mass). `scale` is the shortest radial variation length, used to
    size quadrature panels.
    """

    funcs: list
    shells: list
    scale: float = math.inf

    def support(self) -> float:
        hi = max([h for (_, h, _) in self.funcs] + [r for (r, _) in self.shells] + [0.0])
        return hi

    def pointwise(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for lo, hi, f in self.funcs:
            m = (r >= lo) & (r < hi)
            if m.any():
                out[m] = f(r[m])
        return out

    def integral(self) -> float:
        total = sum(m for (_, m) in self.shells)
        for lo, hi, f in self.funcs:
            total += 4.0 * math.pi * panel_integrate_scaled(
                lambda x, f=f: f(x) * x * x, lo, hi, scale=self.scale, min_panels=4)
        return total

    def weighted_integral(self, w) -> float:
        """Integral of kernel * w over R^3 (w vectorized radial)."""
        total = sum(m * float(np.atleast_1d(w(np.array([r])))[0]) for (r, m) in self.shells)
        for lo, hi, f in self.funcs:
            total += 4.0 * math.pi * panel_integrate_scaled(
                lambda x, f=f: f(x) * w(x) * x * x, lo, hi, scale=self.scale, min_panels=4)
        return total


def g_of(v: RadialPotential, sol: ScatteringSolution) -> RadialKernel:
    """g = v * phi as a kernel; hard cores contribute the boundary shell.

    Distributionally -2*Laplacian(omega) = g, so a hard core of radius c adds
    a surface measure of mass 8 pi c u'(c); the identity (8 pi)^-1 int g = a
    holds for the total.
    """
    funcs = []
    scale = math.inf
    for p in v.pieces:
        if isinstance(p, ConstPiece) and p.height == 0.0:
            continue
        kap = math.sqrt((p.height if isinstance(p, ConstPiece) else max(p.v_lo, p.v_hi)) / 2.0)
        if kap > 0:
            scale = min(scale, 0.5 / kap)

        def f(r, p=p):
            return np.asarray(p.value(r), dtype=float) * np.atleast_1d(sol.phi(r))

        funcs.append((p.r_lo, p.r_hi, f))
    shells = []
    if v.hard_core_radius > 0:
        c = v.hard_core_radius
        shells.append((c, 8.0 * math.pi * c * float(sol.u_prime_at(c))))
    for s in v.shells:
        shells.append((s.radius, s.mass * float(sol.phi(s.radius))))
    return RadialKernel(funcs=funcs, shells=shells, scale=scale)


def _sinc(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-8
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(xs) / xs)


def radial_fourier(f: RadialKernel, k: float) -> float:
    """f_hat(k) = 4 pi int f(r) sinc(kr) r^2 dr plus sum_m m sinc(k rho)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    total = sum(m * float(_sinc(np.array([k * r]))[0]) for (r, m) in f.shells)
    osc = math.inf if k == 0 else math.pi / (2.0 * k)
    for lo, hi, fn in f.funcs:
        total += 4.0 * math.pi * panel_integrate_scaled(
            lambda x, fn=fn: fn(x) * _sinc(k * x) * x * x,
            lo, hi, scale=min(f.scale, osc), min_panels=4)
    return total


def radial_fourier_batch(f: RadialKernel, k: np.ndarray, order: int = 32) -> np.ndarray:
    """Vectorized f_hat over a k-grid (one shared r-rule sized for max k)."""
    k = np.asarray(k, dtype=float)
    out = np.zeros_like(k)
    for r, m in f.shells:
        out += m * _sinc(k * r)
    kmax = float(np.max(k)) if k.size else 0.0
    osc = math.inf if kmax == 0 else math.pi / (2.0 * kmax)
    x, w = gl_nodes(order)
    for lo, hi, fn in f.funcs:
        scale = min(f.scale, osc)
        panels = 4 if not np.isfinite(scale) else max(4, int(np.ceil((hi - lo) / scale)))
        panels = min(panels, 200_000)
        edges = np.linspace(lo, hi, panels + 1)
        plo = edges[:-1, None]
        h = (edges[1:] - edges[:-1])[:, None]
        nodes = (plo + h * x[None, :]).ravel()
        wts = (h * w[None, :]).ravel()
        vals = fn(nodes) * nodes * nodes * wts
        # chunk over k to keep the outer product small
        for start in range(0, k.size, 256):
            kk = k[start:start + 256, None]
            out[start:start + 256] += 4.0 * math.pi * np.sum(
                vals[None, :] * _sinc(kk * nodes[None, :]), axis=1)
    return out


def _coulomb_potential(f: RadialKernel, r: np.ndarray) -> np.ndarray:
    """int f(y)/|x-y| dy at |x| = r, by Newton's shell theorem."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    for rho, m in f.shells:
        out += m / np.maximum(r, rho)
    for lo, hi, fn in f.funcs:
        for i, ri in enumerate(r):
            inner_hi = min(ri, hi)
            inner = 0.0
            if inner_hi > lo:
                inner = panel_integrate_scaled(
                    lambda x, fn=fn: fn(x) * x * x, lo, inner_hi,
                    scale=f.scale, min_panels=4)
            outer = 0.0
            if hi > max(ri, lo):
                outer = panel_integrate_scaled(
                    lambda x, fn=fn: fn(x) * x, max(ri, lo), hi,
                    scale=f.scale, min_panels=4)
            out[i] += 4.0 * math.pi * ((inner / ri if ri > 0 else 0.0) + outer)
            if ri == 0.0 and inner_hi > lo:
                # limit (1/r) int_0^r -> 0; nothing to add
                pass
    return out


def fhat_product_integral(f1: RadialKernel, f2: RadialKernel) -> float:
    """int_0^inf f1_hat(k) f2_hat(k) dk, via the equivalent Coulomb integral.

    Uses int_0^inf f1_hat f2_hat dk = (pi/2) intint f1(x) f2(y)/|x-y| dx dy,
    which is smooth in position space and free of Fourier-tail truncation.
    """
    total = 0.0
    scale = min(f1.scale, f2.scale)
    for rho, m in f1.shells:
        total += m * float(_coulomb_potential(f2, np.array([rho]))[0])
    for lo, hi, fn in f1.funcs:
        def integrand(x, fn=fn):
            return fn(x) * _coulomb_potential(f2, x) * x * x
        total += 4.0 * math.pi * panel_integrate_scaled(
            integrand, lo, hi, scale=scale, min_panels=8)
    return (math.pi / 2.0) * total


def fhat_squared_integral(f: RadialKernel) -> float:
    """int_0^inf f_hat(k)^2 dk."""
    return fhat_product_integral(f, f)


def g_omega_integral(sol: ScatteringSolution, g: RadialKernel) -> float:
    """int g(x) omega(x) dx, the zeroth Fourier mode of g*omega."""
    def w(r):
        return np.atleast_1d(sol.omega(r))
    return g.weighted_integral(w)


def variational_energy(phi_fn, dphi_fn, v: RadialPotential, R_tilde: float,
                       boundary_tol: float = 1e-8) -> float:
    """Energy of a radial trial function with phi(R_tilde) = 1.

    Returns int_{|x|<=R_tilde} |grad phi|^2 + (1/2) v |phi|^2. The exact
    minimizer gives 4 pi a / (1 - a/R_tilde). A nonzero trial value on a
    hard core gives +inf.
    """
    if R_tilde <= v.support_radius:
        raise ValueError("R_tilde must exceed the support radius")
    val_b = float(np.atleast_1d(phi_fn(np.array([R_tilde])))[0])
    if abs(val_b - 1.0) > boundary_tol:
        raise ValueError(f"trial function has phi(R_tilde) = {val_b!r}, expected 1")
    r0 = v.hard_core_radius
    if r0 > 0:
        edge = float(np.atleast_1d(phi_fn(np.array([r0])))[0])
        if abs(edge) > boundary_tol:
            return math.inf
    pts = [b for b in v.breakpoints() if r0 <= b <= R_tilde] + [R_tilde]
    pts = sorted(set(pts))
    scale = math.inf
    for p in v.pieces:
        h = p.height if isinstance(p, ConstPiece) else max(p.v_lo, p.v_hi)
        if h > 0:
            scale = min(scale, 0.5 / math.sqrt(h / 2.0))
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        def integrand(r):
            grad = np.asarray(dphi_fn(r), dtype=float)
            vv = np.asarray(v.evaluate(r), dtype=float)
            ph = np.asarray(phi_fn(r), dtype=float)
            return grad * grad + 0.5 * vv * ph * ph
        total += 4.0 * math.pi * panel_integrate_scaled(
            lambda r: integrand(r) * r * r, lo, hi, scale=scale, min_panels=8)
    for s in v.shells:
        ph = float(np.atleast_1d(phi_fn(np.array([s.radius])))[0])
        total += 0.5 * s.mass * ph * ph
    return total
