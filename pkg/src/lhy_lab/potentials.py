"""Radial, nonnegative interaction potentials with compact support.

Units: the kinetic operator is -Laplacian (hbar = 2m = 1), so the zero-energy
pair equation reads  -u'' + (1/2) v u = 0  and v carries units length^-2.
All lengths are dimensionless in the caller's chosen unit.

A potential is a hard core of radius >= 0, an ordered list of elementary
radial pieces (constant height or a linear ramp between two radii), and an
optional list of spherical surface ("shell") measures. Shell measures carry
a dimensionless mass m, meaning m times the normalized surface measure of
the sphere, so their full-space integral is exactly m.

Potential spec files are flat ``key = value`` text (one key per line, ``#``
comments allowed)::

    type = square_well      # hard_core | square_well | shell | tabulated | sum
    radius = 1.0
    height = 2.0            # square_well only (length^-2)
    mass = 25.132741        # shell only
    grid_file = vgrid.csv   # tabulated only, two columns: r, v(r)
    hard_core_radius = 0.0  # optional on square_well / tabulated / sum

A ``type = sum`` file is followed by one or more ``[component]`` blocks, each
holding the keys of a non-sum type. Parse errors report the offending line.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ConstPiece",
    "LinearPiece",
    "Shell",
    "RadialPotential",
    "PotentialSpecError",
    "hard_core",
    "square_well",
    "shell_potential",
    "tabulated",
    "cap_and_cut",
    "calR",
    "load_potential",
    "parse_potential_spec",
]


@dataclass(frozen=True)
class ConstPiece:
    """Constant height on [r_lo, r_hi)."""

    r_lo: float
    r_hi: float
    height: float

    def value(self, r):
        return np.where((r >= self.r_lo) & (r < self.r_hi), self.height, 0.0)

    def integral(self) -> float:
        return self.integral_above(self.r_lo)

    def integral_above(self, r: float) -> float:
        lo = min(max(r, self.r_lo), self.r_hi)
        hi = self.r_hi
        # factored cube difference: exact when hi - lo is tiny
        cube = (hi - lo) * (hi * hi + hi * lo + lo * lo)
        return 4.0 * math.pi * self.height * cube / 3.0


@dataclass(frozen=True)
class LinearPiece:
    """Linear ramp from (r_lo, v_lo) to (r_hi, v_hi)."""

    r_lo: float
    r_hi: float
    v_lo: float
    v_hi: float

    def slope(self) -> float:
        return (self.v_hi - self.v_lo) / (self.r_hi - self.r_lo)

    def value(self, r):
        inside = (r >= self.r_lo) & (r < self.r_hi)
        return np.where(inside, self.v_lo + self.slope() * (r - self.r_lo), 0.0)

    def integral_above(self, r: float) -> float:
        lo = min(max(r, self.r_lo), self.r_hi)
        hi = self.r_hi
        c0 = self.v_lo - self.slope() * self.r_lo
        c1 = self.slope()
        cube = (hi - lo) * (hi * hi + hi * lo + lo * lo)
        quart = (hi - lo) * (hi + lo) * (hi * hi + lo * lo)
        # 4 pi int (c0 + c1 r) r^2 dr
        return 4.0 * math.pi * (c0 * cube / 3.0 + c1 * quart / 4.0)

    def integral(self) -> float:
        return self.integral_above(self.r_lo)


@dataclass(frozen=True)
class Shell:
    """Surface measure of total mass `mass` on the sphere |x| = radius."""

    radius: float
    mass: float


@dataclass(frozen=True)
class RadialPotential:
    hard_core_radius: float = 0.0
    pieces: tuple = ()
    shells: tuple = ()
    support_radius: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.hard_core_radius < 0:
            raise ValueError("hard_core_radius must be >= 0")
        prev = self.hard_core_radius
        for p in self.pieces:
            if p.r_hi <= p.r_lo:
                raise ValueError(f"empty or reversed piece [{p.r_lo}, {p.r_hi}]")
            if p.r_lo < prev - 1e-15:
                raise ValueError("pieces overlap or precede the hard core")
            if isinstance(p, ConstPiece):
                if p.height < 0:
                    raise ValueError("negative height")
            else:
                if min(p.v_lo, p.v_hi) < 0:
                    raise ValueError("negative tabulated value")
            prev = p.r_hi
        for s in self.shells:
            if s.radius < self.hard_core_radius or s.mass < 0:
                raise ValueError("shell inside hard core or with negative mass")
        extent = max(
            [self.hard_core_radius]
            + [p.r_hi for p in self.pieces]
            + [s.radius for s in self.shells]
        )
        if self.support_radius is None:
            object.__setattr__(self, "support_radius", extent)
        elif self.support_radius < extent - 1e-15:
            raise ValueError("support_radius smaller than the potential's extent")

    # -- pointwise / integral functionals -------------------------------

    def evaluate(self, r):
        """v(r); +inf inside the hard core, 0 beyond the support.

        Shell measures have no pointwise value and do not contribute here.
        """
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("r must be >= 0")
        out = np.zeros_like(r)
        for p in self.pieces:
            out = out + p.value(r)
        if self.hard_core_radius > 0:
            out = np.where(r < self.hard_core_radius, np.inf, out)
        return out if out.ndim else float(out)

    @property
    def has_hard_core(self) -> bool:
        return self.hard_core_radius > 0

    def integral(self) -> float:
        """Full-space integral of v (+inf in the hard-core case)."""
        if self.has_hard_core:
            return math.inf
        return sum(p.integral() for p in self.pieces) + sum(s.mass for s in self.shells)

    def tail_integral(self, r: float) -> float:
        """Integral of v over {|x| >= r}; the hard core only counts if r <= its radius."""
        if self.has_hard_core and r <= self.hard_core_radius:
            return math.inf
        total = sum(p.integral_above(r) for p in self.pieces)
        total += sum(s.mass for s in self.shells if s.radius >= r)
        return total

    def breakpoints(self) -> list[float]:
        """Radii at which the potential is non-smooth, in increasing order."""
        pts = {self.hard_core_radius}
        for p in self.pieces:
            pts.add(p.r_lo)
            pts.add(p.r_hi)
        for s in self.shells:
            pts.add(s.radius)
        pts.add(self.support_radius)
        return sorted(pts)

    def piece_at(self, r: float):
        for p in self.pieces:
            if p.r_lo <= r < p.r_hi:
                return p
        return None


# -- constructors --------------------------------------------------------


def hard_core(radius: float) -> RadialPotential:
    return RadialPotential(hard_core_radius=radius)


def square_well(height: float, radius: float, hard_core_radius: float = 0.0) -> RadialPotential:
    pieces = ()
    if radius > hard_core_radius:
        pieces = (ConstPiece(hard_core_radius, radius, height),)
    return RadialPotential(hard_core_radius=hard_core_radius, pieces=pieces)


def shell_potential(mass: float, radius: float) -> RadialPotential:
    return RadialPotential(shells=(Shell(radius, mass),))


def tabulated(r, v, hard_core_radius: float = 0.0) -> RadialPotential:
    """Piecewise-linear potential through the strictly increasing grid (r, v)."""
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    if r.ndim != 1 or r.size < 2 or v.shape != r.shape:
        raise ValueError("need matching 1-d grids with at least two points")
    if np.any(np.diff(r) <= 0):
        raise ValueError("radial grid must be strictly increasing")
    pieces = tuple(
        LinearPiece(float(r[i]), float(r[i + 1]), float(v[i]), float(v[i + 1]))
        for i in range(r.size - 1)
    )
    return RadialPotential(hard_core_radius=hard_core_radius, pieces=pieces)


def combine(parts: list[RadialPotential]) -> RadialPotential:
    """Sum of potentials with non-overlapping function pieces."""
    hc = max((p.hard_core_radius for p in parts), default=0.0)
    pieces = sorted((q for p in parts for q in p.pieces), key=lambda q: q.r_lo)
    shells = sorted((s for p in parts for s in p.shells), key=lambda s: s.radius)
    return RadialPotential(hard_core_radius=hc, pieces=tuple(pieces), shells=tuple(shells))


# -- transforms and functionals ------------------------------------------


def cap_and_cut(v: RadialPotential, n: float) -> RadialPotential:
    """Height cap min{v, n} combined with the spatial cutoff to {|x| <= n}.

    The hard core becomes a plateau of height n. Shell measures are kept
    verbatim inside the cutoff radius: a measure has no pointwise height to
    cap, and keeping it preserves v_capped <= v.
    """
    if n <= 0:
        raise ValueError("cap height must be positive")
    pieces: list = []
    if v.hard_core_radius > 0:
        pieces.append(ConstPiece(0.0, min(v.hard_core_radius, n), n))
    for p in v.pieces:
        lo, hi = p.r_lo, min(p.r_hi, n)
        if hi <= lo:
            continue
        if isinstance(p, ConstPiece):
            pieces.append(ConstPiece(lo, hi, min(p.height, n)))
        else:
            # clamp a linear ramp at height n, splitting where it crosses
            s = p.slope()
            v_lo = p.v_lo + s * (lo - p.r_lo)
            v_hi = p.v_lo + s * (hi - p.r_lo)
            if v_lo <= n and v_hi <= n:
                pieces.append(LinearPiece(lo, hi, v_lo, v_hi))
            elif v_lo >= n and v_hi >= n:
                pieces.append(ConstPiece(lo, hi, n))
            else:
                rc = lo + (n - v_lo) / s
                if v_lo < n:
                    pieces.append(LinearPiece(lo, rc, v_lo, n))
                    pieces.append(ConstPiece(rc, hi, n))
                else:
                    pieces.append(ConstPiece(lo, rc, n))
                    pieces.append(LinearPiece(rc, hi, n, v_hi))
    shells = tuple(s for s in v.shells if s.radius <= n)
    return RadialPotential(hard_core_radius=0.0, pieces=tuple(pieces), shells=shells)


def calR(v: RadialPotential, a: float) -> float:
    """(8 pi a)^-1 integral of v, the Born-to-scattering-length ratio."""
    if a <= 0:
        raise ValueError("a must be positive")
    total = v.integral()
    if not math.isfinite(total):
        raise ValueError("potential has infinite integral (hard core)")
    return total / (8.0 * math.pi * a)


# -- spec file parsing ----------------------------------------------------


class PotentialSpecError(ValueError):
    """Malformed potential spec file; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_TYPES = {"hard_core", "square_well", "shell", "tabulated", "sum"}


def _parse_blocks(text: str):
    """Split a spec file into (header_block, [component_blocks]) of (line, key, value)."""
    blocks: list[list[tuple[int, str, str]]] = [[]]
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[component]":
            blocks.append([])
            continue
        if line.startswith("["):
            raise PotentialSpecError(f"unknown section {line!r}", i)
        if "=" not in line:
            raise PotentialSpecError("expected 'key = value'", i)
        key, _, value = line.partition("=")
        blocks[-1].append((i, key.strip(), value.strip()))
    return blocks[0], blocks[1:]


def _get(entries, key, line_hint, *, required=True, conv=float):
    for line, k, value in entries:
        if k == key:
            try:
                return conv(value)
            except ValueError:
                raise PotentialSpecError(f"bad value for {key!r}: {value!r}", line) from None
    if required:
        raise PotentialSpecError(f"missing key {key!r}", line_hint)
    return None


def _check_keys(entries, allowed):
    for line, k, _ in entries:
        if k not in allowed:
            raise PotentialSpecError(f"unknown key {k!r}", line)


def _build_simple(entries, base_dir: Path) -> RadialPotential:
    first_line = entries[0][0] if entries else 1
    kind = _get(entries, "type", first_line, conv=str)
    if kind not in _TYPES or kind == "sum":
        raise PotentialSpecError(f"unknown type {kind!r}", first_line)
    if kind == "hard_core":
        _check_keys(entries, {"type", "radius"})
        return hard_core(_get(entries, "radius", first_line))
    if kind == "square_well":
        _check_keys(entries, {"type", "radius", "height", "hard_core_radius"})
        hc = _get(entries, "hard_core_radius", first_line, required=False) or 0.0
        return square_well(_get(entries, "height", first_line),
                           _get(entries, "radius", first_line), hc)
    if kind == "shell":
        _check_keys(entries, {"type", "radius", "mass"})
        return shell_potential(_get(entries, "mass", first_line),
                               _get(entries, "radius", first_line))
    # tabulated
    _check_keys(entries, {"type", "grid_file", "hard_core_radius"})
    grid_file = _get(entries, "grid_file", first_line, conv=str)
    hc = _get(entries, "hard_core_radius", first_line, required=False) or 0.0
    path = base_dir / grid_file
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
        data = np.array([[float(c) for c in row[:2]] for row in rows])
    except (OSError, ValueError) as exc:
        raise PotentialSpecError(f"cannot read grid file {path}: {exc}", first_line) from None
    return tabulated(data[:, 0], data[:, 1], hard_core_radius=hc)


def parse_potential_spec(text: str, base_dir: Path | str = ".") -> RadialPotential:
    base_dir = Path(base_dir)
    header, components = _parse_blocks(text)
    if not header:
        raise PotentialSpecError("empty potential spec", 1)
    kind = _get(header, "type", header[0][0], conv=str)
    if kind != "sum":
        if components:
            raise PotentialSpecError("[component] blocks need 'type = sum'",
                                     header[0][0])
        return _build_simple(header, base_dir)
    _check_keys(header, {"type", "hard_core_radius"})
    if not components:
        raise PotentialSpecError("'type = sum' needs at least one [component]", header[0][0])
    parts = [_build_simple(block, base_dir) for block in components]
    hc = _get(header, "hard_core_radius", header[0][0], required=False)
    if hc:
        parts.append(hard_core(hc))
    return combine(parts)


def load_potential(path: str | Path) -> RadialPotential:
    path = Path(path)
    return parse_potential_spec(path.read_text(), base_dir=path.parent)
