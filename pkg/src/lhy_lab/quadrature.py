"""Deterministic Gauss-Legendre panel quadrature helpers.

All integrals in this package use fixed nodes so that repeated runs are
byte-identical. Panel counts are derived from the integrand's length and
oscillation scales, never from stochastic refinement.
"""

from __future__ import annotations

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gl_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1], cached per order."""
    try:
        return _GL_CACHE[order]
    except KeyError:
        x, w = np.polynomial.legendre.leggauss(order)
        pair = ((x + 1.0) / 2.0, w / 2.0)
        _GL_CACHE[order] = pair
        return pair


def panel_integrate(f, a: float, b: float, *, panels: int = 1, order: int = 32) -> float:
    """Integrate a vectorized callable over [a, b] with `panels` GL panels."""
    if b <= a:
        return 0.0
    panels = max(1, int(panels))
    x, w = gl_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    lo = edges[:-1, None]
    h = (edges[1:] - edges[:-1])[:, None]
    pts = lo + h * x[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return float(np.sum(vals * w[None, :] * h))


def panel_integrate_scaled(f, a: float, b: float, *, scale: float, order: int = 32,
                           min_panels: int = 1, max_panels: int = 200_000) -> float:
    """Panel quadrature with panel width capped by `scale`.

    `scale` is the shortest variation length of the integrand (e.g. a quarter
    oscillation period or an exponential growth length).
    """
    if b <= a:
        return 0.0
    if not np.isfinite(scale) or scale <= 0:
        panels = min_panels
    else:
        panels = int(np.ceil((b - a) / scale))
        panels = min(max(panels, min_panels), max_panels)
    return panel_integrate(f, a, b, panels=panels, order=order)


def octave_integrate(f, lo: float, *, rel_tol: float = 1e-12, order: int = 32,
                     panels_per_octave=None, start_width: float = 1.0,
                     max_octaves: int = 120) -> float:
    """Integrate f on [lo, infinity) over doubling windows.

    Stops once two consecutive windows each contribute less than
    `rel_tol` times the accumulated total. `panels_per_octave(a, b)` may
    supply an oscillation-aware panel count for the window [a, b].
    """
    total = 0.0
    a = lo
    width = start_width
    small = 0
    for _ in range(max_octaves):
        b = a + width
        if panels_per_octave is None:
            panels = 16
        else:
            panels = panels_per_octave(a, b)
        part = panel_integrate(f, a, b, panels=panels, order=order)
        total += part
        if abs(part) <= rel_tol * max(abs(total), 1e-300):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        a = b
        width *= 2.0
    return total
