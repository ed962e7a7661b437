"""Numerics for dilute Bose gas energetics.

Radial scattering-length solvers, the controlled low-integral approximation
of singular potentials, Bogoliubov mode data with the dilute-gas ground-state
integral, the cosine-power localization window and its renormalized
potentials, an exact-rational asymptotic parameter checker, and the banded
matrix localization bound.
"""

from . import (  # noqa: F401
    approximation,
    bogoliubov,
    localization,
    matrixloc,
    params,
    potentials,
    scattering,
)

__version__ = "0.1.0"
