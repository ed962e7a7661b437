"""Window localization for banded Hermitian matrices.

For a Hermitian (N+1)x(N+1) matrix A with band decomposition A = sum_k A^(k)
(A^(k) = k-th supra- plus infra-diagonal), a normalized psi, and a window
length M', some window [n'+1, n'+M'] carries a vector phi with

    <phi, A phi> <= <psi, A psi> + C/M'^2 sum_{k=1}^{M'-1} k^2 |d_k|
                                 + C sum_{k=M'}^{N} |d_k|,

where d_k = <psi, A^(k) psi> and C is a universal constant. `localize`
returns the best window's ground vector and energy; `verify` checks the
bound for a supplied C (the constant is not pinned here; the test suite
records an empirically calibrated ensemble value).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BandedHermitian", "band_weights", "localize", "verify", "LocalizeResult"]


@dataclass(frozen=True)
class BandedHermitian:
    """Bands keyed by offset k >= 0; offset k holds the N+1-k entries A[i, i+k].

    The Hermitian closure (infra-diagonals as conjugates) is implied. The
    diagonal must be real.
    """

    n: int
    bands: dict

    def __post_init__(self):
        for k, vals in self.bands.items():
            vals = np.asarray(vals)
            if not (0 <= k < self.n):
                raise ValueError(f"band offset {k} outside [0, {self.n})")
            if vals.shape != (self.n - k,):
                raise ValueError(f"band {k} must have length {self.n - k}")
            if k == 0 and np.iscomplexobj(vals) and np.any(np.abs(vals.imag) > 0):
                raise ValueError("diagonal must be real")

    def to_dense(self) -> np.ndarray:
        dtype = complex if any(np.iscomplexobj(v) for v in self.bands.values()) else float
        A = np.zeros((self.n, self.n), dtype=dtype)
        for k, vals in self.bands.items():
            idx = np.arange(self.n - k)
            A[idx, idx + k] = vals
            if k > 0:
                A[idx + k, idx] = np.conj(vals)
        return A

    @classmethod
    def from_dense(cls, A: np.ndarray, atol: float = 1e-12) -> "BandedHermitian":
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("need a square matrix")
        if not np.allclose(A, A.conj().T, atol=atol):
            raise ValueError("matrix is not Hermitian")
        n = A.shape[0]
        bands = {}
        for k in range(n):
            diag = np.diagonal(A, offset=k)
            if np.any(np.abs(diag) > atol) or k == 0:
                bands[k] = diag.real.copy() if k == 0 else diag.copy()
        return cls(n=n, bands=bands)


def _check_psi(A: BandedHermitian, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.shape != (A.n,):
        raise ValueError(f"psi must have shape ({A.n},)")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("psi must be normalized")
    return psi


def band_weights(A: BandedHermitian, psi: np.ndarray) -> dict:
    """d_k = <psi, A^(k) psi> for each stored band; real, summing to <psi, A psi>."""
    psi = _check_psi(A, psi)
    out = {}
    for k in sorted(A.bands):
        vals = A.bands[k]
        if k == 0:
            out[0] = float(np.sum(np.abs(psi) ** 2 * np.real(vals)))
        else:
            out[k] = float(2.0 * np.real(np.sum(np.conj(psi[: A.n - k]) * vals * psi[k:])))
    return out


@dataclass
class LocalizeResult:
    phi: np.ndarray
    energy: float
    window_start: int
    lam: float
    inner_weight: float  # sum_{k=1}^{M'-1} k^2 |d_k|
    outer_weight: float  # sum_{k>=M'} |d_k|
    Mprime: int

    def bound(self, C: float) -> float:
        return self.lam + C * (self.inner_weight / self.Mprime**2 + self.outer_weight)


def localize(A: BandedHermitian, psi: np.ndarray, Mprime: int) -> LocalizeResult:
    """Best window of length Mprime: lowest ground energy of any principal
    Mprime x Mprime submatrix, ties resolved toward the lowest start index."""
    psi = _check_psi(A, psi)
    if not (1 <= Mprime <= A.n):
        raise ValueError("Mprime must lie in [1, N+1]")
    d = band_weights(A, psi)
    lam = sum(d.values())
    inner = sum(k * k * abs(v) for k, v in d.items() if 1 <= k <= Mprime - 1)
    outer = sum(abs(v) for k, v in d.items() if k >= Mprime)

    dense = A.to_dense()
    nwin = A.n - Mprime + 1
    sw = np.lib.stride_tricks.sliding_window_view(dense, (Mprime, Mprime))
    windows = sw[np.arange(nwin), np.arange(nwin)]  # (nwin, M', M') principal blocks
    evals = np.linalg.eigvalsh(windows)[:, 0]
    best = int(np.argmin(evals))  # argmin returns the first (lowest) index on ties
    _, vecs = np.linalg.eigh(windows[best])
    phi = np.zeros(A.n, dtype=dense.dtype)
    phi[best:best + Mprime] = vecs[:, 0]
    return LocalizeResult(phi=phi, energy=float(evals[best]), window_start=best,
                          lam=float(lam), inner_weight=float(inner),
                          outer_weight=float(outer), Mprime=Mprime)


def verify(A: BandedHermitian, psi: np.ndarray, Mprime: int, C: float):
    """True iff the localized energy satisfies the band-penalty bound with this C.

    Returns (ok, margin) with margin = bound - energy.
    """
    res = localize(A, psi, Mprime)
    bound = res.bound(C)
    margin = bound - res.energy
    return bool(res.energy <= bound), float(margin)
