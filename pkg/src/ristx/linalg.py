"""Scalar and matrix primitives shared by the whole package.

Everything here is a pure function of its inputs: the Bessel-function
ratio that gives the circular mean resultant length of the RIS phase
noise, the Hermitian eigendecomposition used by the precoder and the
phase-shift surrogate, and small diagonal helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HermitianEigen",
    "bessel_i_ratio",
    "hermitian_eig",
    "max_eigenvalue",
    "diag_part",
    "diag_embed",
]

# Relative Hermitian-asymmetry budget accepted before factoring.
_HERM_ASYM_TOL = 1e-8
# Switch point between the continued fraction and the asymptotic series.
_BESSEL_ASYMPTOTIC_CUTOFF = 200.0


def bessel_i_ratio(concentration: float) -> float:
    """Ratio I1(x)/I0(x) of modified Bessel functions of the first kind.

    Evaluated as a ratio throughout so it stays finite for large
    arguments where I0 and I1 individually overflow: a Perron/Gauss
    continued fraction below ``x=200`` and the large-argument series
    ``1 - 1/(2x) - 1/(8x^2) - 1/(8x^3) - 25/(128x^4) - 13/(32x^5)``
    above it. Accurate to ~1e-12 over the whole domain.
    """
    x = float(concentration)
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"concentration must be finite and >= 0, got {concentration!r}")
    if x == 0.0:
        return 0.0
    if x >= _BESSEL_ASYMPTOTIC_CUTOFF:
        inv = 1.0 / x
        return 1.0 - inv * (
            0.5 + inv * (0.125 + inv * (0.125 + inv * (25.0 / 128.0 + inv * (13.0 / 32.0))))
        )
    # Backward evaluation of I1/I0 = 1/(2/x + 1/(4/x + 1/(6/x + ...))).
    # Depth grows with x; 2x + 40 levels is ample for x < 100.
    levels = int(2.0 * x) + 40
    r = 0.0
    for k in range(levels, 0, -1):
        r = 1.0 / (2.0 * k / x + r)
    return r


@dataclass(frozen=True)
class HermitianEigen:
    """Eigendecomposition A = basis @ diag(values) @ basis^H.

    ``basis`` has orthonormal columns; ``values`` are real and sorted
    descending so values[0] is always the largest eigenvalue.
    """

    basis: np.ndarray
    values: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.values) @ self.basis.conj().T


def _as_square(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def hermitian_eig(a: np.ndarray) -> HermitianEigen:
    """Eigendecompose a (numerically) Hermitian matrix.

    The input is symmetrized as (A + A^H)/2 first; compositions of diag
    and Hadamard products accumulate tiny asymmetries that would
    otherwise leak into the factorization. Asymmetry beyond
    1e-8 * ||A||_F is rejected as a genuinely non-Hermitian input.
    """
    a = _as_square(np.asarray(a, dtype=complex), "input")
    norm = np.linalg.norm(a)
    if norm > 0:
        asym = np.linalg.norm(a - a.conj().T)
        if asym > _HERM_ASYM_TOL * norm:
            raise ValueError(
                f"input is not Hermitian: asymmetry {asym:.3e} exceeds {_HERM_ASYM_TOL:.0e} * ||A||"
            )
    sym = 0.5 * (a + a.conj().T)
    values, basis = np.linalg.eigh(sym)
    order = np.argsort(values)[::-1]
    return HermitianEigen(basis=basis[:, order], values=values[order])


def max_eigenvalue(a: np.ndarray) -> float:
    """Largest eigenvalue of a Hermitian matrix."""
    return float(hermitian_eig(a).values[0])


def diag_part(a: np.ndarray) -> np.ndarray:
    """Diagonal of a square matrix as a 1-D vector."""
    return np.diagonal(_as_square(a, "input")).copy()


def diag_embed(v: np.ndarray) -> np.ndarray:
    """Diagonal matrix built from a 1-D vector."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    return np.diag(v)
