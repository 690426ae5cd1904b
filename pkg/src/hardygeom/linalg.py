"""Dense complex linear algebra with explicit tolerance contracts.

Everything numerical here is LAPACK via numpy; the value added is the
contract layer: ordering conventions, hybrid tolerances of the form
tol * max(1, ||A||_F), and rank bookkeeping for the nearly singular Gram
matrices that derivative-kernel bases routinely produce.

Intended scale is "desk size" (up to ~2000 x 2000 dense Hermitian).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HERMITIAN_TOL",
    "RANK_TOL",
    "HermitianEigen",
    "Whitener",
    "hermitian_eigen",
    "psd_sqrt_inverse",
    "singular_values",
]

HERMITIAN_TOL = 1e-12
RANK_TOL = 1e-10


def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def _hybrid_scale(m: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(m)))


@dataclass(frozen=True, eq=False)
class HermitianEigen:
    """Eigendecomposition A = V diag(w) V* with w ascending, V unitary."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True, eq=False)
class Whitener:
    """Rank-revealing inverse square root of a PSD matrix.

    ``matrix`` has one column per kept eigendirection, ordered by
    descending eigenvalue, and satisfies matrix* @ G @ matrix = I on the
    numerical range of G.  ``spectrum`` is the full ascending eigenvalue
    list the rank decision was made from.
    """

    matrix: np.ndarray
    kept: int
    dropped: int
    spectrum: np.ndarray


def hermitian_eigen(a, tol: float = HERMITIAN_TOL) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input must be Hermitian within tol * max(1, ||A||_F); it is then
    symmetrized exactly before factorization so roundoff-level asymmetry
    never leaks into the result.
    """
    m = _as_matrix(a)
    n, k = m.shape
    if n != k:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    deviation = float(np.linalg.norm(m - m.conj().T))
    if deviation > tol * _hybrid_scale(m):
        raise ValueError(
            f"matrix is not Hermitian: ||A - A*||_F = {deviation:.3e} "
            f"exceeds {tol:g} * max(1, ||A||_F)"
        )
    h = (m + m.conj().T) / 2.0
    w, v = np.linalg.eigh(h)
    return HermitianEigen(eigenvalues=w, eigenvectors=v)


def psd_sqrt_inverse(g, rank_tol: float = RANK_TOL) -> Whitener:
    """Whitener W with W* G W = I on the numerical range of PSD G.

    Rank is decided by the eigenvalue threshold rank_tol * lambda_max;
    directions at or below it are dropped and counted.  An eigenvalue
    below -rank_tol * lambda_max means the input was not a Gram matrix.
    """
    eig = hermitian_eigen(g)
    w = eig.eigenvalues
    if w.size == 0:
        return Whitener(np.zeros((0, 0), dtype=complex), 0, 0, w)
    lam_max = max(float(w[-1]), 0.0)
    cut = rank_tol * lam_max
    if float(w[0]) < -max(cut, np.finfo(float).tiny):
        raise ValueError(
            f"matrix is not PSD: eigenvalue {w[0]:.3e} below -rank_tol*lambda_max"
        )
    keep = np.flatnonzero(w > cut)[::-1]  # descending eigenvalue order
    cols = eig.eigenvectors[:, keep] / np.sqrt(w[keep])
    return Whitener(
        matrix=cols,
        kept=int(keep.size),
        dropped=int(w.size - keep.size),
        spectrum=w,
    )


def singular_values(a) -> np.ndarray:
    """Singular values of A, ascending."""
    m = _as_matrix(a)
    s = np.linalg.svd(m, compute_uv=False)
    return s[::-1].copy()
