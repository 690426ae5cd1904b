"""Matrix nodes as Jordan specifications: minimal Blaschke products,
model-space bases, holomorphic functional calculus on Jordan blocks, and
matrix-kernel Taylor coefficients.

Matrices enter only as Jordan specs (eigenvalue, block size); general
Jordan decomposition is numerically ill-posed and everything downstream
depends only on the spec.  Holomorphic functions enter as Taylor jets or
polynomial coefficient lists, never as closures, so every operation can
be checked against series oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .disc import BlaschkeProduct, check_disc_point
from .kernels import KernelBasis, KernelVector

__all__ = [
    "JordanSpec",
    "TaylorJet",
    "apply_function_jordan",
    "jordan_matrix",
    "matrix_kernel_coeffs",
    "minimal_blaschke",
    "model_space_basis",
    "suggest_truncation",
]

_TAIL_TOL = 1e-12
_MAX_TRUNCATION = 10**6


@dataclass(frozen=True)
class JordanSpec:
    """Jordan form of a matrix node: blocks of (eigenvalue, size).

    All eigenvalues must lie strictly inside the unit disc.
    """

    blocks: tuple[tuple[complex, int], ...]

    def __post_init__(self):
        blocks = tuple(
            (check_disc_point(lam, "eigenvalue"), int(size))
            for lam, size in self.blocks
        )
        if not blocks:
            raise ValueError("spec needs at least one Jordan block")
        if any(size < 1 for _, size in blocks):
            raise ValueError("block sizes must be >= 1")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def diagonal(cls, eigenvalues) -> "JordanSpec":
        return cls(tuple((lam, 1) for lam in eigenvalues))

    @property
    def dim(self) -> int:
        return sum(size for _, size in self.blocks)

    def eigenvalues(self) -> tuple[complex, ...]:
        """Distinct eigenvalues in first-appearance order."""
        seen: list[complex] = []
        for lam, _ in self.blocks:
            if lam not in seen:
                seen.append(lam)
        return tuple(seen)

    def max_block(self, lam: complex) -> int:
        return max(size for mu, size in self.blocks if mu == lam)


@dataclass(frozen=True)
class TaylorJet:
    """Derivative data of a holomorphic function at one point.

    values = (f(c), f'(c), ..., f^(m-1)(c)): raw derivatives, no 1/k!
    factors; the functional calculus applies those where its formula
    needs them.
    """

    center: complex
    values: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "center", check_disc_point(self.center, "center"))
        values = tuple(complex(v) for v in self.values)
        if not values:
            raise ValueError("jet needs at least the function value")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, center, value, length: int = 1) -> "TaylorJet":
        return cls(center, (complex(value),) + (0j,) * (length - 1))


def minimal_blaschke(spec: JordanSpec) -> BlaschkeProduct:
    """Blaschke product of least degree vanishing on the node.

    Zeros are the distinct eigenvalues; the multiplicity of each is the
    maximal Jordan block size at that eigenvalue (repeated 1x1 blocks
    contribute only once).
    """
    lams = spec.eigenvalues()
    return BlaschkeProduct(
        zeros=lams,
        multiplicities=tuple(spec.max_block(lam) for lam in lams),
    )


def model_space_basis(spec: JordanSpec) -> KernelBasis:
    """Kernel basis of the model space carrying the node's interpolation data.

    One derivative chain of length max-block-size per distinct eigenvalue;
    the dimension equals the degree of the minimal Blaschke product (so
    diag(lam, lam) yields dimension 1, not 2).
    """
    vecs = []
    for lam in spec.eigenvalues():
        vecs.extend(KernelVector(lam, a) for a in range(spec.max_block(lam)))
    return KernelBasis(tuple(vecs))


def jordan_matrix(spec: JordanSpec) -> np.ndarray:
    """Dense matrix of the spec: block-diagonal Jordan blocks."""
    n = spec.dim
    m = np.zeros((n, n), dtype=complex)
    pos = 0
    for lam, size in spec.blocks:
        for i in range(size):
            m[pos + i, pos + i] = lam
            if i + 1 < size:
                m[pos + i, pos + i + 1] = 1.0
        pos += size
    return m


def apply_function_jordan(jets, spec: JordanSpec) -> np.ndarray:
    """f(A) for a Jordan spec from Taylor jets of f at the eigenvalues.

    Each block (lam, s) becomes the upper-triangular Toeplitz matrix with
    f^(k)(lam)/k! on the k-th superdiagonal; jets must be long enough for
    the largest block at their eigenvalue.

    ``jets`` is a mapping eigenvalue -> TaylorJet or an iterable of jets
    (keyed by their centers).
    """
    if not hasattr(jets, "get"):
        jets = {jet.center: jet for jet in jets}
    n = spec.dim
    out = np.zeros((n, n), dtype=complex)
    pos = 0
    for lam, size in spec.blocks:
        jet = jets.get(lam)
        if jet is None:
            raise ValueError(f"no jet provided for eigenvalue {lam}")
        if len(jet.values) < size:
            raise ValueError(
                f"jet at {lam} has {len(jet.values)} derivatives, block needs {size}"
            )
        for k in range(size):
            coeff = jet.values[k] / math.factorial(k)
            for i in range(size - k):
                out[pos + i, pos + i + k] = coeff
        pos += size
    return out


def suggest_truncation(spec: JordanSpec, tol: float = _TAIL_TOL) -> int:
    """Smallest N with the spectral-radius tail bound of ||A^n|| below tol.

    Per block (lam, s): ||J^n|| <= sum_{k<s} C(n,k) |lam|^(n-k).  The
    dominant term C(n, s-1) |lam|^(n-s+1) shrinks by factor
    (n+1)/(n+2-s) * |lam| per step; once that ratio is below
    q = (1 + rho)/2 < 1 the remaining tail is geometric and summable in
    closed form.
    """
    rho = max(abs(lam) for lam, _ in spec.blocks)
    q = (1.0 + rho) / 2.0

    def block_term(n: int, lam_abs: float, s: int) -> float:
        return sum(
            math.comb(n, k) * lam_abs ** max(n - k, 0) for k in range(min(s, n + 1))
        )

    n = max(size for _, size in spec.blocks)
    while n < _MAX_TRUNCATION:
        term = sum(block_term(n, abs(lam), s) for lam, s in spec.blocks)
        ratios = [
            (n + 1) / (n + 2 - s) * abs(lam) if n + 2 - s > 0 else math.inf
            for lam, s in spec.blocks
        ]
        if max(ratios) <= q and term * q / (1.0 - q) <= tol:
            return n + 1
        n += 1
    raise ValueError(f"no truncation below tol={tol:g} within {_MAX_TRUNCATION} terms")


def matrix_kernel_coeffs(
    spec: JordanSpec, u, v, n_terms: int | None = None, tol: float = _TAIL_TOL
) -> np.ndarray:
    """Taylor coefficients c_n = <v, A^n u> of the matrix kernel K_A(u, v).

    The kernel reproduces the functional calculus: <f, K_A(u,v)> =
    <f(A) u, v> for polynomials f, within the truncation tail.  With
    n_terms omitted the truncation length comes from suggest_truncation;
    an explicit n_terms below that is rejected as insufficient for tol.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != (spec.dim,) or v.shape != (spec.dim,):
        raise ValueError(f"u, v must be vectors of length {spec.dim}")
    needed = suggest_truncation(spec, tol)
    scale = float(np.linalg.norm(u) * np.linalg.norm(v))
    if scale > 1.0:
        needed = max(needed, suggest_truncation(spec, tol / scale))
    if n_terms is None:
        n_terms = needed
    elif n_terms < needed:
        raise ValueError(
            f"n_terms={n_terms} insufficient for tol={tol:g}; need >= {needed}"
        )
    a = jordan_matrix(spec)
    coeffs = np.zeros(n_terms, dtype=complex)
    w = u.copy()
    for n in range(n_terms):
        coeffs[n] = np.vdot(w, v)  # <v, A^n u> in the linear-first convention
        w = a @ w
    return coeffs
