"""Szego kernels, their conjugate-variable derivatives, and Gram matrices.

A vector spec (lam, a) stands for the a-th derivative of the Szego
kernel s_lam(z) = 1/(1 - conj(lam) z) in the conjugated parameter
variable, with NO 1/a! normalization.  The inner product convention is
linear in the first slot: <f, g> = sum_n f_n conj(g_n) on power-series
coefficients, so <f, (lam, a)> = f^(a)(lam).

Two independent evaluation routes are provided.  kernel_inner is the
production closed form

    <(lam, a), (mu, b)> = d_x^a d_y^b (1 - x y)^(-1) at x = conj(lam), y = mu
                        = sum_{i=0}^{min(a,b)} c_i(a,b) x^(b-i) y^(a-i)
                          / (1 - x y)^(a+b+1-i),

with exact integer coefficients c_i(a,b) = a! b! (a+b-i)! / (i! (a-i)! (b-i)!).
kernel_inner_series is the slow oracle: direct summation of the power
series sum_n [n!/(n-a)!][n!/(n-b)!] x^(n-a) y^(n-b) with a rigorous
geometric tail bound.  The series is summed in extended precision
(mpmath): for large |x y| with rotated phase the float64 series loses up
to ~16 digits to cancellation, which would make the oracle worthless
exactly where it is most needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .disc import BlaschkeProduct, check_disc_point, pseudo_hyperbolic

__all__ = [
    "MAX_ORDER",
    "GramResult",
    "KernelBasis",
    "KernelVector",
    "cross_gram",
    "gram_matrix",
    "kernel_inner",
    "kernel_inner_series",
]

MAX_ORDER = 64
_CONFLUENT_TOL = 1e-8
_SERIES_MAX_TERMS = 10**6


@dataclass(frozen=True)
class KernelVector:
    """Spec (point, order) for the derivative kernel d^order s_point."""

    point: complex
    order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "point", check_disc_point(self.point))
        order = int(self.order)
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"order must be in [0, {MAX_ORDER}], got {order}")
        object.__setattr__(self, "order", order)


@dataclass(frozen=True)
class KernelBasis:
    """Ordered basis of a model space as derivative-kernel specs.

    Invariants: no duplicate (point, order) pair, and for every point the
    orders present form a full chain 0..m-1 (the span of a kernel and its
    first m-1 derivatives; partial chains do not arise from inner
    functions).
    """

    vectors: tuple[KernelVector, ...]

    def __post_init__(self):
        vecs = tuple(self.vectors)
        if not vecs:
            raise ValueError("basis must be nonempty")
        seen = set()
        orders: dict[complex, set[int]] = {}
        for v in vecs:
            key = (v.point, v.order)
            if key in seen:
                raise ValueError(f"duplicate basis vector {key}")
            seen.add(key)
            orders.setdefault(v.point, set()).add(v.order)
        for point, got in orders.items():
            m = max(got) + 1
            if got != set(range(m)):
                raise ValueError(
                    f"incomplete derivative chain at {point}: orders {sorted(got)}"
                )
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_pairs(cls, pairs) -> "KernelBasis":
        return cls(tuple(KernelVector(p, a) for p, a in pairs))

    @classmethod
    def for_point(cls, point, multiplicity: int) -> "KernelBasis":
        return cls(tuple(KernelVector(point, a) for a in range(multiplicity)))

    @classmethod
    def for_blaschke(cls, product: BlaschkeProduct) -> "KernelBasis":
        """Basis of the model space of a finite Blaschke product."""
        vecs = []
        for z, m in zip(product.zeros, product.multiplicities):
            vecs.extend(KernelVector(z, a) for a in range(m))
        return cls(tuple(vecs))

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def points(self) -> tuple[complex, ...]:
        out = []
        for v in self.vectors:
            if v.point not in out:
                out.append(v.point)
        return tuple(out)


@lru_cache(maxsize=None)
def _mixed_derivative_coeffs(a: int, b: int) -> tuple[int, ...]:
    # c_i = a! b! (a+b-i)! / (i! (a-i)! (b-i)!), exact integers
    fact = math.factorial
    return tuple(
        fact(a) * fact(b) * fact(a + b - i) // (fact(i) * fact(a - i) * fact(b - i))
        for i in range(min(a, b) + 1)
    )


def _kernel_inner_raw(lam: complex, a: int, mu: complex, b: int) -> complex:
    x = lam.conjugate()
    y = mu
    d = 1.0 - x * y
    coeffs = _mixed_derivative_coeffs(a, b)
    total = 0j
    for i, c in enumerate(coeffs):
        total += c * x ** (b - i) * y ** (a - i) / d ** (a + b + 1 - i)
    return total


def _kernel_inner_mp(lam: complex, a: int, mu: complex, b: int) -> mpmath.mpc:
    """kernel_inner's closed form at the ambient mpmath precision.

    Near-confluent bases have Grams whose small eigenvalues fall below
    float64 resolution; callers wrap this in mpmath.workdps sized from
    the observed condition number.
    """
    x = mpmath.mpc(lam).conjugate()
    y = mpmath.mpc(mu)
    d = 1 - x * y
    total = mpmath.mpc(0)
    for i, c in enumerate(_mixed_derivative_coeffs(a, b)):
        total += c * x ** (b - i) * y ** (a - i) / d ** (a + b + 1 - i)
    return total


def _spec_key(v: KernelVector):
    return (v.order, v.point.real, v.point.imag)


def kernel_inner(u: KernelVector, v: KernelVector) -> complex:
    """<u, v> by the closed-form mixed derivative of (1 - x y)^(-1).

    Conjugate-symmetric exactly: the pair is evaluated in a canonical
    order and conjugated back, so swapping arguments conjugates the
    result bit-for-bit; a self-pairing is a squared norm and is returned
    with imaginary part exactly zero.
    """
    ku, kv = _spec_key(u), _spec_key(v)
    if kv < ku:
        return _kernel_inner_raw(v.point, v.order, u.point, u.order).conjugate()
    val = _kernel_inner_raw(u.point, u.order, v.point, v.order)
    if ku == kv:
        return complex(val.real, 0.0)
    return val


def _series_working_dps(a: int, b: int, q: float, tail_tol: float) -> int:
    # bound the largest term n^(a+b) q^n to size the working precision
    if q <= 0.0:
        return 30
    n_star = max(a + b + 1, int((a + b) / -math.log(q)) + 1)
    ln_max = (a + b) * math.log(n_star) + n_star * math.log(q)
    digits = 25 + max(0.0, ln_max / math.log(10.0)) - math.log10(tail_tol)
    if digits > 2000:
        raise ValueError("requested orders/points need implausible precision")
    return int(digits)


def kernel_inner_series(
    u: KernelVector,
    v: KernelVector,
    tail_tol: float = 1e-12,
    max_terms: int = _SERIES_MAX_TERMS,
) -> complex:
    """Series oracle for kernel_inner.

    Sums sum_n [n!/(n-a)!][n!/(n-b)!] x^(n-a) y^(n-b) (x = conj(lam),
    y = mu) until the rigorous geometric tail bound drops below
    tail_tol * max(1, |partial sum|).  Requires |lam|, |mu| <= 0.999;
    failing to converge within max_terms terms signals points too close
    to the boundary.
    """
    lam, a = u.point, u.order
    mu, b = v.point, v.order
    if abs(lam) > 0.999 or abs(mu) > 0.999:
        raise ValueError("series oracle requires |lam|, |mu| <= 0.999")
    q = abs(lam) * abs(mu)
    with mpmath.workdps(_series_working_dps(a, b, q, tail_tol)):
        x = mpmath.mpc(lam).conjugate()
        y = mpmath.mpc(mu)
        xy = x * y
        n0 = max(a, b)
        ff = lambda n, k: math.factorial(n) // math.factorial(n - k)
        term = mpmath.mpc(ff(n0, a) * ff(n0, b)) * x ** (n0 - a) * y ** (n0 - b)
        total = term
        n = n0
        while True:
            n += 1
            term = term * (mpmath.mpf(n * n) / ((n - a) * (n - b))) * xy
            total += term
            # terms beyond n shrink at least geometrically with ratio r
            r = (n + 1.0) ** 2 / ((n + 1.0 - a) * (n + 1.0 - b)) * q
            if r < 1.0:
                tail = abs(term) * r / (1.0 - r)
                if tail <= tail_tol * max(1.0, float(abs(total))):
                    break
            if n - n0 >= max_terms:
                raise ValueError(
                    f"series did not reach tail_tol={tail_tol:g} within "
                    f"{max_terms} terms; points too close to the boundary"
                )
        return complex(total)


@dataclass(frozen=True, eq=False)
class GramResult:
    """Gram matrix of a kernel basis plus conditioning flags.

    near_confluent lists index pairs of basis vectors sitting at distinct
    points within pseudo-hyperbolic distance 1e-8 of each other: their
    Gram is numerically singular and downstream whitening will drop rank.
    """

    matrix: np.ndarray
    near_confluent: tuple[tuple[int, int], ...]


def gram_matrix(basis: KernelBasis) -> GramResult:
    """G[i][j] = kernel_inner(v_i, v_j); Hermitian by construction.

    PSD-ness is not re-checked here (an eigendecomposition per call would
    double the cost of every subspace build); the whitening step performs
    the check and rejects indefinite input.
    """
    vecs = basis.vectors
    n = len(vecs)
    g = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            val = kernel_inner(vecs[i], vecs[j])
            g[i, j] = val
            if j != i:
                g[j, i] = val.conjugate()
    flags = []
    reps: dict[complex, int] = {}
    for idx, vec in enumerate(vecs):
        if vec.point not in reps:
            reps[vec.point] = idx
    points = list(reps)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if pseudo_hyperbolic(points[i], points[j]) < _CONFLUENT_TOL:
                flags.append((reps[points[i]], reps[points[j]]))
    return GramResult(matrix=g, near_confluent=tuple(flags))


def cross_gram(basis_a, basis_b) -> np.ndarray:
    """Rectangular Gram block G[i][j] = kernel_inner(a_i, b_j).

    Accepts KernelBasis instances or plain sequences of KernelVector.
    """
    vecs_a = basis_a.vectors if isinstance(basis_a, KernelBasis) else tuple(basis_a)
    vecs_b = basis_b.vectors if isinstance(basis_b, KernelBasis) else tuple(basis_b)
    out = np.zeros((len(vecs_a), len(vecs_b)), dtype=complex)
    for i, u in enumerate(vecs_a):
        for j, v in enumerate(vecs_b):
            out[i, j] = kernel_inner(u, v)
    return out
