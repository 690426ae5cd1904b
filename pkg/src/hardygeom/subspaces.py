"""Angles, distances, and Bessel/Riesz bounds for finite systems of
model spaces.

All computations happen in coordinates of the kernel bases with the Gram
matrix as the metric; vectors never materialize as functions.  The
stored ``gram`` follows the convention gram[i, j] = <v_i, v_j> (linear
in the first slot).  Internally the code works with the coefficient
metric N = conj(G), for which ||sum c_i v_i||^2 = c* N c, and with the
conjugated whitener; every published quantity (sines, norms, bounds) is
invariant under that conjugation.

Whitened orthonormal bases Q = B V turn geometry into ordinary numerics:
sin angles are canonical correlations (singular values of Q1* Q2),
Bessel bounds are the top eigenvalue of a sum of projector Grams, Riesz
bounds are the spectral edges of the joint orthonormal-block Gram.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .disc import BlaschkeProduct, DiscGrid, blaschke_product_eval
from .kernels import (
    KernelBasis,
    KernelVector,
    _kernel_inner_mp,
    cross_gram,
    gram_matrix,
    kernel_inner,
)
from .linalg import RANK_TOL, Whitener, hermitian_eigen, psd_sqrt_inverse

__all__ = [
    "OVERLAP_TOL",
    "AngleResult",
    "BesselResult",
    "DeltaAngleReport",
    "RieszBounds",
    "Subspace",
    "SubspaceSystem",
    "adjoint_restriction_lower_bound",
    "bessel_bound",
    "bessel_detail",
    "dist_to_subspace",
    "joint_idempotent_norm",
    "line_system",
    "riesz_bounds",
    "delta_angle_envelope",
    "sin_angle",
    "sin_angle_to_span",
    "span_operator_norm",
]

OVERLAP_TOL = 1e-10
_RIESZ_DEFICIENT_TOL = 1e-10

# Double precision loses roughly cond * 1e-16 in projection coefficients;
# past this threshold (or on any rank drop, since distinct kernel specs
# are always independent in exact arithmetic) geometry queries fall back
# to the exact closed-form pairings evaluated under mpmath.
_MP_COND_ESCALATE = 1e7
_MP_DPS_CAP = 80
_TINY_SIN_ESCALATE = 1e-2
_SPAN_NORM_ESCALATE = 1e5


def _gram_condition(wh: Whitener) -> float:
    sp = wh.spectrum
    lo = float(sp[0])
    if lo <= 0.0:
        return math.inf
    return float(sp[-1]) / lo


def _mp_workdps(cond: float, floor: int = 30) -> int:
    if not math.isfinite(cond):
        return _MP_DPS_CAP
    return min(_MP_DPS_CAP, max(floor, 30 + int(math.log10(max(cond, 1.0)))))


def _normalized_whitener(g: np.ndarray, rank_tol: float) -> Whitener:
    # Rescale to unit diagonal before the rank decision: Gram diagonals of
    # derivative kernels near the boundary span many orders of magnitude,
    # and thresholding raw eigenvalues at rank_tol*lambda_max would drop
    # directions that are perfectly well conditioned after scaling.
    d = np.sqrt(np.real(np.diag(g)))
    if np.any(d <= 0.0):
        raise ValueError("Gram matrix has a non-positive diagonal entry")
    gn = g / np.outer(d, d)
    wn = psd_sqrt_inverse(gn, rank_tol)
    return Whitener(
        matrix=wn.matrix / d[:, None],
        kept=wn.kept,
        dropped=wn.dropped,
        spectrum=wn.spectrum,
    )


@dataclass(frozen=True, eq=False)
class Subspace:
    """A model space held as a kernel basis with cached Gram data.

    Immutable after construction; the whitener satisfies
    whitener* @ gram @ whitener = I on the numerical range.
    """

    basis: KernelBasis
    gram: np.ndarray
    whitener: Whitener
    near_confluent: tuple[tuple[int, int], ...]

    @classmethod
    def from_basis(cls, basis: KernelBasis, rank_tol: float = RANK_TOL) -> "Subspace":
        res = gram_matrix(basis)
        wh = _normalized_whitener(res.matrix, rank_tol)
        return cls(
            basis=basis,
            gram=res.matrix,
            whitener=wh,
            near_confluent=res.near_confluent,
        )

    @classmethod
    def from_blaschke(
        cls, product: BlaschkeProduct, rank_tol: float = RANK_TOL
    ) -> "Subspace":
        """Model space of a finite Blaschke product."""
        return cls.from_basis(KernelBasis.for_blaschke(product), rank_tol)

    @property
    def dim(self) -> int:
        """Numerical rank after whitening (= basis size unless confluent)."""
        return self.whitener.kept

    def metric_whitener(self) -> np.ndarray:
        # whitener for N = conj(gram); see module docstring
        return self.whitener.matrix.conj()


@dataclass(frozen=True)
class AngleResult:
    """sin of the least angle plus the raw top canonical correlation."""

    sin: float
    sigma_max: float
    overlap: bool


def _whitened_corr(
    va: np.ndarray, vb: np.ndarray, cross_g: np.ndarray
) -> np.ndarray:
    # Q_a* Q_b for metric whiteners va, vb; cross_g pairs first-slot-linear,
    # the conj flips it to the metric orientation
    return va.conj().T @ cross_g.conj() @ vb


def _corr_to_angle(c: np.ndarray) -> AngleResult:
    if c.size == 0:
        raise ValueError("angle undefined for a trivial subspace")
    sigma = float(np.linalg.svd(c, compute_uv=False)[0])
    sigma = min(max(sigma, 0.0), 1.0)
    if sigma >= 1.0 - OVERLAP_TOL:
        return AngleResult(sin=0.0, sigma_max=sigma, overlap=True)
    return AngleResult(sin=math.sqrt(1.0 - sigma * sigma), sigma_max=sigma, overlap=False)


def _mp_metric_block(rows, cols, row_norms, col_norms) -> mpmath.matrix:
    # N[i, j] = conj(<rows_i, cols_j>) rescaled to unit diagonal scale
    out = mpmath.matrix(len(rows), len(cols))
    for i, u in enumerate(rows):
        for j, v in enumerate(cols):
            out[i, j] = _kernel_inner_mp(v.point, v.order, u.point, u.order) / (
                row_norms[i] * col_norms[j]
            )
    return out


def _mp_vector_norms(vecs):
    return [
        mpmath.sqrt(_kernel_inner_mp(b.point, b.order, b.point, b.order).real)
        for b in vecs
    ]


def _mp_sigma_sin(b1: KernelBasis, b2: KernelBasis, cond: float, floor: int = 30):
    """(sigma_max, sin) of the whitened correlation in extended precision.

    Cholesky-whitens the diagonal-rescaled metric Grams of both bases and
    reads canonical correlations off the cross block; the subtraction
    1 - sigma^2 happens before rounding back to float, so tiny angles
    survive even when sigma_max is within float64 rounding of 1.
    """
    v1, v2 = b1.vectors, b2.vectors
    with mpmath.workdps(_mp_workdps(cond, floor)):
        d1, d2 = _mp_vector_norms(v1), _mp_vector_norms(v2)
        l1 = mpmath.cholesky(_mp_metric_block(v1, v1, d1, d1))
        l2 = mpmath.cholesky(_mp_metric_block(v2, v2, d2, d2))
        c = (l1**-1) * _mp_metric_block(v1, v2, d1, d2) * (l2**-1).transpose_conj()
        sigma = mpmath.svd_c(c, compute_uv=False)[0]
        if sigma > 1:
            sigma = mpmath.mpf(1)
        val = (1 - sigma) * (1 + sigma)
        return float(sigma), float(mpmath.sqrt(val if val > 0 else 0))


def sin_angle(k1: Subspace, k2: Subspace) -> AngleResult:
    """Least sine of the angle between two model spaces.

    sqrt(1 - sigma_max^2) for the top canonical correlation sigma_max of
    the whitened bases.  sigma_max >= 1 - 1e-10 is declared overlap and
    returns sin 0 with the flag set.  Ill-conditioned Grams escalate to
    the extended-precision path so the overlap decision reflects the
    actual angle rather than whitening noise.
    """
    if k1.dim == 0 or k2.dim == 0:
        raise ValueError("sin_angle requires nontrivial subspaces")
    cond = max(_gram_condition(k1.whitener), _gram_condition(k2.whitener))
    escalate = (
        k1.whitener.dropped or k2.whitener.dropped or cond > _MP_COND_ESCALATE
    )
    if not escalate:
        res = _corr_to_angle(
            _whitened_corr(
                k1.metric_whitener(),
                k2.metric_whitener(),
                cross_gram(k1.basis, k2.basis),
            )
        )
        # downstream bounds divide by sin, so near-overlap results need
        # more accuracy than the float64 whitener delivers
        if res.sin >= _TINY_SIN_ESCALATE:
            return res
    sigma, sin = _mp_sigma_sin(k1.basis, k2.basis, cond, floor=40)
    if sigma >= 1.0 - OVERLAP_TOL:
        return AngleResult(sin=0.0, sigma_max=sigma, overlap=True)
    return AngleResult(sin=sin, sigma_max=sigma, overlap=False)


def _dist_mp(v: KernelVector, basis: KernelBasis, cond: float) -> float:
    # Normal equations on the diagonal-rescaled Gram, assembled from the
    # exact pairings at a precision sized to the observed conditioning.
    vecs = basis.vectors
    n = len(vecs)
    with mpmath.workdps(_mp_workdps(cond)):
        norms = [
            mpmath.sqrt(_kernel_inner_mp(b.point, b.order, b.point, b.order).real)
            for b in vecs
        ]
        nv = mpmath.sqrt(_kernel_inner_mp(v.point, v.order, v.point, v.order).real)
        a = mpmath.matrix(n, n)
        for i, bi in enumerate(vecs):
            for j, bj in enumerate(vecs):
                a[i, j] = _kernel_inner_mp(bj.point, bj.order, bi.point, bi.order) / (
                    norms[i] * norms[j]
                )
        m = mpmath.matrix(n, 1)
        for i, bi in enumerate(vecs):
            m[i] = _kernel_inner_mp(v.point, v.order, bi.point, bi.order) / (
                norms[i] * nv
            )
        coeff = mpmath.lu_solve(a, m)
        q = mpmath.mpf(0)
        for i in range(n):
            q += (coeff[i].conjugate() * m[i]).real
        val = 1 - q
        if val < 0:
            val = mpmath.mpf(0)
        if val > 1:
            val = mpmath.mpf(1)
        return float(mpmath.sqrt(val))


def dist_to_subspace(v: KernelVector, h: Subspace) -> float:
    """Distance from the normalized kernel vector v/||v|| to the subspace.

    Computed purely from Gram data: ||v - P v||^2 = 1 - ||Q* v||^2 after
    normalization.  Near-confluent bases whose Gram conditioning exceeds
    what float64 resolves are recomputed from the closed-form pairings in
    extended precision.
    """
    cond = _gram_condition(h.whitener)
    if h.whitener.dropped or cond > _MP_COND_ESCALATE:
        return _dist_mp(v, h.basis, cond)
    g = np.array([kernel_inner(v, b) for b in h.basis.vectors])
    nv2 = kernel_inner(v, v).real
    # (Q* v)_i in coefficient coordinates; the metric whitener conjugates
    # back to a plain transpose against the first-slot-linear pairing g
    p = h.whitener.matrix.T @ g
    val = 1.0 - float(np.real(np.vdot(p, p))) / nv2
    return math.sqrt(min(max(val, 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class SubspaceSystem:
    """Finite family of model spaces with cached joint Gram data.

    The joint column list concatenates member bases without cross-member
    uniqueness requirements (members may legitimately share kernel
    vectors; the joint whitener then simply drops rank).  Whiteners are
    computed eagerly so instances are safe to query concurrently.
    """

    members: tuple[Subspace, ...]
    joint_vectors: tuple[KernelVector, ...]
    joint_gram: np.ndarray
    joint_whitener: Whitener
    slices: tuple[slice, ...]

    @classmethod
    def build(cls, members, rank_tol: float = RANK_TOL) -> "SubspaceSystem":
        members = tuple(members)
        if not members:
            raise ValueError("system must have at least one member")
        vecs: list[KernelVector] = []
        slices = []
        for m in members:
            start = len(vecs)
            vecs.extend(m.basis.vectors)
            slices.append(slice(start, len(vecs)))
        n = len(vecs)
        g = np.zeros((n, n), dtype=complex)
        for a, ma in enumerate(members):
            g[slices[a], slices[a]] = ma.gram
            for b in range(a + 1, len(members)):
                blk = cross_gram(ma.basis, members[b].basis)
                g[slices[a], slices[b]] = blk
                g[slices[b], slices[a]] = blk.conj().T
        return cls(
            members=members,
            joint_vectors=tuple(vecs),
            joint_gram=g,
            joint_whitener=_normalized_whitener(g, rank_tol),
            slices=tuple(slices),
        )

    @property
    def total_dim(self) -> int:
        return len(self.joint_vectors)

    def joint_metric_whitener(self) -> np.ndarray:
        return self.joint_whitener.matrix.conj()


def line_system(points, rank_tol: float = RANK_TOL) -> SubspaceSystem:
    """System of one-dimensional kernel spans, one line per disc point."""
    return SubspaceSystem.build(
        [Subspace.from_basis(KernelBasis((KernelVector(p, 0),))) for p in points],
        rank_tol,
    )


@dataclass(frozen=True, eq=False)
class BesselResult:
    """Bessel bound with the data needed to audit it.

    projection_sum is sum_n Q_J* P_n Q_J in the joint orthonormal frame;
    top_vector attains the bound; member_corrs holds the Q_J* Q_n blocks,
    so sum_n ||member_corrs[n]* y||^2 is the projection sum at a joint
    unit vector y.
    """

    bound: float
    projection_sum: np.ndarray
    top_vector: np.ndarray
    member_corrs: tuple[np.ndarray, ...]


def bessel_detail(system: SubspaceSystem) -> BesselResult:
    vj = system.joint_metric_whitener()
    nj = system.joint_gram.conj()
    rank = system.joint_whitener.kept
    s = np.zeros((rank, rank), dtype=complex)
    corrs = []
    for member, sl in zip(system.members, system.slices):
        c = vj.conj().T @ nj[:, sl] @ member.metric_whitener()
        corrs.append(c)
        s += c @ c.conj().T
    s = (s + s.conj().T) / 2.0
    eig = hermitian_eigen(s)
    lam = max(float(eig.eigenvalues[-1]), 0.0)
    return BesselResult(
        bound=math.sqrt(lam),
        projection_sum=s,
        top_vector=eig.eigenvectors[:, -1],
        member_corrs=tuple(corrs),
    )


def bessel_bound(system: SubspaceSystem) -> float:
    """M = sqrt(lambda_max(sum_n P_n)) over the joint span.

    M^2 equals sup over unit x in the joint span of sum_n ||P_n x||^2.
    """
    return bessel_detail(system).bound


@dataclass(frozen=True)
class RieszBounds:
    """Spectral edges of the whitened joint Gram and the system constant.

    C = max(sqrt(upper), 1/sqrt(lower)) gives the two-sided norm
    equivalence constant for unit-vector selections.  riesz_at_tol is
    False when the joint Gram is rank-deficient at tolerance: the family
    is not a Riesz system and C is reported as inf.
    """

    lower: float
    upper: float
    constant: float
    riesz_at_tol: bool


def riesz_bounds(system: SubspaceSystem) -> RieszBounds:
    ranks = [m.whitener.kept for m in system.members]
    offsets = np.cumsum([0] + ranks)
    total = int(offsets[-1])
    nj = system.joint_gram.conj()
    j = np.zeros((total, total), dtype=complex)
    whiteners = [m.metric_whitener() for m in system.members]
    for a in range(len(system.members)):
        ba = slice(offsets[a], offsets[a + 1])
        for b in range(a, len(system.members)):
            bb = slice(offsets[b], offsets[b + 1])
            blk = whiteners[a].conj().T @ nj[system.slices[a], system.slices[b]] @ whiteners[b]
            j[ba, bb] = blk
            if b != a:
                j[bb, ba] = blk.conj().T
    j = (j + j.conj().T) / 2.0
    w = hermitian_eigen(j).eigenvalues
    lower = max(float(w[0]), 0.0)
    upper = float(w[-1])
    deficient = float(w[0]) <= _RIESZ_DEFICIENT_TOL * max(1.0, upper)
    if deficient:
        return RieszBounds(lower=lower, upper=upper, constant=math.inf, riesz_at_tol=False)
    return RieszBounds(
        lower=lower,
        upper=upper,
        constant=max(math.sqrt(upper), 1.0 / math.sqrt(lower)),
        riesz_at_tol=True,
    )


def sin_angle_to_span(member: Subspace, others, rank_tol: float = RANK_TOL) -> AngleResult:
    """sin of the angle between one subspace and the span of a family."""
    rest = SubspaceSystem.build(others, rank_tol)
    cg = cross_gram(member.basis, rest.joint_vectors)
    c = _whitened_corr(member.metric_whitener(), rest.joint_metric_whitener(), cg)
    return _corr_to_angle(c)


def adjoint_restriction_lower_bound(
    b1: BlaschkeProduct, h2: Subspace, rank_tol: float = RANK_TOL
) -> float:
    """inf over unit x in h2 of ||x - P x|| against the model space of b1.

    This is the norm lower bound of the adjoint of multiplication by b1
    restricted to h2, and must equal sin_angle(H_{b1}, h2).  Computed
    through the eigenvalue route (lambda_min of I - C*C) rather than the
    singular-value route, deliberately a distinct numerical path.
    """
    h1 = Subspace.from_blaschke(b1, rank_tol)
    c = _whitened_corr(
        h1.metric_whitener(), h2.metric_whitener(), cross_gram(h1.basis, h2.basis)
    )
    a = np.eye(c.shape[1], dtype=complex) - c.conj().T @ c
    a = (a + a.conj().T) / 2.0
    lam = float(hermitian_eigen(a).eigenvalues[0])
    return math.sqrt(max(lam, 0.0))


def _mp_span_norm(vectors, op: np.ndarray, cond: float) -> float:
    # With metric N = L L* and rescaling D, the norm of T on the span is
    # sigma_max(L* T_hat L^{-*}) for T_hat = D T D^{-1}; float64 entries
    # of op embed exactly into mpmath.
    n = len(vectors)
    with mpmath.workdps(_mp_workdps(cond, floor=40)):
        d = _mp_vector_norms(vectors)
        low = mpmath.cholesky(_mp_metric_block(vectors, vectors, d, d))
        that = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                that[i, j] = mpmath.mpc(op[i, j]) * d[i] / d[j]
        lh = low.transpose_conj()
        return float(mpmath.svd_c(lh * that * lh**-1, compute_uv=False)[0])


def span_operator_norm(system: SubspaceSystem, op: np.ndarray) -> float:
    """Norm of the operator with matrix ``op`` in joint basis coordinates.

    ||T x|| / ||x|| maximized over the joint span, computed through the
    whitened metric.  Requires the joint basis to be linearly independent
    (coordinates, and hence ``op``, would otherwise be ill-defined).
    """
    if system.joint_whitener.dropped:
        raise ValueError(
            "joint basis is rank-deficient: overlapping subspaces make the "
            "operator ill-defined"
        )
    n = system.total_dim
    if op.shape != (n, n):
        raise ValueError(f"operator must be {n}x{n}, got {op.shape}")
    cond = _gram_condition(system.joint_whitener)
    if cond > _SPAN_NORM_ESCALATE:
        # the norm of a skew projection grows like 1/sin while the joint
        # Gram conditioning grows like 1/sin^2; escalate well before the
        # float64 whitener noise reaches the published digits
        return _mp_span_norm(system.joint_vectors, op, cond)
    v = system.joint_metric_whitener()
    m = op @ v
    a = m.conj().T @ system.joint_gram.conj() @ m
    a = (a + a.conj().T) / 2.0
    lam = float(hermitian_eigen(a).eigenvalues[-1])
    return math.sqrt(max(lam, 0.0))


def joint_idempotent_norm(k1: Subspace, k2: Subspace, rank_tol: float = RANK_TOL) -> float:
    """Norm of T with T = Id on k1 and T = 0 on k2, on their joint span.

    The explicit dual witness for sin_angle: ||T|| * sin = 1.  Kept as an
    independent path (block operator + metric norm) for cross-checks; the
    production angle uses whitened canonical correlations.
    """
    system = SubspaceSystem.build([k1, k2], rank_tol)
    n = system.total_dim
    op = np.zeros((n, n), dtype=complex)
    s1 = system.slices[0]
    op[s1, s1] = np.eye(s1.stop - s1.start)
    return span_operator_norm(system, op)


@dataclass(frozen=True, eq=False)
class DeltaAngleReport:
    """Leave-none-out delta vs angle for a pair of inner functions.

    delta = min over the grid of max(|Theta_1|, |Theta_2|); sin is the
    subspace angle; c_high and c_low are the empirical constants in
    sin <= c_high * delta and delta^3 <= c_low * sin (1.0 when the bound
    holds with constant one).
    """

    delta: float
    sin: float
    c_low: float
    c_high: float
    overlap: bool
    grid: DiscGrid


def delta_angle_envelope(
    theta1: BlaschkeProduct,
    theta2: BlaschkeProduct,
    grid: DiscGrid,
    rank_tol: float = RANK_TOL,
) -> DeltaAngleReport:
    """Grid delta and model-space angle for a pair of Blaschke products.

    Raises if the angle vanishes while the grid delta is positive: the
    spaces overlap but the grid missed the common zero, so the estimate
    cannot be certified at this resolution.
    """
    pts = grid.points()
    m1 = np.exp(blaschke_product_eval(theta1, pts)[0])
    m2 = np.exp(blaschke_product_eval(theta2, pts)[0])
    delta = float(np.maximum(m1, m2).min())
    angle = sin_angle(
        Subspace.from_blaschke(theta1, rank_tol),
        Subspace.from_blaschke(theta2, rank_tol),
    )
    s = angle.sin
    if delta > 0.0 and s <= 0.0:
        raise ArithmeticError(
            "subspace angle is 0 while the grid delta is positive: the grid "
            "missed a common zero; refine the grid"
        )
    c_high = s / delta if s > delta else 1.0
    c_low = delta**3 / s if s < delta**3 else 1.0
    return DeltaAngleReport(
        delta=delta, sin=s, c_low=c_low, c_high=c_high, overlap=angle.overlap, grid=grid
    )
