import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_blaschke, random_subspace
from hardygeom import (
    BlaschkeProduct,
    DiscGrid,
    KernelBasis,
    KernelVector,
    Subspace,
    SubspaceSystem,
    adjoint_restriction_lower_bound,
    bessel_bound,
    bessel_detail,
    delta_angle_envelope,
    dist_to_subspace,
    joint_idempotent_norm,
    line_system,
    pseudo_hyperbolic,
    riesz_bounds,
    sin_angle,
    sin_angle_to_span,
    span_operator_norm,
)


def test_subspace_dim_and_whitener():
    s = Subspace.from_blaschke(BlaschkeProduct((0.2, -0.5j), (2, 1)))
    assert s.dim == 3
    w = s.whitener.matrix
    np.testing.assert_allclose(
        w.conj().T @ s.gram @ w, np.eye(3), atol=1e-9
    )


def test_confluent_basis_drops_rank():
    basis = KernelBasis.from_pairs([(0.2, 0), (0.2 + 1e-13, 0)])
    s = Subspace.from_basis(basis)
    assert s.dim == 1
    assert s.whitener.dropped == 1


def test_sin_angle_two_lines_frozen():
    s0 = Subspace.from_blaschke(BlaschkeProduct((0.0,), (1,)))
    s5 = Subspace.from_blaschke(BlaschkeProduct((0.5,), (1,)))
    res = sin_angle(s0, s5)
    assert res.sin == pytest.approx(0.5, abs=1e-12)
    assert not res.overlap
    # scalar case: angle equals the pseudo-hyperbolic distance
    assert res.sin == pytest.approx(pseudo_hyperbolic(0.0, 0.5), abs=1e-12)


def test_sin_angle_overlap_flag():
    a = Subspace.from_basis(KernelBasis.from_pairs([(0.3, 0), (0.3, 1)]))
    b = Subspace.from_basis(KernelBasis.from_pairs([(0.3, 0)]))
    res = sin_angle(a, b)
    assert res.overlap and res.sin == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_sin_angle_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    a, b = random_subspace(rng, 3), random_subspace(rng, 3)
    r1, r2 = sin_angle(a, b), sin_angle(b, a)
    assert abs(r1.sin - r2.sin) <= 1e-10
    assert 0.0 <= r1.sin <= 1.0


@settings(max_examples=40, deadline=None)
@given(
    st.complex_numbers(max_magnitude=0.85, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=0.85, allow_nan=False, allow_infinity=False),
)
def test_line_angle_is_pseudo_hyperbolic(z, w):
    if pseudo_hyperbolic(z, w) < 1e-4:
        return
    a = Subspace.from_basis(KernelBasis.from_pairs([(z, 0)]))
    b = Subspace.from_basis(KernelBasis.from_pairs([(w, 0)]))
    assert sin_angle(a, b).sin == pytest.approx(pseudo_hyperbolic(z, w), abs=1e-10)


def test_dist_to_subspace_is_product_modulus():
    b = BlaschkeProduct((0.0,), (1,))
    h = Subspace.from_blaschke(b)
    assert dist_to_subspace(KernelVector(0.5, 0), h) == pytest.approx(0.5, abs=1e-12)
    rng = np.random.default_rng(31)
    prod = random_blaschke(rng, max_degree=5)
    h = Subspace.from_blaschke(prod)
    from hardygeom import blaschke_product_eval

    for _ in range(20):
        z = complex(*rng.uniform(-0.65, 0.65, 2))
        d = dist_to_subspace(KernelVector(z, 0), h)
        expect = math.exp(blaschke_product_eval(prod, z)[0])
        assert d == pytest.approx(expect, abs=1e-10)


def test_dist_inside_own_span_is_zero():
    h = Subspace.from_basis(KernelBasis.from_pairs([(0.3, 0), (0.3, 1)]))
    assert dist_to_subspace(KernelVector(0.3, 0), h) <= 1e-8
    assert dist_to_subspace(KernelVector(0.3, 1), h) <= 1e-8


def test_system_shared_vector_drops_joint_rank():
    a = Subspace.from_basis(KernelBasis.from_pairs([(0.2, 0)]))
    b = Subspace.from_basis(KernelBasis.from_pairs([(0.2, 0), (0.5, 0)]))
    sys = SubspaceSystem.build([a, b])
    assert sys.total_dim == 3
    assert sys.joint_whitener.dropped == 1


def test_bessel_two_lines_frozen():
    sys = line_system([0.0, 0.5])
    got = bessel_bound(sys)
    # lambda_max of two rank-one projections is 1 + |<e1, e2>|
    corr = math.sqrt(0.75)
    assert got == pytest.approx(math.sqrt(1 + corr), abs=1e-12)


def test_bessel_detail_consistency():
    rng = np.random.default_rng(41)
    members = [random_subspace(rng, 3) for _ in range(4)]
    sys = SubspaceSystem.build(members)
    det = bessel_detail(sys)
    s = sum(c @ c.conj().T for c in det.member_corrs)
    np.testing.assert_allclose(det.projection_sum, (s + s.conj().T) / 2, atol=1e-12)
    y = det.top_vector
    attained = sum(np.linalg.norm(c.conj().T @ y) ** 2 for c in det.member_corrs)
    assert attained == pytest.approx(det.bound**2, abs=1e-10)
    # no unit vector on the joint span beats the top eigenvector
    for _ in range(50):
        v = rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y))
        v /= np.linalg.norm(v)
        val = sum(np.linalg.norm(c.conj().T @ v) ** 2 for c in det.member_corrs)
        assert val <= det.bound**2 + 1e-10


def test_bessel_single_member_is_one():
    sys = SubspaceSystem.build([Subspace.from_blaschke(BlaschkeProduct((0.3,), (2,)))])
    assert bessel_bound(sys) == pytest.approx(1.0, abs=1e-12)


def test_riesz_two_lines_frozen():
    # <s_0^, s_0.8^> = sqrt(1-0.64) = 0.6 exactly
    sys = line_system([0.0, 0.8])
    rb = riesz_bounds(sys)
    assert rb.lower == pytest.approx(0.4, abs=1e-12)
    assert rb.upper == pytest.approx(1.6, abs=1e-12)
    assert rb.constant == pytest.approx(math.sqrt(2.5), abs=1e-12)
    assert rb.riesz_at_tol


def test_riesz_degenerate_family():
    sys = line_system([0.3, 0.3 + 1e-13])
    rb = riesz_bounds(sys)
    assert not rb.riesz_at_tol
    assert rb.constant == math.inf


def test_bessel_squared_equals_riesz_upper():
    rng = np.random.default_rng(43)
    members = [random_subspace(rng, 3) for _ in range(3)]
    sys = SubspaceSystem.build(members)
    rb = riesz_bounds(sys)
    # synthesis Gram and frame operator share their nonzero spectrum
    assert bessel_bound(sys) ** 2 == pytest.approx(rb.upper, abs=1e-10)


def test_span_operator_norm_identity_and_errors():
    sys = line_system([0.0, 0.5])
    assert span_operator_norm(sys, np.eye(2, dtype=complex)) == pytest.approx(1.0, abs=1e-12)
    assert span_operator_norm(sys, 3.0 * np.eye(2, dtype=complex)) == pytest.approx(3.0, abs=1e-12)
    with pytest.raises(ValueError):
        span_operator_norm(sys, np.eye(3, dtype=complex))
    degenerate = line_system([0.3, 0.3 + 1e-13])
    with pytest.raises(ValueError, match="rank-deficient"):
        span_operator_norm(degenerate, np.eye(2, dtype=complex))


def test_idempotent_duality():
    rng = np.random.default_rng(47)
    for _ in range(10):
        a, b = random_subspace(rng, 3), random_subspace(rng, 3)
        s = sin_angle(a, b).sin
        if s < 1e-3:
            continue
        assert joint_idempotent_norm(a, b) * s == pytest.approx(1.0, abs=1e-8)


def test_adjoint_restriction_matches_sin():
    rng = np.random.default_rng(53)
    for _ in range(10):
        b1 = random_blaschke(rng, max_degree=3)
        h1 = Subspace.from_blaschke(b1)
        h2 = random_subspace(rng, 3)
        expect = sin_angle(h1, h2).sin
        assert adjoint_restriction_lower_bound(b1, h2) == pytest.approx(expect, abs=1e-9)


def test_sin_to_span_reduces_to_pair():
    rng = np.random.default_rng(59)
    a, b = random_subspace(rng, 2), random_subspace(rng, 2)
    lhs = sin_angle_to_span(a, [b]).sin
    assert lhs == pytest.approx(sin_angle(a, b).sin, abs=1e-10)


def test_sin_to_span_member_inside():
    a = Subspace.from_basis(KernelBasis.from_pairs([(0.2, 0)]))
    b = Subspace.from_basis(KernelBasis.from_pairs([(0.2, 0), (0.2, 1)]))
    res = sin_angle_to_span(a, [b])
    assert res.overlap and res.sin == 0.0


def test_delta_angle_envelope_line_pair():
    rep = delta_angle_envelope(
        BlaschkeProduct((0.0,), (1,)),
        BlaschkeProduct((0.9,), (1,)),
        DiscGrid.dyadic(),
    )
    assert rep.sin == pytest.approx(0.9, abs=1e-12)
    assert 0.0 < rep.delta <= 0.9
    assert rep.sin <= rep.c_high * rep.delta + 1e-12
    assert rep.delta**3 <= rep.c_low * rep.sin + 1e-12


def test_delta_angle_envelope_missed_zero_raises():
    # identical products with an off-grid common zero: angle 0, delta > 0
    b = BlaschkeProduct((0.512345 + 0.1j,), (1,))
    with pytest.raises(ArithmeticError, match="missed a common zero"):
        delta_angle_envelope(b, b, DiscGrid.dyadic(k=3))
