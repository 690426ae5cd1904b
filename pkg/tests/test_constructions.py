import math

import numpy as np
import pytest

from hardygeom import (
    BlaschkeProduct,
    DiscGrid,
    DyadicExampleSpec,
    KernelVector,
    blaschke_product_eval,
    counterexample_build,
    counterexample_grid,
    counterexample_verify,
    defect_sum_sup,
    dyadic_nodes,
    dyadic_report,
    kernel_inner,
    mjn_asymptotic,
    mjn_exact,
    pair_assignment,
    pseudo_hyperbolic,
    rho_from_gaps,
)
from hardygeom.constructions import _midpoint_gap, _outer_gap


def test_dyadic_spec_validation_and_radii():
    with pytest.raises(ValueError):
        DyadicExampleSpec(())
    with pytest.raises(ValueError, match="alpha_1 = 5.0"):
        DyadicExampleSpec((5.0,))
    spec = DyadicExampleSpec(tuple(2.0**-n for n in range(1, 7)))
    assert spec.n_max == 6
    assert spec.total_dim() == 126
    assert spec.radius(1) == 1.0 - 0.5 * 0.5
    assert len(spec.radii) == 6


def test_dyadic_nodes_layout_and_budget():
    spec = DyadicExampleSpec((0.5, 0.25))
    nodes = dyadic_nodes(spec)
    assert [n.dim for n in nodes] == [2, 4]
    eigs = nodes[1].eigenvalues()
    assert len(eigs) == 4
    assert all(abs(abs(e) - spec.radius(2)) < 1e-15 for e in eigs)
    with pytest.raises(ValueError, match="budget"):
        dyadic_nodes(DyadicExampleSpec((0.5,) * 11))


def test_mjn_exact_matches_kernel_sum():
    spec = DyadicExampleSpec((0.5, 0.25, 0.125))
    nodes = dyadic_nodes(spec)
    for n in (1, 2, 3):
        for j in (1, 2, 3):
            base = KernelVector(complex(spec.radius(n)), 0)
            nb = kernel_inner(base, base).real
            total = 0.0
            for p in nodes[j - 1].eigenvalues():
                kv = KernelVector(p, 0)
                ip = kernel_inner(base, kv)
                total += abs(ip) ** 2 / (nb * kernel_inner(kv, kv).real)
            assert mjn_exact(j, n, spec) == pytest.approx(total, rel=1e-12)


def test_mjn_self_interaction_is_gram_row_sum():
    spec = DyadicExampleSpec((0.5, 0.25))
    nodes = dyadic_nodes(spec)
    n = 2
    pts = list(nodes[n - 1].eigenvalues())
    base = KernelVector(pts[0], 0)
    nb = kernel_inner(base, base).real
    row = 0.0
    for p in pts:
        kv = KernelVector(p, 0)
        row += abs(kernel_inner(base, kv)) ** 2 / (nb * kernel_inner(kv, kv).real)
    assert mjn_exact(n, n, spec) == pytest.approx(row, rel=1e-12)


def test_mjn_asymptotic_formula_identity():
    spec = DyadicExampleSpec((0.7, 0.3, 0.11, 0.05))
    for n in range(1, 5):
        for j in range(1, 5):
            an, aj = spec.alphas[n - 1], spec.alphas[j - 1]
            denom = an + aj * 2.0 ** (n - j) - an * aj * 2.0 ** (-j)
            assert mjn_asymptotic(j, n, spec) == pytest.approx(
                an * aj / denom, rel=1e-14
            )
            assert mjn_asymptotic(j, n, spec) > 0


def test_mjn_small_base_radius_limit():
    # alpha_1 -> 2 sends r_1 -> 0: the level-j sum collapses to
    # 2^j (1 - r_j^2) up to O(r_1)
    eps = 1e-7
    spec = DyadicExampleSpec((2.0 - 2 * eps, 0.25, 0.125))
    r1 = spec.radius(1)
    assert r1 == pytest.approx(eps, abs=1e-13)
    for j in (2, 3):
        rj = spec.radius(j)
        expect = 2.0**j * (1 - rj * rj)
        assert mjn_exact(j, 1, spec) == pytest.approx(expect, rel=1e-5)


def test_mjn_level_range_errors():
    spec = DyadicExampleSpec((0.5, 0.25))
    with pytest.raises(ValueError):
        mjn_exact(0, 1, spec)
    with pytest.raises(ValueError):
        mjn_exact(1, 3, spec)
    with pytest.raises(ValueError):
        mjn_asymptotic(3, 1, spec)


def test_level_product_is_power_composed_factor():
    # the 2^j equally spaced zeros on one circle multiply to a single
    # factor in z^(2^j); compare log-moduli
    r, j = 0.9, 2
    count = 2**j
    zeros = tuple(r * np.exp(2j * np.pi * k / count) for k in range(count))
    prod = BlaschkeProduct(zeros, (1,) * count)
    z = 0.5 + 0.1j
    lhs = blaschke_product_eval(prod, z)[0]
    rhs = blaschke_product_eval(
        BlaschkeProduct((r**count,), (1,)), z**count
    )[0]
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_dyadic_report_single_level():
    rep = dyadic_report(DyadicExampleSpec((0.5,)), grid=DiscGrid.dyadic(k=4))
    assert rep.loo_products == (1.0,)
    assert rep.alpha_sum == 0.5
    assert rep.summable_proxy


def test_dyadic_report_three_levels():
    spec = DyadicExampleSpec((0.5, 0.25, 0.125))
    rep = dyadic_report(spec, grid=DiscGrid.dyadic(k=6))
    assert rep.summable_proxy
    assert len(rep.level_riesz) == 3
    assert max(rep.level_riesz) < 1.5  # near-orthogonal roots stay tame
    assert all(0.0 < p < 1.0 for p in rep.loo_products)
    np.testing.assert_allclose(
        rep.coherence_rows,
        [[mjn_exact(j, n, spec) for j in (1, 2, 3)] for n in (1, 2, 3)],
        rtol=1e-13,
    )
    assert rep.coherence_row_sums == tuple(rep.coherence_rows.sum(axis=1))
    assert rep.dashboard.riesz.riesz_at_tol


def test_dyadic_report_growing_alphas_not_summable_proxy():
    rep = dyadic_report(
        DyadicExampleSpec((0.5, 1.0, 2.0)), grid=DiscGrid.dyadic(k=4)
    )
    assert not rep.summable_proxy


def test_pair_assignment_lexicographic():
    pa = pair_assignment(4)
    assert pa.pairs == ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
    assert pa.count == 6
    assert pa.shared_power(2, 4) == 4
    with pytest.raises(ValueError):
        pa.shared_power(3, 3)
    with pytest.raises(ValueError):
        pair_assignment(1)


@pytest.mark.parametrize("m", [2, 3, 5, 8, 13, 30])
def test_pair_assignment_handshake(m):
    pa = pair_assignment(m)
    assert pa.count == m * (m - 1) // 2
    alloc = pa.allocation()
    assert len(alloc) == m
    assert all(len(entries) == m - 1 for entries in alloc)
    seen = {}
    for idx, entries in enumerate(alloc, start=1):
        for inner, power in entries:
            seen.setdefault(power, []).append((idx, inner))
    for power, owners in seen.items():
        assert len(owners) == 2
        (i, fi), (j, fj) = sorted(owners)
        assert {fi, fj} == {True, False} and fi  # inner point on the lower index
        assert pa.pairs[power] == (i, j)


def test_rho_from_gaps_matches_metric():
    rng = np.random.default_rng(101)
    for _ in range(50):
        g_r = float(rng.uniform(1e-4, 0.9))
        g_s = float(rng.uniform(0.2, 1.0)) * g_r
        rho = rho_from_gaps(g_r, g_s)
        direct = pseudo_hyperbolic(1.0 - g_r, 1.0 - g_s)
        assert rho == pytest.approx(direct, rel=1e-11)
    with pytest.raises(ValueError):
        rho_from_gaps(0.1, 0.2)
    with pytest.raises(ValueError):
        rho_from_gaps(1.0, 0.5)


def test_outer_gap_solves_rho_exactly():
    rng = np.random.default_rng(103)
    for _ in range(100):
        g_r = 10.0 ** rng.uniform(-11, -0.2)
        q = float(rng.uniform(0.05, 0.95))
        g_s = _outer_gap(g_r, q)
        assert abs(rho_from_gaps(g_r, g_s) - q) <= 5e-16


def test_midpoint_gap_equidistant():
    rng = np.random.default_rng(107)
    for _ in range(50):
        g_a = 10.0 ** rng.uniform(-8, -0.5)
        g_b = g_a * float(rng.uniform(0.1, 1.0))
        g_m = _midpoint_gap(g_a, g_b)
        assert g_b <= g_m <= g_a
        d1 = rho_from_gaps(g_a, g_m)
        d2 = rho_from_gaps(g_m, g_b)
        assert d1 == pytest.approx(d2, rel=1e-10)


def test_counterexample_build_single_level(counterexample_small):
    inst = counterexample_small
    spec = inst.spec
    assert spec.block_counts == (4,) and spec.n_max == 1
    assert len(inst.nodes) == 4
    assert all(node.dim == 3 for node in inst.nodes)
    assert spec.close_pair_rho(1) == pytest.approx(0.5, abs=1e-12)
    assert len(inst.search_log) == 1
    entry = inst.search_log[0]
    assert {"level", "gap_r", "gap_s", "matrix_riesz"} <= set(entry)


def test_counterexample_build_validation():
    with pytest.raises(ValueError):
        counterexample_build([5, 4])  # counts must not decrease
    with pytest.raises(ValueError):
        counterexample_build([1])
    with pytest.raises(ValueError, match="budget"):
        counterexample_build([46])
    with pytest.raises(ValueError):
        counterexample_build([4], bessel_target=0.0)
    with pytest.raises(ValueError):
        counterexample_build([4], riesz_cap=1.0)


def test_counterexample_radius_guard():
    with pytest.raises(ValueError, match="guard at level 5"):
        counterexample_build([4, 5, 6, 7, 8])


def test_counterexample_gap_cascade(counterexample_deep):
    inst = counterexample_deep
    spec = inst.spec
    assert spec.n_max == 4
    gaps = [g for g, _ in spec.radius_gaps]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[3] > 1e-12  # clear of the representability guard
    for n in range(1, 5):
        q = 1.0 / (n + 1)
        assert abs(spec.close_pair_rho(n) - q) <= 1e-12
    assert len(inst.protected_gaps) == 3
    assert all(g > 0 for g in inst.protected_gaps)


def test_counterexample_grid_contains_eigenvalues(counterexample_deep):
    inst = counterexample_deep
    grid = counterexample_grid(inst)
    pts = set(map(complex, grid.points()))
    for z in inst.all_points():
        assert complex(z) in pts
    fine = set(map(complex, grid.refined().points()))
    assert pts <= fine


def test_defect_sum_sup_basics():
    grid = DiscGrid.dyadic(k=4)
    sup, arg = defect_sum_sup([0.0], grid)
    assert sup == 1.0 and arg == 0.0
    with pytest.raises(ValueError):
        defect_sum_sup([], grid)
    with pytest.raises(ValueError):
        defect_sum_sup([1.0], grid)


def test_verify_single_level(counterexample_small):
    rep = counterexample_verify(counterexample_small, colorings=50)
    assert rep.all_ok
    lv = rep.levels[0]
    assert lv.close_pairs == 6
    assert lv.pair_sin_bound <= 0.5 + 1e-9
    assert lv.rho_residual <= 1e-12
    assert lv.gram_checked and lv.gram_sin_max <= 0.5 + 1e-9
    assert lv.pigeonhole_tested and lv.pigeonhole_failures == 0
    assert rep.lemma_bound_ok
    assert rep.model_bessel <= rep.riesz_c * rep.line_bessel + 1e-9
    assert rep.coloring_classes == 3


def test_verify_deep_instance_gram_trust_window(deep_verify_report):
    rep = deep_verify_report
    assert rep.all_ok
    checked = [lv.gram_checked for lv in rep.levels]
    assert checked == [True, True, True, False]
    for lv in rep.levels:
        assert lv.pair_sin_bound <= lv.sin_threshold + 1e-9
        if lv.gram_checked:
            assert lv.gram_sin_max <= lv.sin_threshold + 1e-9
    assert rep.defect_sup_refined == pytest.approx(rep.defect_sup, rel=5e-2)
