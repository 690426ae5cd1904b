"""Shared generators for the test suite.

Everything is seeded through numpy Generators so tests are reproducible;
helpers are plain functions (imported with `from conftest import ...`)
rather than fixtures so hypothesis strategies can call them too.
"""

import numpy as np
import pytest

from hardygeom import BlaschkeProduct, JordanSpec, KernelBasis, Subspace


def random_disc_points(rng, n, max_abs=0.9, min_sep=0.05):
    """n points in |z| <= max_abs, pairwise at least min_sep apart."""
    pts = []
    while len(pts) < n:
        z = complex(*rng.uniform(-max_abs, max_abs, size=2))
        if abs(z) > max_abs:
            continue
        if all(abs(z - w) >= min_sep for w in pts):
            pts.append(z)
    return pts


def random_blaschke(rng, max_degree=8, max_abs=0.9, max_mult=3, min_sep=0.05):
    """Random finite Blaschke product with well-separated zeros."""
    degree = int(rng.integers(1, max_degree + 1))
    zeros, mults = [], []
    budget = degree
    for z in random_disc_points(rng, degree, max_abs, min_sep):
        if budget == 0:
            break
        m = int(rng.integers(1, min(max_mult, budget) + 1))
        zeros.append(z)
        mults.append(m)
        budget -= m
    return BlaschkeProduct(tuple(zeros), tuple(mults))


def random_subspace(rng, max_dim=4, max_abs=0.85, min_sep=0.08):
    """Model space of a random product with dimension <= max_dim."""
    b = random_blaschke(rng, max_degree=max_dim, max_abs=max_abs,
                        max_mult=min(3, max_dim), min_sep=min_sep)
    return Subspace.from_blaschke(b)


def random_jordan_node(rng, max_eigs=2, max_block=2, max_abs=0.85, min_sep=0.08):
    eigs = random_disc_points(rng, int(rng.integers(1, max_eigs + 1)),
                              max_abs, min_sep)
    blocks = tuple((lam, int(rng.integers(1, max_block + 1))) for lam in eigs)
    return JordanSpec(blocks)


def random_node_family(rng, n_nodes, max_eigs=2, max_block=2, max_abs=0.85,
                       min_sep=0.08):
    """Jordan nodes with globally distinct eigenvalues (no overlaps)."""
    total = []
    nodes = []
    for _ in range(n_nodes):
        k = int(rng.integers(1, max_eigs + 1))
        eigs = []
        while len(eigs) < k:
            z = complex(*rng.uniform(-max_abs, max_abs, size=2))
            if abs(z) > max_abs:
                continue
            if all(abs(z - w) >= min_sep for w in total + eigs):
                eigs.append(z)
        total.extend(eigs)
        nodes.append(JordanSpec(tuple(
            (lam, int(rng.integers(1, max_block + 1))) for lam in eigs)))
    return nodes


def random_unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def chain_basis(point, m):
    return KernelBasis.for_point(point, m)


@pytest.fixture(scope="session")
def counterexample_small():
    """Single-level instance, cheap enough to share across tests."""
    from hardygeom import counterexample_build

    return counterexample_build([4])


@pytest.fixture(scope="session")
def counterexample_deep():
    """The four-level instance; built once, ~0.2 s."""
    from hardygeom import counterexample_build

    return counterexample_build([4, 5, 6, 7])


@pytest.fixture(scope="session")
def deep_verify_report(counterexample_deep):
    """Verification of the four-level instance; the expensive step, run once."""
    from hardygeom import counterexample_verify

    return counterexample_verify(counterexample_deep, seed=0, colorings=200)
