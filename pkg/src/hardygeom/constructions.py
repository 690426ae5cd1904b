"""Generators for the two worked constructions.

Dyadic side: nodes with spectra on circles of radius r_n = 1 - alpha_n 2^-n
at the 2^n-th roots of unity, plus the coherence sums M_j(n) and their
closed-form surrogate, and an interpolating-type dashboard.

Counterexample side: levels of m_n diagonal matrices of size m_n - 1 whose
eigenvalues sit on two pseudo-hyperbolically close circles, paired so every
two matrices in a level share a close eigenvalue pair, while radii grow to 1
fast enough that all kernel lines stay a Bessel system.

Radius bookkeeping is done in the gap g = 1 - r.  Radii at level 4 differ
from 1 by ~1e-10; the gaps carry full precision while 1 - r*s style
subtractions of stored radii would lose ~7 digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .disc import DiscGrid, blaschke_product_eval, roots_of_unity
from .interpolation import InterpolationDashboard, interpolation_dashboard
from .linalg import RANK_TOL
from .nodes import JordanSpec, minimal_blaschke, model_space_basis
from .subspaces import (
    Subspace,
    SubspaceSystem,
    bessel_bound,
    line_system,
    riesz_bounds,
    sin_angle,
)

__all__ = [
    "DyadicExampleSpec",
    "dyadic_nodes",
    "mjn_exact",
    "mjn_asymptotic",
    "DyadicReport",
    "dyadic_report",
    "PairAssignment",
    "pair_assignment",
    "CounterexampleSpec",
    "CounterexampleInstance",
    "counterexample_build",
    "LevelReport",
    "CounterexampleReport",
    "counterexample_verify",
    "counterexample_grid",
    "defect_sum_sup",
    "rho_from_gaps",
]

RADIUS_GUARD = 1e-12          # radii may not exceed 1 - RADIUS_GUARD
_DYADIC_LEVEL_CAP = 10
_PAIR_BUDGET = 2000


# ---------------------------------------------------------------- dyadic


@dataclass(frozen=True)
class DyadicExampleSpec:
    """Levels n = 1..n_max with radius 1 - alpha_n 2^-n."""

    alphas: tuple[float, ...]

    def __init__(self, alphas: Sequence[float]):
        alphas = tuple(float(a) for a in alphas)
        if not alphas:
            raise ValueError("need at least one level")
        for n, a in enumerate(alphas, start=1):
            if not (0.0 < a < 2.0**n):
                raise ValueError(
                    f"alpha_{n} = {a} outside (0, 2^{n}); radius leaves (0,1)"
                )
        object.__setattr__(self, "alphas", alphas)

    @property
    def n_max(self) -> int:
        return len(self.alphas)

    def radius(self, n: int) -> float:
        return 1.0 - self.alphas[n - 1] * 2.0 ** (-n)

    @property
    def radii(self) -> tuple[float, ...]:
        return tuple(self.radius(n) for n in range(1, self.n_max + 1))

    def total_dim(self) -> int:
        return sum(2**n for n in range(1, self.n_max + 1))


def dyadic_nodes(spec: DyadicExampleSpec) -> list[JordanSpec]:
    """Diagonal node per level, eigenvalues r_n * (2^n-th roots of unity)."""
    if spec.n_max > _DYADIC_LEVEL_CAP:
        raise ValueError(
            f"dimension budget exceeded: n_max = {spec.n_max} > "
            f"{_DYADIC_LEVEL_CAP} (total dim {spec.total_dim()})"
        )
    nodes = []
    for n in range(1, spec.n_max + 1):
        r = spec.radius(n)
        count = 2**n
        eigs = r * roots_of_unity(count)
        nodes.append(JordanSpec.diagonal(eigs))
    return nodes


def mjn_exact(j: int, n: int, spec: DyadicExampleSpec) -> float:
    """Coherence of level n's base point against all of level j's points.

    Sum over the full root set (identity included) of
    (1-r_n^2)(1-r_j^2)/|1 - r_n r_j w|^2, w ranging over 2^j-th roots of
    unity; equals the sum of squared normalized-kernel pairings.
    """
    if not (1 <= j <= spec.n_max and 1 <= n <= spec.n_max):
        raise ValueError("levels outside spec")
    rj, rn = spec.radius(j), spec.radius(n)
    count = 2**j
    w = roots_of_unity(count)
    num = (1.0 - rn * rn) * (1.0 - rj * rj)
    den = np.abs(1.0 - rn * rj * w) ** 2
    return float(np.sum(num / den))


def mjn_asymptotic(j: int, n: int, spec: DyadicExampleSpec) -> float:
    """Closed-form surrogate for mjn_exact.

    alpha_n alpha_j / (alpha_n + alpha_j 2^(n-j) - alpha_n alpha_j 2^-j);
    the denominator equals alpha_n r_j + alpha_j 2^(n-j), which is how it
    is evaluated (positive terms only).
    """
    if not (1 <= j <= spec.n_max and 1 <= n <= spec.n_max):
        raise ValueError("levels outside spec")
    an, aj = spec.alphas[n - 1], spec.alphas[j - 1]
    rj = spec.radius(j)
    return an * aj / (an * rj + aj * 2.0 ** (n - j))


@dataclass(frozen=True, eq=False)
class DyadicReport:
    alpha_sum: float
    summable_proxy: bool
    level_riesz: tuple[float, ...]
    loo_products: tuple[float, ...]
    coherence_rows: np.ndarray        # [n-1, j-1] = M_j(n)
    coherence_row_sums: tuple[float, ...]
    dashboard: InterpolationDashboard


def dyadic_report(
    spec: DyadicExampleSpec,
    grid: DiscGrid | None = None,
    rank_tol: float = RANK_TOL,
) -> DyadicReport:
    """Interpolating-sequence diagnostics for the dyadic family.

    Per level: Riesz constant of the normalized kernel lines on that
    level's points (gamma_n) and the leave-one-out product of the other
    levels' Blaschke factors at r_n.  Joint diagnostics come from the
    interpolation dashboard.
    """
    nodes = dyadic_nodes(spec)
    level_riesz = []
    for node in nodes:
        sys_n = line_system(list(node.eigenvalues()), rank_tol=rank_tol)
        level_riesz.append(riesz_bounds(sys_n).constant)
    products = [minimal_blaschke(node) for node in nodes]
    loo = []
    for n in range(1, spec.n_max + 1):
        z = complex(spec.radius(n))
        total = 0.0
        for j, prod in enumerate(products, start=1):
            if j == n:
                continue
            log_mod, _ = blaschke_product_eval(prod, z)
            total += log_mod
        loo.append(math.exp(total) if spec.n_max > 1 else 1.0)
    rows = np.empty((spec.n_max, spec.n_max))
    for n in range(1, spec.n_max + 1):
        for j in range(1, spec.n_max + 1):
            rows[n - 1, j - 1] = mjn_exact(j, n, spec)
    alpha_sum = float(sum(spec.alphas))
    # zero-sequence proxy: tail alphas keep shrinking
    proxy = all(
        spec.alphas[i + 1] <= spec.alphas[i] for i in range(spec.n_max - 1)
    )
    dash = interpolation_dashboard(nodes, grid=grid, rank_tol=rank_tol)
    return DyadicReport(
        alpha_sum=alpha_sum,
        summable_proxy=proxy,
        level_riesz=tuple(level_riesz),
        loo_products=tuple(loo),
        coherence_rows=rows,
        coherence_row_sums=tuple(float(s) for s in rows.sum(axis=1)),
        dashboard=dash,
    )


# ---------------------------------------------------- pair assignment


@dataclass(frozen=True)
class PairAssignment:
    """Bijection between unordered index pairs and root powers.

    pairs[l] = (i, j), 1 <= i < j <= m, listed lexicographically; root
    power l carries the close eigenvalue pair shared by matrices i and j:
    the inner-circle point goes to i, the outer-circle point to j.
    """

    m: int
    pairs: tuple[tuple[int, int], ...]

    def __init__(self, m: int, pairs=None):
        m = int(m)
        if m < 2:
            raise ValueError("need at least two matrices per level")
        expect = tuple(
            (i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1)
        )
        if pairs is not None and tuple(pairs) != expect:
            raise ValueError("pairs must be the lexicographic enumeration")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "pairs", expect)

    @property
    def count(self) -> int:
        return len(self.pairs)

    def allocation(self) -> tuple[tuple[tuple[bool, int], ...], ...]:
        """Per matrix (index 0..m-1): tuple of (inner_circle, root power)."""
        per = [[] for _ in range(self.m)]
        for l, (i, j) in enumerate(self.pairs):
            per[i - 1].append((True, l))
            per[j - 1].append((False, l))
        return tuple(tuple(entries) for entries in per)

    def shared_power(self, i: int, j: int) -> int:
        """Root power of the close pair between matrices i < j (1-based)."""
        if not (1 <= i < j <= self.m):
            raise ValueError("need 1 <= i < j <= m")
        return self.pairs.index((i, j))


def pair_assignment(m: int) -> PairAssignment:
    return PairAssignment(m)


# ------------------------------------------------- gap-domain helpers


def rho_from_gaps(g_r: float, g_s: float) -> float:
    """Pseudo-hyperbolic distance of radii 1-g_r, 1-g_s, cancellation-free."""
    if not (0.0 < g_s <= g_r < 1.0):
        raise ValueError("gaps must satisfy 0 < g_s <= g_r < 1")
    return (g_r - g_s) / (g_r + g_s - g_r * g_s)


def _outer_gap(g_r: float, q: float) -> float:
    # solve rho(r, s) = q for s > r; in gaps: g_s = g_r (1-q)/(1+qr)
    r = 1.0 - g_r
    return g_r * (1.0 - q) / (1.0 + q * r)


def _midpoint_gap(g_a: float, g_b: float) -> float:
    # radius with equal pseudo-hyperbolic distance to 1-g_a and 1-g_b
    x = math.sqrt((g_a * g_b) / ((2.0 - g_a) * (2.0 - g_b)))
    return 2.0 * x / (1.0 + x)


def _defect_gap(g_c: float, g_t: float, dphi: np.ndarray) -> np.ndarray:
    # 1 - |b_w(z)|^2 for |w| = 1-g_c, |z| = 1-g_t, angle offset dphi
    num = g_c * (2.0 - g_c) * g_t * (2.0 - g_t)
    den = (g_c + g_t - g_c * g_t) ** 2 + 4.0 * (1.0 - g_c) * (
        1.0 - g_t
    ) * np.sin(dphi / 2.0) ** 2
    return num / den


def _circle_sup(circles, g_t: float, uniform: int = 1024) -> float:
    """Sup over |z| = 1-g_t of the defect sum of all circle points.

    circles: iterable of (gap, count) with `count` equally spaced points
    starting at angle 0.  Every term is unimodal in the angle with peak at
    its own point, so sampling all point angles, adjacent midpoints, and a
    coarse uniform mesh captures the sup to far better accuracy than the
    decision thresholds require.
    """
    cands = [np.linspace(0.0, 2.0 * np.pi, uniform + 1)]
    for g_c, count in circles:
        th = 2.0 * np.pi * np.arange(count) / count
        cands.append(th)
        cands.append(th + np.pi / count)
    phi = np.unique(np.concatenate(cands))
    total = np.zeros_like(phi)
    for g_c, count in circles:
        th = 2.0 * np.pi * np.arange(count) / count
        d = phi[:, None] - th[None, :]
        total += _defect_gap(g_c, g_t, d).sum(axis=1)
    return float(total.max())


# ------------------------------------------------- counterexample types


@dataclass(frozen=True)
class CounterexampleSpec:
    """Built level data: block counts, exact radius gaps, assignments."""

    block_counts: tuple[int, ...]
    n_max: int
    radius_gaps: tuple[tuple[float, float], ...]   # (g_r, g_s) per level
    assignments: tuple[PairAssignment, ...]
    bessel_target: float
    riesz_cap: float

    @property
    def radii(self) -> tuple[tuple[float, float], ...]:
        return tuple(
            (1.0 - g_r, 1.0 - g_s) for g_r, g_s in self.radius_gaps
        )

    def close_pair_rho(self, n: int) -> float:
        """Pseudo-hyperbolic gap of the paired circles at level n (1-based)."""
        g_r, g_s = self.radius_gaps[n - 1]
        return rho_from_gaps(g_r, g_s)


@dataclass(frozen=True, eq=False)
class CounterexampleInstance:
    spec: CounterexampleSpec
    nodes: tuple[JordanSpec, ...]           # level-major, matrix-minor
    level_slices: tuple[slice, ...]
    protected_gaps: tuple[float, ...]       # g_t for levels 1..n_max-1
    search_log: tuple[dict, ...]

    def level_nodes(self, n: int) -> tuple[JordanSpec, ...]:
        return self.nodes[self.level_slices[n - 1]]

    def all_points(self) -> np.ndarray:
        pts = []
        for node in self.nodes:
            pts.extend(node.eigenvalues())
        return np.asarray(pts, dtype=complex)


def _level_matrix_points(
    m: int, g_r: float, g_s: float, assignment: PairAssignment
) -> list[np.ndarray]:
    """Eigenvalue arrays for the m matrices of one level."""
    count = assignment.count
    r, s = 1.0 - g_r, 1.0 - g_s
    omega = roots_of_unity(count)
    per = []
    for entries in assignment.allocation():
        eigs = [
            (r if inner else s) * omega[l] for inner, l in entries
        ]
        per.append(np.asarray(eigs, dtype=complex))
    return per


def _matrix_riesz_max(
    g_r: float, g_s: float, assignment: PairAssignment
) -> float:
    """Largest lower-side Riesz constant over the level's matrices.

    This is the constant a coefficient-norm bound needs: smallest C with
    sum |c|^2 <= C^2 ||sum c k_hat||^2 for that matrix's normalized
    kernels, i.e. 1/sqrt of the whitened Gram's smallest eigenvalue.
    """
    worst = 0.0
    for eigs in _level_matrix_points(assignment.m, g_r, g_s, assignment):
        bounds = riesz_bounds(line_system(list(eigs)))
        if not bounds.riesz_at_tol:
            return math.inf
        worst = max(worst, 1.0 / math.sqrt(bounds.lower))
    return worst


# --------------------------------------------------- counterexample build


def counterexample_build(
    block_counts: Sequence[int],
    n_max: int | None = None,
    bessel_target: float = 1.0,
    riesz_cap: float = 2.0,
) -> CounterexampleInstance:
    """Choose radii level by level so all kernel lines stay Bessel.

    Level n places its 2*C(m_n,2) eigenvalues on circles 1-g_r, 1-g_s with
    pseudo-hyperbolic gap exactly 1/(n+1).  After fixing level n a
    protection radius t_n is found so the accumulated defect sum on
    {|z| >= t_n} is at most bessel_target*2^-n; level n+1 must then
    contribute at most the same amount on {|z| <= t_n} and keep every
    matrix's kernel-line Riesz constant at or under riesz_cap.  Both
    criteria are sups over the circle |z| = t_n (each defect term is
    monotone in |z| on the relevant side), evaluated on a deterministic
    angular grid; the radius search is a dyadic scan plus geometric
    bisection on the gap.

    Raises ValueError when the budget is exceeded or the search for some
    level is pushed past radius 1 - 1e-12.
    """
    block_counts = tuple(int(m) for m in block_counts)
    if n_max is None:
        n_max = len(block_counts)
    if n_max < 1 or n_max > len(block_counts):
        raise ValueError("n_max must index into block_counts")
    block_counts = block_counts[:n_max]
    if any(m < 2 for m in block_counts):
        raise ValueError("every level needs at least two matrices")
    if any(
        block_counts[i + 1] < block_counts[i] for i in range(n_max - 1)
    ):
        raise ValueError("block counts must be nondecreasing")
    budget = sum(m * (m - 1) for m in block_counts)
    if budget > _PAIR_BUDGET:
        raise ValueError(
            f"budget exceeded: {budget} eigenvalues > {_PAIR_BUDGET}"
        )
    if bessel_target <= 0:
        raise ValueError("bessel_target must be positive")
    if riesz_cap <= 1:
        raise ValueError("riesz_cap must exceed 1")

    assignments = tuple(pair_assignment(m) for m in block_counts)
    gaps: list[tuple[float, float]] = []
    t_gaps: list[float] = []
    log: list[dict] = []

    for n in range(1, n_max + 1):
        m = block_counts[n - 1]
        assign = assignments[n - 1]
        count = assign.count
        q = 1.0 / (n + 1)
        g_t_prev = t_gaps[n - 2] if n >= 2 else None

        def ok(g_r: float) -> bool:
            if not (RADIUS_GUARD <= g_r < 1.0):
                return False
            g_s = _outer_gap(g_r, q)
            if g_t_prev is not None:
                # new circles must sit strictly outside the protected disc
                if g_r >= g_t_prev:
                    return False
                sup = _circle_sup(
                    [(g_r, count), (g_s, count)], g_t_prev
                )
                if sup > bessel_target * 2.0 ** (-(n - 1)):
                    return False
            return _matrix_riesz_max(g_r, g_s, assign) <= riesz_cap

        k = 1
        if g_t_prev is not None:
            k = max(1, math.floor(-math.log2(g_t_prev)) + 1)
        k_guard = math.floor(-math.log2(RADIUS_GUARD))
        while k <= k_guard and not ok(2.0**-k):
            k += 1
        if k > k_guard:
            raise ValueError(
                f"radius search hit the 1-{RADIUS_GUARD:g} guard at level {n}"
            )
        g_hi = 2.0**-k            # passes
        g_lo = 2.0 ** -(k - 1)    # fails (or out of admissible range)
        iters = 0
        while g_lo / g_hi > 1.001 and iters < 80:
            g_mid = math.sqrt(g_lo * g_hi)
            if ok(g_mid):
                g_hi = g_mid
            else:
                g_lo = g_mid
            iters += 1
        g_r = g_hi
        g_s = _outer_gap(g_r, q)
        gaps.append((g_r, g_s))
        entry = {
            "level": n,
            "first_pass_exponent": k,
            "bisection_iters": iters,
            "gap_r": g_r,
            "gap_s": g_s,
            "matrix_riesz": _matrix_riesz_max(g_r, g_s, assign),
        }

        if n < n_max:
            circles = [
                (g, c)
                for (gr, gs), a in zip(gaps, assignments[:n])
                for g, c in ((gr, a.count), (gs, a.count))
            ]
            kt = math.floor(-math.log2(g_s)) + 1
            g_t = None
            while kt <= 52:
                cand = 2.0**-kt
                if _circle_sup(circles, cand) <= bessel_target * 2.0 ** (-n):
                    g_t = cand
                    break
                kt += 1
            if g_t is None:
                raise ValueError(
                    f"no representable protection radius at level {n}"
                )
            t_gaps.append(g_t)
            entry["gap_t"] = g_t
        log.append(entry)

    spec = CounterexampleSpec(
        block_counts=block_counts,
        n_max=n_max,
        radius_gaps=tuple(gaps),
        assignments=assignments,
        bessel_target=float(bessel_target),
        riesz_cap=float(riesz_cap),
    )
    nodes: list[JordanSpec] = []
    slices: list[slice] = []
    for n in range(1, n_max + 1):
        g_r, g_s = gaps[n - 1]
        start = len(nodes)
        for eigs in _level_matrix_points(
            block_counts[n - 1], g_r, g_s, assignments[n - 1]
        ):
            nodes.append(JordanSpec.diagonal(eigs))
        slices.append(slice(start, len(nodes)))
    return CounterexampleInstance(
        spec=spec,
        nodes=tuple(nodes),
        level_slices=tuple(slices),
        protected_gaps=tuple(t_gaps),
        search_log=tuple(log),
    )


# -------------------------------------------------- grids and defect sums


def counterexample_grid(
    inst: CounterexampleInstance, k: int = 10, base: int = 16
) -> DiscGrid:
    """Dyadic grid augmented with rings through and between the circles.

    Ring counts on the construction circles are power-of-two multiples of
    the level's pair count, so the eigenvalue angles land on grid points
    bit-exactly (2pi*l*2^a/(P*2^a) rounds like 2pi*l/P because scaling by
    2^a is exact); refinement doubles counts and keeps that alignment.
    """
    radii: dict[float, int] = {}

    def add_ring(r: float, count: int):
        if 0.0 <= r < 1.0:
            radii[r] = max(radii.get(r, 0), count)

    grid0 = DiscGrid.dyadic(k=k, base=base)
    for r, c in zip(grid0.radii, grid0.counts):
        add_ring(r, c)
    for n in range(1, inst.spec.n_max + 1):
        g_r, g_s = inst.spec.radius_gaps[n - 1]
        P = inst.spec.assignments[n - 1].count
        mult = 4
        while P * mult < 256:
            mult *= 2
        count = P * mult
        add_ring(1.0 - g_r, count)
        add_ring(1.0 - g_s, count)
        add_ring(1.0 - _midpoint_gap(g_r, g_s), count)
    order = sorted(radii)
    return DiscGrid(
        radii=tuple(order), counts=tuple(radii[r] for r in order)
    )


def defect_sum_sup(
    points: Sequence[complex] | np.ndarray, grid: DiscGrid
) -> tuple[float, complex]:
    """Max over the grid of sum_w (1 - |b_w(z)|^2), with the argmax."""
    pts = np.asarray(points, dtype=complex)
    if pts.ndim != 1 or pts.size == 0:
        raise ValueError("need a nonempty 1-d point collection")
    if np.any(np.abs(pts) >= 1.0):
        raise ValueError("points must lie inside the open disc")
    z = grid.points()
    total = np.zeros(z.shape, dtype=float)
    for w in pts:
        num = z - w
        den = 1.0 - np.conj(w) * z
        mod2 = np.abs(num / den) ** 2
        total += 1.0 - np.minimum(mod2, 1.0)
    i = int(np.argmax(total))
    return float(total[i]), complex(z[i])


# --------------------------------------------------- counterexample verify


@dataclass(frozen=True, eq=False)
class LevelReport:
    level: int
    m: int
    close_pairs: int
    pair_sin_bound: float       # rigorous bound for every matrix pair
    sin_threshold: float        # 1/(n+1)
    rho_residual: float         # |(n+1)*rho - 1|
    gram_checked: bool
    gram_sin_max: float
    riesz_c_max: float
    pigeonhole_tested: bool
    pigeonhole_failures: int


@dataclass(frozen=True, eq=False)
class CounterexampleReport:
    levels: tuple[LevelReport, ...]
    riesz_c: float             # C: worst per-matrix lower Riesz constant
    line_bessel: float         # M: Bessel bound of all kernel lines
    model_bessel: float        # Bessel bound of the model-space system
    lemma_bound_ok: bool       # model_bessel <= C * M (+ slack)
    defect_sup: float
    defect_argmax: complex
    defect_sup_refined: float
    coloring_classes: int
    colorings_per_level: int
    grid: DiscGrid
    all_ok: bool


# float Gram entries like 1 - r*s lose ~log10(1/gap) digits; beyond this
# combined gap the direct sin computation is noisier than the 1e-9 check
_GRAM_TRUST_GAP = 1e-6


def counterexample_verify(
    inst: CounterexampleInstance,
    grid: DiscGrid | None = None,
    seed: int = 0,
    colorings: int = 200,
    sin_slack: float = 1e-9,
    rank_tol: float = RANK_TOL,
) -> CounterexampleReport:
    """Check the built instance's four defining properties.

    (a) every matrix pair within a level has model-space angle at most
    1/(n+1): each pair shares an aligned close eigenvalue pair by
    construction, and the angle is bounded by that pair's
    pseudo-hyperbolic distance, evaluated from the exact gap bookkeeping.
    On levels where the circles are wide enough apart for float Grams the
    angle is also computed directly and checked against the same bound.
    (b) per-matrix kernel Riesz constants stay at or under the cap;
    (c) the model-space system Bessel bound is at most C*M with C from (b)
    and M the Bessel bound of all kernel lines, computed independently;
    (d) seeded random colorings with max(m_n)-1 classes always put two
    matrices of a level with m_n > classes into one class, forcing a close
    pair there.
    """
    spec = inst.spec
    if grid is None:
        grid = counterexample_grid(inst)
    rng = np.random.default_rng(seed)
    k_classes = max(spec.block_counts) - 1
    levels: list[LevelReport] = []
    all_ok = True
    riesz_c = 0.0

    for n in range(1, spec.n_max + 1):
        m = spec.block_counts[n - 1]
        assign = spec.assignments[n - 1]
        g_r, g_s = spec.radius_gaps[n - 1]
        q = 1.0 / (n + 1)
        rho = rho_from_gaps(g_r, g_s)
        rho_residual = abs((n + 1) * rho - 1.0)
        pair_bound = rho
        ok_a = pair_bound <= q + sin_slack and rho_residual <= 1e-12

        gram_checked = (g_r + g_s) >= _GRAM_TRUST_GAP
        gram_sin_max = math.nan
        if gram_checked:
            subs = [
                Subspace.from_basis(model_space_basis(node), rank_tol=rank_tol)
                for node in inst.level_nodes(n)
            ]
            worst = 0.0
            for i in range(m):
                for j in range(i + 1, m):
                    worst = max(worst, sin_angle(subs[i], subs[j]).sin)
            gram_sin_max = worst
            ok_a = ok_a and worst <= q + sin_slack

        c_max = _matrix_riesz_max(g_r, g_s, assign)
        riesz_c = max(riesz_c, c_max)
        ok_b = c_max <= spec.riesz_cap + 1e-9

        tested = m > k_classes
        failures = 0
        if tested:
            for _ in range(colorings):
                colors = rng.integers(0, k_classes, size=m)
                mono = None
                for i in range(m):
                    for j in range(i + 1, m):
                        if colors[i] == colors[j]:
                            mono = (i + 1, j + 1)
                            break
                    if mono:
                        break
                if mono is None or pair_bound > q + sin_slack:
                    failures += 1
        all_ok = all_ok and ok_a and ok_b and failures == 0
        levels.append(
            LevelReport(
                level=n,
                m=m,
                close_pairs=assign.count,
                pair_sin_bound=pair_bound,
                sin_threshold=q,
                rho_residual=rho_residual,
                gram_checked=gram_checked,
                gram_sin_max=gram_sin_max,
                riesz_c_max=c_max,
                pigeonhole_tested=tested,
                pigeonhole_failures=failures,
            )
        )

    pts = inst.all_points()
    line_sys = line_system(list(pts), rank_tol=rank_tol)
    m_lines = bessel_bound(line_sys)
    model_subs = [
        Subspace.from_basis(model_space_basis(node), rank_tol=rank_tol)
        for node in inst.nodes
    ]
    model_sys = SubspaceSystem.build(model_subs, rank_tol=rank_tol)
    model_b = bessel_bound(model_sys)
    lemma_ok = model_b <= riesz_c * m_lines + 1e-9
    all_ok = all_ok and lemma_ok

    sup, argmax = defect_sum_sup(pts, grid)
    sup_ref, _ = defect_sum_sup(pts, grid.refined())
    return CounterexampleReport(
        levels=tuple(levels),
        riesz_c=riesz_c,
        line_bessel=m_lines,
        model_bessel=model_b,
        lemma_bound_ok=lemma_ok,
        defect_sup=sup,
        defect_argmax=argmax,
        defect_sup_refined=sup_ref,
        coloring_classes=k_classes,
        colorings_per_level=colorings,
        grid=grid,
        all_ok=all_ok,
    )
