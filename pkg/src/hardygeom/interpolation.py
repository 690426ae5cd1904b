"""Minimal multiplier norms and separation diagnostics for matrix nodes.

A matrix node is a Jordan spec; its model space is spanned by derivative
kernels at the eigenvalues (see `nodes.model_space_basis`).  Interpolating a
target value w_n at node n with a bounded multiplier phi means phi(A_n) has
the prescribed value; on the model side the adjoint acts block-diagonally,
so the minimal multiplier sup-norm over the finite section is the operator
norm of the block operator conj(w_n) * I restricted to the joint span.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .disc import DiscGrid, leave_one_out_delta, pseudo_hyperbolic
from .linalg import RANK_TOL
from .nodes import JordanSpec, TaylorJet, minimal_blaschke, model_space_basis
from .subspaces import (
    RieszBounds,
    Subspace,
    SubspaceSystem,
    bessel_bound,
    riesz_bounds,
    sin_angle,
    sin_angle_to_span,
    span_operator_norm,
)

__all__ = [
    "InterpolationProblem",
    "NodeOverlapError",
    "PickOperator",
    "pick_operator",
    "min_multiplier_norm",
    "min_multiplier_norm_jets",
    "SeparationReport",
    "separation_report",
    "InterpolationDashboard",
    "interpolation_dashboard",
]


class NodeOverlapError(ValueError):
    """Two nodes share model-space directions; interpolation is ill-posed."""

    def __init__(self, i: int, j: int, detail: str = ""):
        self.pair = (i, j)
        msg = f"model spaces of nodes {i} and {j} overlap"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class InterpolationProblem:
    """Nodes with one scalar target each (phi(A_n) = w_n * I)."""

    nodes: tuple[JordanSpec, ...]
    targets: tuple[complex, ...]

    def __init__(self, nodes: Sequence[JordanSpec], targets: Sequence[complex]):
        nodes = tuple(nodes)
        targets = tuple(complex(w) for w in targets)
        if not nodes:
            raise ValueError("need at least one node")
        if len(nodes) != len(targets):
            raise ValueError(
                f"{len(nodes)} nodes but {len(targets)} targets"
            )
        for w in targets:
            if not (math.isfinite(w.real) and math.isfinite(w.imag)):
                raise ValueError("targets must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "targets", targets)


@dataclass(frozen=True, eq=False)
class PickOperator:
    """Adjoint-side target operator on the joint model span.

    `matrix` acts on stacked model-basis coefficients; block n is
    conj(w_n) * I on the node's model space.  `norm` is the minimal
    sup-norm of any multiplier achieving the targets on these nodes.
    """

    matrix: np.ndarray
    system: SubspaceSystem
    subspaces: tuple[Subspace, ...]
    block_slices: tuple[slice, ...]
    norm: float


def _model_subspaces(
    nodes: Sequence[JordanSpec], rank_tol: float
) -> list[Subspace]:
    return [
        Subspace.from_basis(model_space_basis(spec), rank_tol=rank_tol)
        for spec in nodes
    ]


def _checked_system(
    nodes: Sequence[JordanSpec], rank_tol: float
) -> tuple[SubspaceSystem, list[Subspace]]:
    subs = _model_subspaces(nodes, rank_tol)
    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            shared = set(subs[i].basis.vectors) & set(subs[j].basis.vectors)
            if shared:
                v = next(iter(shared))
                raise NodeOverlapError(
                    i, j, f"shared kernel direction at {v.point}"
                )
            if sin_angle(subs[i], subs[j]).overlap:
                raise NodeOverlapError(i, j)
    system = SubspaceSystem.build(subs, rank_tol=rank_tol)
    if system.joint_whitener.dropped:
        raise NodeOverlapError(
            0, len(subs) - 1, "joint model span is rank deficient"
        )
    return system, subs


def pick_operator(
    problem: InterpolationProblem, rank_tol: float = RANK_TOL
) -> PickOperator:
    """Assemble the block target operator and its span norm.

    Raises NodeOverlapError naming the offending node pair when two model
    spaces intersect (no multiplier can take distinct values there).
    """
    system, subs = _checked_system(problem.nodes, rank_tol)
    dims = [sub.basis.dim for sub in subs]
    total = sum(dims)
    op = np.zeros((total, total), dtype=complex)
    slices = []
    pos = 0
    for d, w in zip(dims, problem.targets):
        sl = slice(pos, pos + d)
        slices.append(sl)
        op[sl, sl] = np.conj(w) * np.eye(d)
        pos += d
    norm = span_operator_norm(system, op)
    return PickOperator(
        matrix=op,
        system=system,
        subspaces=tuple(subs),
        block_slices=tuple(slices),
        norm=norm,
    )


def min_multiplier_norm(
    problem: InterpolationProblem, rank_tol: float = RANK_TOL
) -> float:
    """Smallest sup-norm of a multiplier meeting all scalar targets."""
    return pick_operator(problem, rank_tol).norm


def _chain_operator(m: int, jet: TaylorJet) -> np.ndarray:
    # adjoint action on the chain s, s', .., s^(m-1) at one eigenvalue:
    # column l (image of the order-l kernel) has entry C(l,k)*conj(f^(l-k))
    # in row k
    if len(jet.values) < m:
        raise ValueError(
            f"jet at {jet.center} has {len(jet.values)} derivatives, "
            f"chain needs {m}"
        )
    t = np.zeros((m, m), dtype=complex)
    for l in range(m):
        for k in range(l + 1):
            t[k, l] = math.comb(l, k) * np.conj(jet.values[l - k])
    return t


def _node_jet_operator(spec: JordanSpec, jets) -> np.ndarray:
    # mirror the jet lookup convention of apply_function_jordan
    if hasattr(jets, "get"):
        lookup = dict(jets)
    else:
        lookup = {jet.center: jet for jet in jets}
    blocks = []
    for lam in spec.eigenvalues():
        try:
            jet = lookup[lam]
        except KeyError:
            raise ValueError(f"no jet supplied at eigenvalue {lam}") from None
        blocks.append(_chain_operator(spec.max_block(lam), jet))
    total = sum(b.shape[0] for b in blocks)
    out = np.zeros((total, total), dtype=complex)
    pos = 0
    for b in blocks:
        d = b.shape[0]
        out[pos : pos + d, pos : pos + d] = b
        pos += d
    return out


def min_multiplier_norm_jets(
    nodes: Sequence[JordanSpec],
    jets: Sequence,
    rank_tol: float = RANK_TOL,
) -> float:
    """Minimal multiplier norm for derivative-level targets.

    `jets[n]` supplies, per eigenvalue of node n, the value and derivatives
    the multiplier must take there (a TaylorJet, a mapping eigenvalue->jet,
    or an iterable of jets keyed by center).  Constant jets reproduce
    `min_multiplier_norm` exactly.
    """
    nodes = tuple(nodes)
    if len(nodes) != len(jets):
        raise ValueError(f"{len(nodes)} nodes but {len(jets)} jet entries")
    system, subs = _checked_system(nodes, rank_tol)
    per_node = []
    for spec, jet_entry in zip(nodes, jets):
        if isinstance(jet_entry, TaylorJet):
            jet_entry = [jet_entry]
        per_node.append(_node_jet_operator(spec, jet_entry))
    total = sum(b.shape[0] for b in per_node)
    op = np.zeros((total, total), dtype=complex)
    pos = 0
    for b in per_node:
        d = b.shape[0]
        op[pos : pos + d, pos : pos + d] = b
        pos += d
    return span_operator_norm(system, op)


@dataclass(frozen=True)
class SeparationReport:
    """Pairwise (weak) and one-vs-rest (strong) separation constants."""

    weak_constant: float
    strong_constant: float
    weak_pair: tuple[int, int]
    strong_index: int
    weak_multiplier: float
    strong_multiplier: float


def separation_report(
    nodes: Sequence[JordanSpec], rank_tol: float = RANK_TOL
) -> SeparationReport:
    """Angles between model spaces: worst pair and worst one-vs-span.

    The reciprocal of each constant bounds the norm of an idempotent
    multiplier separating the nodes (1 on one group, 0 on the other).
    Single node: every constant is trivially 1.
    """
    nodes = tuple(nodes)
    subs = _model_subspaces(nodes, rank_tol)
    if len(subs) == 1:
        return SeparationReport(1.0, 1.0, (0, 0), 0, 1.0, 1.0)
    weak = math.inf
    weak_pair = (0, 1)
    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            s = sin_angle(subs[i], subs[j]).sin
            if s < weak:
                weak = s
                weak_pair = (i, j)
    strong = math.inf
    strong_index = 0
    for n in range(len(subs)):
        others = subs[:n] + subs[n + 1 :]
        s = sin_angle_to_span(subs[n], others, rank_tol=rank_tol).sin
        if s < strong:
            strong = s
            strong_index = n
    def recip(x: float) -> float:
        return 1.0 / x if x > 0 else math.inf

    return SeparationReport(
        weak_constant=weak,
        strong_constant=strong,
        weak_pair=weak_pair,
        strong_index=strong_index,
        weak_multiplier=recip(weak),
        strong_multiplier=recip(strong),
    )


@dataclass(frozen=True, eq=False)
class InterpolationDashboard:
    node_dims: tuple[int, ...]
    riesz: RieszBounds
    bessel: float
    separation: SeparationReport
    delta: float
    grid: DiscGrid
    min_pseudo_hyperbolic: float


def _min_eigen_separation(nodes: Sequence[JordanSpec]) -> float:
    # closest eigenvalue pair across distinct nodes, pseudo-hyperbolically
    best = math.inf
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            for lam in nodes[i].eigenvalues():
                for mu in nodes[j].eigenvalues():
                    best = min(best, pseudo_hyperbolic(lam, mu))
    return best if math.isfinite(best) else 1.0


def interpolation_dashboard(
    nodes: Sequence[JordanSpec],
    grid: DiscGrid | None = None,
    rank_tol: float = RANK_TOL,
) -> InterpolationDashboard:
    """One-stop finite-section diagnostics for a node family.

    Reports joint Riesz bounds, the Bessel bound, separation constants,
    and the leave-one-out infimum of the node Blaschke products on `grid`
    (the scalar interpolation certificate).
    """
    nodes = tuple(nodes)
    if grid is None:
        grid = DiscGrid.dyadic()
    subs = _model_subspaces(nodes, rank_tol)
    system = SubspaceSystem.build(subs, rank_tol=rank_tol)
    riesz = riesz_bounds(system)
    bessel = bessel_bound(system)
    sep = separation_report(nodes, rank_tol)
    family = [minimal_blaschke(spec) for spec in nodes]
    delta = leave_one_out_delta(family, grid).delta
    return InterpolationDashboard(
        node_dims=tuple(sub.basis.dim for sub in subs),
        riesz=riesz,
        bessel=bessel,
        separation=sep,
        delta=delta,
        grid=grid,
        min_pseudo_hyperbolic=_min_eigen_separation(nodes),
    )
