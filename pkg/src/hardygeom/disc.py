"""Unit-disc geometry: Blaschke factors and products, the
pseudo-hyperbolic metric, near-boundary grids, and the leave-one-out
separation delta of a family of inner functions.

Magnitudes of Blaschke products are always accumulated in the log
domain.  |b| is clamped to [1e-300, 1] before taking logs, except at
exact zeros, which are reported exactly as log-modulus -inf rather than
perturbed.  Phases are best-effort (mod 2*pi); the magnitude is the
contract.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BlaschkeProduct",
    "DeltaEstimate",
    "DiscGrid",
    "blaschke_factor",
    "blaschke_product_eval",
    "check_disc_point",
    "leave_one_out_delta",
    "pseudo_hyperbolic",
    "roots_of_unity",
]

_CLAMP = 1e-300
_TWO_PI = 2.0 * math.pi


def roots_of_unity(count: int) -> np.ndarray:
    """exp(2 pi i j / count), j = 0..count-1, with pinned rounding.

    Every caller that needs ring points to coincide bit for bit (grid
    membership of construction eigenvalues, refinement stability) must go
    through this helper: the angle is formed as (2pi * j) / count in real
    arithmetic.  The complex-literal route 2j*pi*arange/count is NOT
    equivalent, since complex-by-scalar division in numpy can be off by
    one ulp from float division.
    """
    j = np.arange(int(count))
    return np.exp(1j * ((_TWO_PI * j) / count))


def check_disc_point(z, name: str = "point") -> complex:
    """Validate strict membership in the open unit disc."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z!r}")
    if abs(z) >= 1.0:
        raise ValueError(f"{name} must satisfy |z| < 1, got |{z!r}| = {abs(z)}")
    return z


def blaschke_factor(lam, z):
    """The factor b_lam(z) = (lam - z) / (1 - conj(lam) z).

    Automorphism of the disc vanishing at lam; accepts scalar or ndarray z.
    """
    lam = check_disc_point(lam, "lam")
    return (lam - z) / (1.0 - np.conj(lam) * z)


def pseudo_hyperbolic(z, w) -> float:
    """rho(z, w) = |b_w(z)|, the natural separation metric of the disc."""
    z = check_disc_point(z, "z")
    return float(abs(blaschke_factor(w, z)))


@dataclass(frozen=True)
class BlaschkeProduct:
    """Finite Blaschke product given by zeros with multiplicities."""

    zeros: tuple[complex, ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        zeros = tuple(check_disc_point(z, "zero") for z in self.zeros)
        mults = tuple(int(m) for m in self.multiplicities)
        if len(zeros) != len(mults):
            raise ValueError("zeros and multiplicities must have equal length")
        if any(m < 1 for m in mults):
            raise ValueError("multiplicities must be positive integers")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "multiplicities", mults)

    @classmethod
    def from_pairs(cls, pairs) -> "BlaschkeProduct":
        pairs = list(pairs)
        return cls(
            zeros=tuple(p for p, _ in pairs),
            multiplicities=tuple(m for _, m in pairs),
        )

    @classmethod
    def from_points(cls, points) -> "BlaschkeProduct":
        pts = tuple(points)
        return cls(zeros=pts, multiplicities=(1,) * len(pts))

    @property
    def degree(self) -> int:
        return sum(self.multiplicities)


def _log_abs_factor(lam: complex, z):
    """log|b_lam(z)| for scalar or ndarray z; exact zeros give -inf."""
    num = np.abs(lam - z)
    den = np.abs(1.0 - np.conj(lam) * z)
    ratio = np.minimum(num / den, 1.0)
    exact = num == 0.0
    clamped = np.where(exact, 1.0, np.maximum(ratio, _CLAMP))
    out = np.log(clamped)
    return np.where(exact, -np.inf, out)


def blaschke_product_eval(product: BlaschkeProduct, z):
    """Evaluate a Blaschke product at z as (log_modulus, phase).

    log_modulus is the sum of multiplicity * log|b_zero(z)| and equals
    -inf exactly when z is a zero; phase is accumulated mod 2*pi into
    (-pi, pi].  Exponentiation is left to the caller.  z may be a scalar
    or an ndarray of disc points.
    """
    z = np.asarray(z)
    log_mod = np.zeros(z.shape, dtype=float)
    phase = np.zeros(z.shape, dtype=float)
    for lam, m in zip(product.zeros, product.multiplicities):
        log_mod = log_mod + m * _log_abs_factor(lam, z)
        phase = phase + m * (
            np.angle(lam - z) - np.angle(1.0 - np.conj(lam) * z)
        )
    phase = np.remainder(phase + math.pi, _TWO_PI) - math.pi
    if z.ndim == 0:
        return float(log_mod), float(phase)
    return log_mod, phase


@dataclass(frozen=True)
class DiscGrid:
    """Polar grid: rings at the given radii with per-ring angular counts.

    The canonical grid has rings at 1 - 2**-k, k = 0..K, with angular
    count proportional to 1/(1 - r), so density is roughly uniform in the
    pseudo-hyperbolic metric.  refined() doubles every angular count and
    appends one ring halfway (in gap) to the boundary; old grid points
    stay grid points bit-for-bit, which makes inf-estimates monotone
    under refinement by construction.
    """

    radii: tuple[float, ...]
    counts: tuple[int, ...]
    dyadic_k: int | None = field(default=None, compare=False)

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        counts = tuple(int(c) for c in self.counts)
        if not radii:
            raise ValueError("grid needs at least one ring")
        if len(radii) != len(counts):
            raise ValueError("radii and counts must have equal length")
        if any(c < 1 for c in counts):
            raise ValueError("angular counts must be >= 1")
        if any(not (0.0 <= r < 1.0) for r in radii):
            raise ValueError("radii must lie in [0, 1)")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly ascending")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def dyadic(cls, k: int = 10, base: int = 16) -> "DiscGrid":
        if k < 0:
            raise ValueError("k must be >= 0")
        radii = tuple(1.0 - 2.0 ** (-i) for i in range(k + 1))
        counts = tuple(1 if i == 0 else base * 2**i for i in range(k + 1))
        return cls(radii=radii, counts=counts, dyadic_k=k)

    @property
    def total_points(self) -> int:
        return sum(self.counts)

    def points(self) -> np.ndarray:
        chunks = [r * roots_of_unity(c) for r, c in zip(self.radii, self.counts)]
        return np.concatenate(chunks)

    def refined(self) -> "DiscGrid":
        new_r = 1.0 - (1.0 - self.radii[-1]) / 2.0
        return DiscGrid(
            radii=self.radii + (new_r,),
            counts=tuple(2 * c for c in self.counts) + (2 * max(self.counts),),
            dyadic_k=None if self.dyadic_k is None else self.dyadic_k + 1,
        )

    def resolution(self) -> dict:
        """Grid parameters for embedding in result records."""
        return {
            "rings": len(self.radii),
            "total_points": self.total_points,
            "max_radius": self.radii[-1],
            "dyadic_k": self.dyadic_k,
        }


@dataclass(frozen=True)
class DeltaEstimate:
    """Grid estimate of the leave-one-out separation infimum.

    An estimate of an infimum over the whole disc, so the grid
    parameters travel with the value.
    """

    delta: float
    argmin: complex
    grid: DiscGrid


def leave_one_out_delta(family, grid: DiscGrid) -> DeltaEstimate:
    """min over grid z of max over n of prod_{j != n} |Theta_j(z)|.

    Accumulated in the log domain.  A point where >= 2 family members
    vanish forces every leave-one-out product to 0 there; a point where
    exactly one vanishes leaves only that member's leave-one-out product
    finite.  Permutation-invariant; never increases under grid
    refinement (old points remain on the refined grid).
    """
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    if any(p.degree == 0 for p in family):
        raise ValueError("every family member must be a nontrivial product")
    pts = grid.points()
    logs = np.stack([blaschke_product_eval(p, pts)[0] for p in family])
    neg_inf = np.isneginf(logs)
    finite = np.where(neg_inf, 0.0, logs)
    total = finite.sum(axis=0)
    n_zero = neg_inf.sum(axis=0)
    # leave-one-out log-product for member n is total - own, valid when no
    # other member vanishes at the point
    loo = total[None, :] - finite
    valid = (n_zero[None, :] == 0) | ((n_zero[None, :] == 1) & neg_inf)
    loo = np.where(valid, loo, -np.inf)
    best = np.exp(loo.max(axis=0))
    idx = int(best.argmin())
    return DeltaEstimate(
        delta=float(best[idx]), argmin=complex(pts[idx]), grid=grid
    )
