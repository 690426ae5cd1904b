"""Finite-section geometry of kernel spans in the Hardy space.

Derivative-kernel Grams, angles and distances between model spaces,
Bessel/Riesz diagnostics for systems of spans, minimal multiplier norms
for matrix-node interpolation, and the two worked constructions (dyadic
equidistributed levels; close-circle counterexample levels).
"""

__version__ = "0.1.0"

from .disc import (
    BlaschkeProduct,
    DeltaEstimate,
    DiscGrid,
    blaschke_factor,
    blaschke_product_eval,
    check_disc_point,
    leave_one_out_delta,
    pseudo_hyperbolic,
    roots_of_unity,
)
from .kernels import (
    GramResult,
    KernelBasis,
    KernelVector,
    cross_gram,
    gram_matrix,
    kernel_inner,
    kernel_inner_series,
)
from .linalg import hermitian_eigen, psd_sqrt_inverse, singular_values
from .nodes import (
    JordanSpec,
    TaylorJet,
    apply_function_jordan,
    jordan_matrix,
    matrix_kernel_coeffs,
    minimal_blaschke,
    model_space_basis,
    suggest_truncation,
)
from .subspaces import (
    AngleResult,
    BesselResult,
    RieszBounds,
    Subspace,
    SubspaceSystem,
    adjoint_restriction_lower_bound,
    bessel_bound,
    bessel_detail,
    delta_angle_envelope,
    dist_to_subspace,
    joint_idempotent_norm,
    line_system,
    riesz_bounds,
    sin_angle,
    sin_angle_to_span,
    span_operator_norm,
)
from .interpolation import (
    InterpolationProblem,
    NodeOverlapError,
    interpolation_dashboard,
    min_multiplier_norm,
    min_multiplier_norm_jets,
    pick_operator,
    separation_report,
)
from .constructions import (
    CounterexampleInstance,
    CounterexampleSpec,
    DyadicExampleSpec,
    counterexample_build,
    counterexample_grid,
    counterexample_verify,
    defect_sum_sup,
    dyadic_nodes,
    dyadic_report,
    mjn_asymptotic,
    mjn_exact,
    pair_assignment,
    rho_from_gaps,
)

__all__ = [
    "__version__",
    "BlaschkeProduct",
    "DeltaEstimate",
    "DiscGrid",
    "blaschke_factor",
    "check_disc_point",
    "blaschke_product_eval",
    "leave_one_out_delta",
    "pseudo_hyperbolic",
    "roots_of_unity",
    "GramResult",
    "KernelBasis",
    "KernelVector",
    "cross_gram",
    "gram_matrix",
    "kernel_inner",
    "kernel_inner_series",
    "hermitian_eigen",
    "psd_sqrt_inverse",
    "singular_values",
    "JordanSpec",
    "TaylorJet",
    "apply_function_jordan",
    "jordan_matrix",
    "matrix_kernel_coeffs",
    "minimal_blaschke",
    "model_space_basis",
    "suggest_truncation",
    "AngleResult",
    "BesselResult",
    "RieszBounds",
    "Subspace",
    "SubspaceSystem",
    "adjoint_restriction_lower_bound",
    "bessel_bound",
    "bessel_detail",
    "delta_angle_envelope",
    "dist_to_subspace",
    "joint_idempotent_norm",
    "line_system",
    "riesz_bounds",
    "sin_angle",
    "sin_angle_to_span",
    "span_operator_norm",
    "InterpolationProblem",
    "NodeOverlapError",
    "interpolation_dashboard",
    "min_multiplier_norm",
    "min_multiplier_norm_jets",
    "pick_operator",
    "separation_report",
    "CounterexampleInstance",
    "CounterexampleSpec",
    "DyadicExampleSpec",
    "counterexample_build",
    "counterexample_grid",
    "counterexample_verify",
    "defect_sum_sup",
    "dyadic_nodes",
    "dyadic_report",
    "mjn_asymptotic",
    "mjn_exact",
    "pair_assignment",
    "rho_from_gaps",
]
