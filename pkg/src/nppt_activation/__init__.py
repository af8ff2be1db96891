"""Activation of NPPT distillation by symmetric bound entangled states."""

from .activation import (
    ActivationReport,
    BellVariantReport,
    DegenerateFilterError,
    PlaneCoefficients,
    bell_basis_variant,
    fidelity_bruteforce,
    fidelity_reduced,
    plane_coefficients,
    plane_third_point,
)
from .geometry import (
    AlphaInterval,
    Classification,
    Membership,
    Polytope,
    Region,
    activating_alpha_interval,
    activation_margin,
    classify,
    intersection_vertices,
    is_universal_activator,
    membership,
    ppt_extreme_points,
    separable_polytope,
    tau_points,
)
from .states import (
    IsotropicParam,
    SymmetricSpec,
    WernerParam,
    coords_of,
    isotropic_matrix,
    phi_psi_product,
    symmetric_matrix,
    symmetric_projectors,
    thresholds,
    twirl_to_werner,
    werner_matrix,
)
from .tensor import (
    LabeledOperator,
    Layout,
    PureState,
    flip_operator,
    hermitian_spectrum,
    kron,
    max_entangled_projector,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    sample_states,
)
from .witness import (
    Certificate,
    Rank2Result,
    WitnessReport,
    certify_1distillable,
    rank2_min,
    verify_witness_positivity,
    witness_operator,
)

__version__ = "0.1.0"
