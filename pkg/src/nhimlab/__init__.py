"""Numerical experiments for maps in normal form near a normally hyperbolic
invariant manifold: structural validation, tangent-frame propagation with
inclination tracking, transversal-disk iteration, and a splitting integrator
for a pendulum-plus-rotors Hamiltonian whose return map fits the same frame.
"""

from .exceptions import (
    ConfigError,
    ContractError,
    DegenerateVectorError,
    DivergenceError,
    EmptyMeshError,
    EscapeError,
    ModelInconsistencyError,
    OutOfNeighborhoodError,
)
from .geometry import (
    ChartPoint,
    ChartTopology,
    Dimensions,
    TangentVector,
    manifold_distance,
    mat_row_sup_norm,
    tensor_row_sup_norm,
    vec_sup_norm,
)
from .lambdalemma import (
    AnnulusReport,
    C1Distance,
    DiskSpec,
    DominationReport,
    FindKResult,
    MeshOrbit,
    advance_mesh,
    annulus_experiment,
    c1_distance,
    find_K,
    make_default_disk,
    seed_mesh,
    verify_bound_domination,
)
from .models import (
    FlowState,
    HamiltonianSpec,
    contact_order,
    ham_vector_field,
    hamiltonian_energy,
    integrate,
    integrate_series,
    make_defective,
    make_linear,
    make_poly,
    make_twist_annulus,
    pendulum_local_coords,
    pendulum_local_inverse,
    poincare_map,
    symplectic_step,
)
from .normalform import (
    BoundSet,
    ConditionReport,
    MapSpec,
    apply_map,
    check_constants,
    estimate_bounds,
    jacobian,
    validate_conditions,
)
from .straighten import (
    GraphPair,
    conjugate_map,
    conjugated_radius,
    straighten_inverse,
    straighten_point,
    tangency_violation,
    unstraighten_map,
)
from .tangentflow import (
    InclinationBounds,
    InclinationRecord,
    JetState,
    StretchBound,
    ratio_identity_check,
    records_to_csv,
    sn_contraction_bound,
    stable_restricted_step,
    step_jet,
    stretch_lower_bound,
    theoretical_inclination_bounds,
    unit_frame,
)

__version__ = "0.1.0"

__all__ = [
    "AnnulusReport",
    "BoundSet",
    "C1Distance",
    "ChartPoint",
    "ChartTopology",
    "ConditionReport",
    "ConfigError",
    "ContractError",
    "DegenerateVectorError",
    "Dimensions",
    "DiskSpec",
    "DivergenceError",
    "DominationReport",
    "EmptyMeshError",
    "EscapeError",
    "FindKResult",
    "FlowState",
    "GraphPair",
    "HamiltonianSpec",
    "InclinationBounds",
    "InclinationRecord",
    "JetState",
    "MapSpec",
    "MeshOrbit",
    "ModelInconsistencyError",
    "OutOfNeighborhoodError",
    "TangentVector",
    "advance_mesh",
    "annulus_experiment",
    "apply_map",
    "c1_distance",
    "check_constants",
    "conjugate_map",
    "conjugated_radius",
    "contact_order",
    "estimate_bounds",
    "find_K",
    "ham_vector_field",
    "hamiltonian_energy",
    "integrate",
    "integrate_series",
    "jacobian",
    "make_default_disk",
    "make_defective",
    "make_linear",
    "make_poly",
    "make_twist_annulus",
    "manifold_distance",
    "mat_row_sup_norm",
    "pendulum_local_coords",
    "pendulum_local_inverse",
    "poincare_map",
    "ratio_identity_check",
    "records_to_csv",
    "seed_mesh",
    "sn_contraction_bound",
    "stable_restricted_step",
    "step_jet",
    "straighten_inverse",
    "straighten_point",
    "stretch_lower_bound",
    "symplectic_step",
    "tangency_violation",
    "tensor_row_sup_norm",
    "theoretical_inclination_bounds",
    "unit_frame",
    "unstraighten_map",
    "validate_conditions",
    "vec_sup_norm",
    "verify_bound_domination",
]
