"""Local holomorphic dynamics and obstruction certificates for weighted
composition operators h -> u * (h o f) on spaces of holomorphic functions."""

from .errors import (
    BaseMismatchError,
    ConstructionError,
    HoloError,
    InsufficientDegreeError,
    OrbitError,
    OrderUndeterminedError,
    PreconditionError,
    RangeError,
    SchemaError,
    SelfCheckError,
    StructureError,
    TermOverflowError,
)
from .jets import (
    GradedOperatorMatrix,
    Jet,
    JetMap,
    eigenvalue_law,
    graded_basis,
    graded_eigenvalues,
    graded_matrix_bruteforce,
    graded_matrix_formula,
    jet_compose,
    jet_multiply,
    jetmap_compose,
    multi_indices,
    multiset_close,
    weighted_pullback,
)
from .dynamics import (
    ALL_POINTS,
    AllPoints,
    PeriodicOrbit,
    PolyFunc,
    PolyMap,
    SearchConfig,
    classify,
    cocycle_poly,
    iterate,
    iterate_point,
    make_orbit,
    multipliers,
    periodic_points_1d,
    periodic_points_2d,
    weight_cocycle,
)
from .rigidity import (
    AffineVerdict,
    DualityFlags,
    GrowthDiagnostic,
    ObstructionCertificate,
    affine_verdict_1d,
    certify_bounded,
    certify_compact,
    certify_cyclic,
    certify_hypercyclic,
    certify_supercyclic,
    duality_check,
    growth_diagnostic_1d,
)
from .fock import (
    OperatorMatrix,
    TruncatedSpaceModel,
    assumption_witness,
    block_growth_norms,
    coefficient_matrix,
    operator_matrix,
    operator_matrix_from_polys,
    restriction_norm_profile,
    truncated_norm,
)
from .sphere import (
    MaxSearchConfig,
    RepellingConstruction,
    SphereMaxProfile,
    construct_repelling,
    hadamard_profile,
    sphere_max,
    su_map_between,
)
from .henon import (
    GeneralizedHenon,
    HenonComposition,
    fixed_points,
    saddle_certificate,
    to_polymap,
)

__version__ = "0.1.0"
