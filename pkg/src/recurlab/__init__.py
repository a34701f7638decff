"""Numerical laboratory for recurrence of operator families on weighted grids.

The package discretizes translation, composition and diagonal operator
families on weighted function spaces, certifies the admissibility of each
weight/flow pairing, predicts return behaviour with weight-level criteria,
measures actual returns with detectors, and cross-validates the two views.
"""

from .errors import (
    ConfigValidationError,
    ConstructionStalledError,
    CriterionUnavailableError,
    InvalidRotationError,
    InvalidWeightError,
    MatrixSizeError,
    NumericError,
    OracleUnavailableError,
    PreconditionError,
    RecurlabError,
    SemiflowDomainError,
    SpaceMismatchError,
)
from .spaces import (
    DomainKind,
    DomainSpec,
    GridFunction,
    WeightFunction,
    WeightedGridSpace,
    distance,
    norm,
    sample_values,
)
from .semiflows import (
    Semiflow,
    affine_flow,
    dilation_flow,
    semiflow_selfcheck,
    translation_flow,
)
from .admissibility import (
    AdmissibilityCertificate,
    CertificateKind,
    check_c0_semiflow_admissible,
    check_condition_d,
    check_lp_semiflow_admissible,
    check_weight_admissible,
)
from .operators import (
    CompositionFamily,
    DiagonalFamily,
    DirectSumFamily,
    DiscretizedOperator,
    OperatorFamily,
    PairFunction,
    ProductSpace,
    RotatedFamily,
    TranslationFamily,
    coordinate_space,
    direct_sum,
    rotate_family,
    time_discretize,
)
from .matrices import (
    MATRIX_CAP,
    OperatorMatrix,
    assemble_matrix,
    operator_norm_estimate,
    spectral_radius_estimate,
)
from .recurrence import (
    GdeltaReport,
    NestedBallResult,
    NestedBallStage,
    RecurrenceReport,
    RigidityReport,
    TransitivityWitness,
    Verdict,
    direct_scan,
    dyadic_rational_times,
    gdelta_membership,
    nested_ball_construct,
    oracle_scan,
    pullback_witness_oracle,
    residual,
    rigidity_scan,
    spans_dyadic_scales,
    uniform_rigidity_scan,
)
from .criteria import (
    ConsistencyRecord,
    Criterion,
    CriterionReport,
    MassCurve,
    c0_semiflow_criterion,
    cross_validate,
    discrete_spectrum_criterion,
    dyadic_time_ladder,
    liminf_criterion_halfline,
    line_joint_criterion,
    lp_mass_curve,
    lp_semiflow_criterion,
    pointwise_decay_criterion_line,
    weighted_jacobian_criterion_c0,
    weighted_jacobian_criterion_lp,
)

__version__ = "0.1.0"
