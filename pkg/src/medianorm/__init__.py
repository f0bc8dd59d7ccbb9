"""Geometric medians under symmetric convex-body norms."""

from .bodies import (
    Body,
    BodyError,
    Ellipsoid,
    FrameSection,
    HPolytope,
    LinearImage,
    LpBall,
    SectionFrame,
    SubgradientSet,
    VPolytope,
    apply_linear,
    boundary_point,
    dual_gauge,
    frame_from_normal,
    gauge,
    norm_equivalence_constants,
    section,
    subdifferential,
)
from .ellipsoid import ShadowReport, mm_scan, parallelogram_defect, shadow_rank
from .geometry import AffineSpan, HullProjection, affine_span, project_to_hull, separating_hyperplane
from .intuition import (
    CheckOutcome,
    InconclusiveError,
    SearchConfig,
    Witness,
    check_affine,
    check_intuitive,
    construct_median_weights,
    replay_witness,
    search_witness,
)
from .median import (
    AffineSpanRegion,
    HullRegion,
    MedianResult,
    PlanePatch,
    PlaneRegion,
    SolveOptions,
    WeightedPoints,
    certified_lower_bound,
    objective,
    objective_subgradient,
    solve_constrained,
    solve_unconstrained,
    weiszfeld,
)
from .serialize import (
    body_from_json,
    body_to_json,
    instance_from_json,
    instance_to_json,
    result_to_json,
    witness_from_json,
    witness_to_json,
)
from .suites import SuiteReport, run_suite
from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"
