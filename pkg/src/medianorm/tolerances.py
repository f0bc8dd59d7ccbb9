"""Central tolerance configuration.

Every numeric threshold used by the library lives here so that tests and
library code reference a single source of truth.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # body construction / oracles
    pd_floor: float = 1e-12          # smallest eigenvalue of an ellipsoid matrix
    det_floor: float = 1e-9          # |det T| floor for linear images
    active_rel: float = 1e-9         # relative slack for active-facet detection
    zero_coord_rel: float = 1e-9     # relative slack for zero coordinates (l1 kinks)
    support_dot: float = 1e-9        # <g, p> = gauge(p) for subgradient generators
    dual_unit: float = 1e-9          # dual_gauge(g) <= 1 + dual_unit
    frame_ortho: float = 1e-12       # orthonormality of section frames
    boundary_gauge: float = 1e-12    # gauge of boundary_point output

    # hull geometry
    hull_gap: float = 1e-11          # Frank-Wolfe gap for nearest-point termination
    hull_coeff: float = 1e-12        # simplex-weight slack in hull projections
    hull_max_iter: int = 10_000
    span_cutoff: float = 1e-9        # relative singular-value cutoff for affine spans

    # weighted point sets
    weight_sum: float = 1e-12
    distinct_points: float = 1e-12

    # solvers
    solver_residual: float = 1e-7
    solver_max_iter: int = 200_000
    weiszfeld_move: float = 1e-10
    weiszfeld_max_iter: int = 100_000

    # verdicts and certification
    verdict_gap: float = 1e-6
    grid_cap: int = 10_000_000


DEFAULT = Tolerances()
