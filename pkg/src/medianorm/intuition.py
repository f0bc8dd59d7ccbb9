"""Intuitiveness checks, certified counterexample search, and the planar
median-weight constructor.

A body is "intuitive" when a geometric median always meets the convex hull
of the data points. Violations are only ever reported with a certified gap:
a grid-plus-Lipschitz lower bound over the region must strictly exceed the
objective value at the escaped median.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bodies import Body, SubgradientSet
from .geometry import affine_span, project_to_hull, separating_hyperplane
from .median import (
    AffineSpanRegion,
    HullRegion,
    MedianError,
    PlanePatch,
    PlaneRegion,
    SolveOptions,
    WeightedPoints,
    certified_lower_bound,
    objective,
    plane_patch_radius,
    solve_constrained,
    solve_unconstrained,
)
from .tolerances import DEFAULT


class InconclusiveError(RuntimeError):
    """A solver failed to converge; the check is neither a pass nor a violation."""


@dataclass(frozen=True)
class Witness:
    """A certified intuitiveness violation."""

    body: Body
    wp: WeightedPoints
    escaped: np.ndarray          # the found median outside the region
    gap: float                   # certified_lower_bound(region) - F(escaped)
    separator: tuple             # (unit normal, margin) from the hull projection
    region: str                  # "hull" | "affine_span"
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CheckOutcome:
    verdict: str                 # intuitive_at_tol | violated
    gap: float                   # constrained minus unconstrained value
    certificate: Witness | None = None
    diagnostic: str | None = None


def _certify(body: Body, wp: WeightedPoints, region_kind: str, escaped: np.ndarray,
             f_escaped: float, node_budget: int = 2_000_000) -> float:
    """Certified gap over the region (may be <= 0 when certification fails)."""
    _, L = body.equivalence_constants()
    d = body.dim
    if region_kind == "hull":
        m = wp.size
        c = wp.points.mean(axis=0)
        rmax = float(np.linalg.norm(wp.points - c, axis=1).max())
        # pick h so the barycentric grid stays inside the node budget
        N = max(8, int((2 * node_budget) ** (1.0 / max(m - 1, 1))) - m) if m > 1 else 1
        h = m * rmax / (N * np.sqrt(d))
        lb = certified_lower_bound(body, wp, HullRegion(), h)
    else:
        span = affine_span(wp.points)
        if span.dim != 2:
            raise MedianError("affine certification implemented for planar triples")
        R = plane_patch_radius(body, wp, span.base)
        h = max(2.0 * R / (np.sqrt(node_budget) - 1), 1e-6)
        lb = certified_lower_bound(body, wp, PlanePatch(span.base, span.basis, R), h)
    return lb - f_escaped


def _separator(escaped: np.ndarray, wp: WeightedPoints):
    try:
        return separating_hyperplane(escaped, wp.points)
    except ValueError:
        return (np.zeros(wp.dim), 0.0)


def _checked_solves(body: Body, wp: WeightedPoints, region, opts: SolveOptions):
    free = solve_unconstrained(body, wp, opts)
    if free.status == "iteration_cap":
        raise InconclusiveError("unconstrained solver hit the iteration cap")
    con = solve_constrained(body, wp, region, opts)
    if con.status == "iteration_cap":
        raise InconclusiveError("constrained solver hit the iteration cap")
    return free, con


def check_intuitive(body: Body, wp: WeightedPoints, tol: float = DEFAULT.verdict_gap,
                    opts: SolveOptions = SolveOptions()) -> CheckOutcome:
    """Does some geometric median meet conv(P)? Decided by value comparison."""
    free, con = _checked_solves(body, wp, HullRegion(), opts)
    gap = con.value - free.value
    if gap <= tol:
        return CheckOutcome("intuitive_at_tol", gap)
    cert_gap = _certify(body, wp, "hull", free.minimizer, free.value)
    if cert_gap > 0.0:
        w = Witness(body=body, wp=wp, escaped=free.minimizer, gap=cert_gap,
                    separator=_separator(free.minimizer, wp), region="hull")
        return CheckOutcome("violated", gap, certificate=w)
    return CheckOutcome("intuitive_at_tol", gap,
                        diagnostic="uncertified gap exceeded tol but certification failed")


def check_affine(body: Body, wp: WeightedPoints, tol: float = DEFAULT.verdict_gap,
                 opts: SolveOptions = SolveOptions()) -> CheckOutcome:
    """The stronger variant: does some median meet the affine span of P?"""
    span = affine_span(wp.points)
    if span.dim >= body.dim:
        free = solve_unconstrained(body, wp, opts)
        return CheckOutcome("intuitive_at_tol", 0.0)
    free, con = _checked_solves(body, wp, AffineSpanRegion(), opts)
    gap = con.value - free.value
    if gap <= tol:
        return CheckOutcome("intuitive_at_tol", gap)
    if span.dim != 2:
        return CheckOutcome("intuitive_at_tol", gap,
                            diagnostic="certification implemented only for planar spans")
    cert_gap = _certify(body, wp, "affine_span", free.minimizer, free.value)
    if cert_gap > 0.0:
        w = Witness(body=body, wp=wp, escaped=free.minimizer, gap=cert_gap,
                    separator=_separator(free.minimizer, wp), region="affine_span")
        return CheckOutcome("violated", gap, certificate=w)
    return CheckOutcome("intuitive_at_tol", gap,
                        diagnostic="uncertified gap exceeded tol but certification failed")


# ---------------------------------------------------------------------------
# randomized witness search


@dataclass(frozen=True)
class SearchConfig:
    n_points: int = 3
    trials: int = 2000
    seed: int = 0
    region: str = "hull"         # "hull" | "affine_span"
    refine_steps: int = 3
    top_k: int = 5


def _sample_instance(rng: np.ndarray, n_points: int, dim: int, coplanar: bool):
    while True:
        if coplanar and dim == 3:
            # random plane through a random base point; points inside the unit ball
            normal = rng.standard_normal(3)
            normal /= np.linalg.norm(normal)
            b1 = np.cross(normal, [1.0, 0.0, 0.0])
            if np.linalg.norm(b1) < 1e-6:
                b1 = np.cross(normal, [0.0, 1.0, 0.0])
            b1 /= np.linalg.norm(b1)
            b2 = np.cross(normal, b1)
            base = 0.3 * rng.standard_normal(3)
            coords = rng.uniform(-1.0, 1.0, size=(n_points, 2))
            pts = base + coords @ np.stack([b1, b2])
        else:
            pts = rng.uniform(-1.0, 1.0, size=(n_points, dim))
        if min(np.linalg.norm(pts[i] - pts[j]) for i in range(n_points)
               for j in range(i + 1, n_points)) < 1e-3:
            continue
        w = rng.dirichlet(np.ones(n_points))
        if rng.random() < 0.15:
            i = rng.integers(n_points)
            w[i] = 1e-3
            w /= w.sum()
        if w.min() < 1e-6:
            continue
        return pts, w


def _uncertified_gap(body: Body, wp: WeightedPoints, region, opts: SolveOptions):
    free = solve_unconstrained(body, wp, opts)
    con = solve_constrained(body, wp, region, opts)
    return con.value - free.value, free


def search_witness(body: Body, cfg: SearchConfig = SearchConfig()) -> Witness | None:
    """Randomized restarts with local refinement and final certification."""
    if body.dim != 3:
        raise MedianError("witness search targets 3-dimensional bodies")
    region = HullRegion() if cfg.region == "hull" else AffineSpanRegion()
    coplanar = cfg.region == "affine_span"
    fast = SolveOptions(tol=1e-5, n_starts=2, seed=cfg.seed)

    cands = []  # (gap, trial, pts, w)
    for trial in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, trial])
        pts, w = _sample_instance(rng, cfg.n_points, 3, coplanar)
        try:
            wp = WeightedPoints(pts, w)
            gap, _ = _uncertified_gap(body, wp, region, fast)
        except (MedianError, Exception):
            continue
        if gap > 1e-5:
            cands.append((gap, trial, pts, w))
        if len(cands) >= cfg.top_k and gap > 0.05:
            break
    if not cands:
        return None
    cands.sort(key=lambda c: -c[0])

    best_gap, best_trial, best_pts, best_w = cands[0]
    refine_len = 0
    for gap0, trial, pts, w in cands[: cfg.top_k]:
        pts, w, gap = _refine(body, pts, w, region, fast, cfg.refine_steps, cfg.seed)
        refine_len += 1
        if gap > best_gap:
            best_gap, best_trial, best_pts, best_w = gap, trial, pts, w

    wp = WeightedPoints(best_pts, best_w)
    precise = SolveOptions(tol=1e-8, n_starts=3, seed=cfg.seed)
    free = solve_unconstrained(body, wp, precise)
    cert_gap = _certify(body, wp, "hull" if cfg.region == "hull" else "affine_span",
                        free.minimizer, free.value)
    if cert_gap <= 0.0:
        return None
    return Witness(body=body, wp=wp, escaped=free.minimizer, gap=cert_gap,
                   separator=_separator(free.minimizer, wp),
                   region=cfg.region,
                   provenance={"seed": cfg.seed, "trial": int(best_trial),
                               "refined": refine_len, "uncertified_gap": float(best_gap)})


def _refine(body, pts, w, region, opts, steps, seed):
    """Coordinate-wise hill climbing on points and weights, maximizing the gap."""
    coplanar = isinstance(region, AffineSpanRegion)
    span = affine_span(pts) if coplanar else None

    def score(p, ww):
        try:
            return _uncertified_gap(body, WeightedPoints(p, ww), region, opts)[0]
        except Exception:
            return -np.inf

    best = score(pts, w)
    step = 0.15
    for _ in range(steps):
        for i in range(len(pts)):
            if coplanar:
                dirs = [span.basis[0], -span.basis[0], span.basis[1], -span.basis[1]]
            else:
                dirs = [e * s for e in np.eye(3) for s in (1.0, -1.0)]
            for d in dirs:
                cand = pts.copy()
                cand[i] = cand[i] + step * d
                s = score(cand, w)
                if s > best:
                    best, pts = s, cand
        for i in range(len(w)):
            for s_ in (1.25, 0.8):
                cw = w.copy()
                cw[i] *= s_
                cw /= cw.sum()
                if cw.min() < 1e-6:
                    continue
                sc = score(pts, cw)
                if sc > best:
                    best, w = sc, cw
        step *= 0.5
    return pts, w, best


def replay_witness(w: Witness) -> bool:
    """Re-certify a stored witness from its fields."""
    f_escaped = float(objective(w.body, w.wp, w.escaped))
    gap = _certify(w.body, w.wp, w.region, w.escaped, f_escaped)
    return gap > 0.0


# ---------------------------------------------------------------------------
# planar median-weight constructor


def construct_median_weights(planar_body: Body, x, y, z,
                             gx: "int | np.ndarray | None" = None,
                             gy: "int | np.ndarray | None" = None,
                             return_generators: bool = False):
    """Weights on a subset of {±x, ±y, z} making 0 a geometric median.

    x, y, z must be boundary points of the 2-dimensional body; the chosen
    subgradient generators at x and y must be linearly independent. The
    construction decomposes a generator at z over those at x and y and
    places each coefficient's magnitude on the point or its negation so the
    weighted generator sum telescopes to zero.

    ``gx`` / ``gy`` select the generator at x / y: an index into the extreme
    generator list, an explicit subgradient vector, or None for the
    lexicographically smallest extreme generator.
    """
    if planar_body.dim != 2:
        raise MedianError("constructor requires a 2-dimensional body")
    pts = [np.asarray(v, float) for v in (x, y, z)]
    for v in pts:
        if abs(float(planar_body.gauge(v)) - 1.0) > DEFAULT.support_dot:
            raise MedianError("x, y, z must lie on the body boundary")
    x, y, z = pts

    def pick(p, choice):
        s = planar_body.subdifferential(p)
        gens = s.generators
        if choice is None:
            order = np.lexsort((gens[:, 1], gens[:, 0]))
            return gens[order[0]]
        if np.ndim(choice) == 0:
            return gens[int(choice)]
        g = np.asarray(choice, float)
        if not s.contains(g, tol=1e-8):
            raise MedianError("explicit generator is not in the subdifferential")
        return g

    gx = pick(x, gx)
    gy = pick(y, gy)
    gz = pick(z, None)
    M = np.stack([gx, gy], axis=1)
    det = float(np.linalg.det(M))
    if abs(det) <= 1e-9:
        raise MedianError(f"generators at x and y are dependent (det={det:g})")
    a = np.linalg.solve(M, gz)  # gz = a[0] gx + a[1] gy

    support = [(z, 1.0, gz)]
    for coeff, p, g in zip(a, (x, y), (gx, gy)):
        if coeff > 0.0:
            support.append((-p, float(coeff), -g))   # generator at -p is -g_p
        elif coeff < 0.0:
            support.append((p, float(-coeff), g))
    # merge coincident support points (z can equal ±x or ±y); a weighted
    # average of subgradients at the same point is again a subgradient
    merged: list[list] = []
    for p, wgt, g in support:
        for entry in merged:
            if np.linalg.norm(entry[0] - p) <= 1e-12:
                entry[2] = (entry[1] * entry[2] + wgt * g) / (entry[1] + wgt)
                entry[1] += wgt
                break
        else:
            merged.append([p, wgt, g])
    points = np.array([e[0] for e in merged])
    weights = np.array([e[1] for e in merged])
    gens = np.array([e[2] for e in merged])
    wp = WeightedPoints(points, weights / weights.sum())
    if return_generators:
        return wp, gens
    return wp
