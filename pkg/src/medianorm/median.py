"""Weighted Fermat-Weber objectives and solvers under convex-body gauges.

The solvers certify optimality through subgradient residuals: the residual
is the Euclidean norm of the min-norm element of the (tolerance-active)
subdifferential of the objective, computed with a Wolfe min-norm-point
pass over the Minkowski sum of the per-point subgradient sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .bodies import Body, SectionFrame, frame_from_normal
from .geometry import affine_span, project_to_hull, min_norm_point
from .tolerances import DEFAULT, Tolerances


class MedianError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedPoints:
    """A finite set of distinct points with a probability weight vector."""

    points: np.ndarray   # (m, dim)
    weights: np.ndarray  # (m,)

    def __post_init__(self):
        pts = np.asarray(self.points, float)
        w = np.asarray(self.weights, float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        if pts.ndim != 2 or len(pts) < 1:
            raise MedianError("points must be a nonempty (m, dim) array")
        if w.shape != (len(pts),):
            raise MedianError("weights must match points")
        if (w < 0).any():
            raise MedianError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > DEFAULT.weight_sum:
            raise MedianError("weights must sum to 1")
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.linalg.norm(pts[i] - pts[j]) <= DEFAULT.distinct_points:
                    raise MedianError("points must be pairwise distinct")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return len(self.points)

    def centroid(self) -> np.ndarray:
        return self.weights @ self.points

    def radius(self) -> float:
        c = self.points.mean(axis=0)
        return float(np.linalg.norm(self.points - c, axis=1).max())


@dataclass(frozen=True)
class MedianResult:
    minimizer: np.ndarray
    value: float
    residual: float
    iterations: int
    status: str  # converged | iteration_cap | stalled


@dataclass(frozen=True)
class SolveOptions:
    tol: float = DEFAULT.solver_residual
    max_iter: int = DEFAULT.solver_max_iter
    n_starts: int = 5
    seed: int = 0


# region markers for constrained solves
@dataclass(frozen=True)
class HullRegion:
    pass


@dataclass(frozen=True)
class AffineSpanRegion:
    pass


@dataclass(frozen=True)
class PlaneRegion:
    """Affine region base + row-span(basis); basis rows orthonormal."""

    base: np.ndarray
    basis: np.ndarray  # (k, dim), k in {0, 1, 2}


@dataclass(frozen=True)
class PlanePatch(PlaneRegion):
    radius: float = 0.0


# ---------------------------------------------------------------------------
# objective and subgradients


def objective(body: Body, wp: WeightedPoints, xi) -> np.ndarray:
    """F(xi) = sum_p W(p) gauge(xi - p); xi may be batched (..., dim)."""
    xi = np.asarray(xi, float)
    diffs = xi[..., None, :] - wp.points
    return body.gauge(diffs) @ wp.weights


def objective_subgradient(body: Body, wp: WeightedPoints, xi, selector: str = "average") -> np.ndarray:
    """One valid subgradient of F at xi (xi must avoid the data points)."""
    xi = np.asarray(xi, float)
    g = np.zeros(wp.dim)
    for p, w in zip(wp.points, wp.weights):
        r = xi - p
        if np.linalg.norm(r) <= DEFAULT.distinct_points:
            raise MedianError("subgradient undefined at a data point; use the solver's dual test")
        s = body.subdifferential(r)
        if s.kind == "smooth" or selector == "first":
            g += w * s.generators[0]
        elif selector == "average":
            g += w * s.average()
        else:
            raise MedianError(f"unknown selector {selector!r}")
    return g


def _term_sets(body: Body, wp: WeightedPoints, xi: np.ndarray, active_rel: float,
               point_tol: float = 1e-12) -> list[np.ndarray] | None:
    """Weighted per-point subgradient generator sets at xi.

    At a data point the gauge term contributes its whole dual ball; that is
    representable only for polytopal bodies (vertex list), so None is
    returned when xi sits on a data point of a smooth body.
    """
    terms = []
    for p, w in zip(wp.points, wp.weights):
        r = xi - p
        if np.linalg.norm(r) <= point_tol:
            verts = body.dual_ball_vertices()
            if verts is None:
                return None
            terms.append(w * verts)
        else:
            terms.append(w * body.subdifferential(r, active_rel).generators)
    return terms


def _minkowski_min_norm(terms: list[np.ndarray], dim: int) -> np.ndarray:
    """Min-Euclidean-norm element of the Minkowski sum of generator hulls."""
    if all(len(t) == 1 for t in terms):
        return sum(t[0] for t in terms)

    def linmin(d):
        idx = tuple(int(np.argmin(t @ d)) for t in terms)
        return sum(t[i] for t, i in zip(terms, idx)), idx

    x, _, _ = min_norm_point(linmin, dim, gap_tol=1e-14, max_iter=2000)
    return x


def residual_at(body: Body, wp: WeightedPoints, xi, active_rel: float = 1e-7) -> float:
    """Euclidean distance from 0 to the tolerance-active subdifferential of F."""
    xi = np.asarray(xi, float)
    terms = _term_sets(body, wp, xi, active_rel)
    if terms is None:
        # smooth body at a data point p: 0 in dF(xi) iff dual_gauge(G) <= W(p)
        i = int(np.argmin(np.linalg.norm(wp.points - xi, axis=1)))
        G = np.zeros(wp.dim)
        for j, (p, w) in enumerate(zip(wp.points, wp.weights)):
            if j != i:
                G += w * body.subdifferential(xi - p).generators[0]
        excess = float(body.dual_gauge(G)) - wp.weights[i]
        if excess <= 0.0:
            return 0.0
        lo, _ = body.equivalence_constants()
        # dual norm of the dual ball excess, converted conservatively
        return excess / max(lo, 1e-12)
    return float(np.linalg.norm(_minkowski_min_norm(terms, wp.dim)))


# ---------------------------------------------------------------------------
# one-dimensional exact line search


def _golden(f, a: float, b: float, iters: int = 90):
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
        if b - a < 1e-16 * max(1.0, abs(a) + abs(b)):
            break
    return (c, fc) if fc < fd else (d, fd)


# ---------------------------------------------------------------------------
# unconstrained solver


def _data_point_test(body: Body, wp: WeightedPoints, idx: int, tol: float) -> float | None:
    """Residual of the optimality test at data point idx, or None if it fails."""
    p = wp.points[idx]
    terms = []
    smooth_sum = np.zeros(wp.dim)
    all_smooth = True
    for j, (q, w) in enumerate(zip(wp.points, wp.weights)):
        if j == idx:
            continue
        s = body.subdifferential(p - q)
        terms.append(w * s.generators)
        if s.kind == "smooth":
            smooth_sum += w * s.generators[0]
        else:
            all_smooth = False
    verts = body.dual_ball_vertices()
    if all_smooth and verts is None:
        excess = float(body.dual_gauge(smooth_sum)) - wp.weights[idx]
        return 0.0 if excess <= DEFAULT.dual_unit else None
    if verts is None:
        return None
    terms.append(wp.weights[idx] * verts)
    r = float(np.linalg.norm(_minkowski_min_norm(terms, wp.dim)))
    return r if r <= tol else None


def _smooth_value_grad(body: Body, wp: WeightedPoints, x: np.ndarray):
    val = 0.0
    g = np.zeros(wp.dim)
    for p, w in zip(wp.points, wp.weights):
        r = x - p
        n = float(body.gauge(r))
        val += w * n
        if n > 1e-13:
            g += w * body.subdifferential(r).generators[0]
        # else: 0 is a valid subgradient of the gauge at its kink
    return val, g


def _descend_nonsmooth(body: Body, wp: WeightedPoints, x0: np.ndarray, tol: float,
                       max_iter: int, radius: float):
    """Steepest descent with min-norm subgradients and exact line search."""
    x = np.asarray(x0, float).copy()
    f = lambda y: float(objective(body, wp, y))
    fx = f(x)
    step_cap = max(radius, 1e-6)
    iters = 0
    for it in range(max_iter):
        iters = it + 1
        terms = _term_sets(body, wp, x, active_rel=1e-7)
        if terms is None:
            break  # smooth body sitting on a data point; handled by caller
        r = _minkowski_min_norm(terms, wp.dim)
        rn = float(np.linalg.norm(r))
        if rn <= tol:
            return x, fx, rn, iters, "converged"
        d = -r / rn
        t, ft = _golden(lambda t: f(x + t * d), 0.0, step_cap)
        # expand the bracket if the minimum sits at the far end
        while t > 0.9 * step_cap and step_cap < 1e6 * max(radius, 1.0):
            step_cap *= 4.0
            t, ft = _golden(lambda t: f(x + t * d), 0.0, step_cap)
        if ft >= fx - 1e-15 * max(1.0, abs(fx)):
            rn_final = float(np.linalg.norm(_minkowski_min_norm(terms, wp.dim)))
            return x, fx, rn_final, iters, "stalled"
        x = x + t * d
        fx = ft
        step_cap = max(4.0 * t, 1e-9 * max(radius, 1.0))
    return x, fx, residual_at(body, wp, x), iters, "iteration_cap"


def _descend_smooth(body: Body, wp: WeightedPoints, x0: np.ndarray, tol: float, max_iter: int):
    res = scipy.optimize.minimize(
        lambda x: _smooth_value_grad(body, wp, x),
        np.asarray(x0, float),
        jac=True,
        method="BFGS",
        options={"gtol": tol * 0.1, "maxiter": min(max_iter, 2000)},
    )
    x = res.x
    _, g = _smooth_value_grad(body, wp, x)
    rn = float(np.linalg.norm(g))
    status = "converged" if rn <= tol else "stalled"
    return x, float(objective(body, wp, x)), rn, int(res.nit), status


def solve_unconstrained(body: Body, wp: WeightedPoints, opts: SolveOptions = SolveOptions()) -> MedianResult:
    if wp.dim != body.dim:
        raise MedianError("dimension mismatch")
    if wp.size == 1:
        return MedianResult(wp.points[0].copy(), 0.0, 0.0, 0, "converged")

    data_vals = objective(body, wp, wp.points)
    best_idx = int(np.argmin(data_vals))
    # dual optimality test at the best data points
    order = np.argsort(data_vals)
    for idx in order[: min(4, wp.size)]:
        r = _data_point_test(body, wp, int(idx), opts.tol)
        if r is not None:
            return MedianResult(wp.points[idx].copy(), float(data_vals[idx]), r, 0, "converged")

    radius = max(wp.radius(), 1e-9)
    rng = np.random.default_rng(opts.seed)
    starts = [wp.centroid()]
    for _ in range(max(0, opts.n_starts - 1)):
        starts.append(wp.centroid() + 0.3 * radius * rng.standard_normal(wp.dim))

    best = None
    total_iters = 0
    for x0 in starts:
        if body.smooth:
            out = _descend_smooth(body, wp, x0, opts.tol, opts.max_iter)
            if out[4] != "converged":
                x1, f1, r1, it1, st1 = _descend_nonsmooth(body, wp, out[0], opts.tol, 500, radius)
                if f1 <= out[1]:
                    out = (x1, f1, r1, out[3] + it1, st1)
        else:
            out = _descend_nonsmooth(body, wp, x0, opts.tol, min(opts.max_iter, 2000), radius)
        total_iters += out[3]
        if best is None or out[1] < best[1]:
            best = out

    x, fx, rn, _, status = best
    # a data point may still win on value (its dual test can fail only numerically)
    if data_vals[best_idx] < fx:
        r = _data_point_test(body, wp, best_idx, opts.tol * 10)
        return MedianResult(wp.points[best_idx].copy(), float(data_vals[best_idx]),
                            r if r is not None else opts.tol * 10, total_iters,
                            "converged" if r is not None else "stalled")
    return MedianResult(x, fx, rn, total_iters, status)


# ---------------------------------------------------------------------------
# constrained solver


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u - css / (np.arange(len(v)) + 1) > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _reduce_to_plane(body: Body, wp: WeightedPoints, base: np.ndarray, basis: np.ndarray):
    """Reduced instance for points lying in base + span(basis)."""
    offplane = wp.points - base - (wp.points - base) @ basis.T @ basis
    if np.abs(offplane).max() > 1e-9 * (1.0 + wp.radius()):
        raise MedianError("plane-constrained solves require coplanar data points")
    k = basis.shape[0]
    if k == 2 and body.dim == 3:
        u = np.cross(basis[0], basis[1])
        sec = body.section(SectionFrame(u=u / np.linalg.norm(u), v1=basis[0], v2=basis[1]))
        coords = (wp.points - base) @ basis.T
        return sec, coords
    raise MedianError("unsupported plane reduction")


def solve_constrained(body: Body, wp: WeightedPoints, region, opts: SolveOptions = SolveOptions()) -> MedianResult:
    if isinstance(region, AffineSpanRegion):
        span = affine_span(wp.points)
        region = PlaneRegion(base=span.base, basis=span.basis)

    if isinstance(region, PlaneRegion):
        k = region.basis.shape[0]
        if k == 0:
            return MedianResult(region.base.copy(), float(objective(body, wp, region.base)), 0.0, 0, "converged")
        if k == 1:
            v = region.basis[0]
            ts = (wp.points - region.base) @ v
            gv = float(body.gauge(v))
            order = np.argsort(ts)
            csum = np.cumsum(wp.weights[order])
            j = int(np.searchsorted(csum, 0.5))
            t_star = ts[order][j]
            xi = region.base + t_star * v
            return MedianResult(xi, float(objective(body, wp, xi)), 0.0, 0, "converged")
        if k == body.dim:
            return solve_unconstrained(body, wp, opts)
        sec, coords = _reduce_to_plane(body, wp, region.base, region.basis)
        wp2 = WeightedPoints(coords, wp.weights)
        r2 = solve_unconstrained(sec, wp2, opts)
        xi = region.base + r2.minimizer @ region.basis
        return MedianResult(xi, float(objective(body, wp, xi)), r2.residual, r2.iterations, r2.status)

    if not isinstance(region, HullRegion):
        raise MedianError(f"unknown region {region!r}")

    if wp.size == 1:
        return MedianResult(wp.points[0].copy(), 0.0, 0.0, 0, "converged")

    free = solve_unconstrained(body, wp, opts)
    proj = project_to_hull(free.minimizer, wp.points)
    if proj.distance <= 1e-9:
        return MedianResult(proj.nearest, float(objective(body, wp, proj.nearest)),
                            free.residual, free.iterations, free.status)

    # optimize over simplex weights
    P = wp.points
    m = wp.size
    fstar = free.value

    def G(lam):
        return float(objective(body, wp, lam @ P))

    def subgrad_lam(lam):
        xi = lam @ P
        terms = _term_sets(body, wp, xi, active_rel=1e-9)
        if terms is None:
            g_xi = np.zeros(wp.dim)
            for p, w in zip(wp.points, wp.weights):
                r = xi - p
                if np.linalg.norm(r) > 1e-12:
                    g_xi += w * body.subdifferential(r).generators[0]
        else:
            g_xi = sum(t.mean(axis=0) for t in terms)
        return P @ g_xi

    # cheap candidate sweep: vertices, centroid, random barycentric samples
    rng = np.random.default_rng(opts.seed)
    cands = np.vstack([np.eye(m), np.full((1, m), 1.0 / m), rng.dirichlet(np.ones(m), size=64)])
    cand_vals = objective(body, wp, cands @ P)
    i0 = int(np.argmin(cand_vals))
    best_lam, best_val = cands[i0].copy(), float(cand_vals[i0])
    iters = 0

    # derivative-free pass in simplex coordinates
    res = scipy.optimize.minimize(
        lambda v: G(_project_simplex(v)), best_lam, method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 150 * m})
    iters += int(res.nit)
    cand = _project_simplex(res.x)
    if G(cand) < best_val:
        best_val, best_lam = G(cand), cand

    # precision pass: Polyak subgradient steps toward the unconstrained
    # value (a valid lower bound on the constrained minimum), then re-polish
    if opts.tol <= 1e-6 and best_val - fstar > opts.tol * 0.5:
        lam = best_lam.copy()
        for _ in range(1000):
            iters += 1
            val = G(lam)
            if val < best_val:
                best_val, best_lam = val, lam.copy()
            gap = val - fstar
            if gap <= opts.tol * 0.5:
                break
            g_lam = subgrad_lam(lam)
            gn2 = float(g_lam @ g_lam)
            if gn2 <= 1e-30:
                break
            lam = _project_simplex(lam - max(gap, 1e-12) / gn2 * g_lam)
        res = scipy.optimize.minimize(
            lambda v: G(_project_simplex(v)), best_lam, method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-13, "maxiter": 300 * m})
        iters += int(res.nit)
        cand = _project_simplex(res.x)
        if G(cand) < best_val:
            best_val, best_lam = G(cand), cand

    xi = best_lam @ P
    # projected-gradient-mapping residual in the ambient space
    try:
        g_xi = objective_subgradient(body, wp, xi)
    except MedianError:
        g_xi = np.zeros(wp.dim)
    eta = 1e-7
    lam_next = _project_simplex(best_lam - eta * (P @ g_xi))
    res_norm = float(np.linalg.norm((lam_next @ P - xi))) / eta
    status = "converged" if (best_val - fstar <= opts.tol or res_norm <= opts.tol * max(1.0, np.abs(P).max())) else "stalled"
    return MedianResult(xi, best_val, res_norm, iters, status)


# ---------------------------------------------------------------------------
# certified lower bounds


def _simplex_grid(N: int, m: int) -> np.ndarray:
    """All nonnegative integer m-tuples summing to N."""
    if m == 1:
        return np.array([[N]], dtype=np.int64)
    blocks = []
    for first in range(N + 1):
        rest = _simplex_grid(N - first, m - 1)
        blocks.append(np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def _grid_min(body: Body, wp: WeightedPoints, nodes: np.ndarray, chunk: int = 200_000) -> float:
    best = np.inf
    for i in range(0, len(nodes), chunk):
        vals = objective(body, wp, nodes[i:i + chunk])
        best = min(best, float(vals.min()))
    return best


def certified_lower_bound(body: Body, wp: WeightedPoints, region, h: float,
                          tol: Tolerances = DEFAULT) -> float:
    """A guaranteed lower bound for min F over the region.

    Grid of Euclidean mesh <= h * sqrt(dim) over the region, minus the
    Lipschitz slack L * (covering radius), L the upper norm-equivalence
    constant of the body.
    """
    _, L = body.equivalence_constants()
    d = body.dim
    slack_cap = L * h * np.sqrt(d)

    if isinstance(region, HullRegion):
        P = wp.points
        m = len(P)
        c = P.mean(axis=0)
        rmax = float(np.linalg.norm(P - c, axis=1).max())
        if rmax == 0.0 or m == 1:
            return float(objective(body, wp, P[0]))
        t = h * np.sqrt(d) / (m * rmax)
        N = max(1, int(np.ceil(1.0 / t)))
        from math import comb
        if comb(N + m - 1, m - 1) > tol.grid_cap:
            raise MedianError(f"hull grid for h={h:g} exceeds the node cap; use a larger h")
        lam = _simplex_grid(N, m).astype(float) / N
        nodes = lam @ P
        cover = L * min(h * np.sqrt(d), m * (1.0 / N) * rmax)
        return _grid_min(body, wp, nodes) - cover

    if isinstance(region, PlanePatch):
        base, B, R = region.base, region.basis, region.radius
        if B.shape[0] != 2:
            raise MedianError("plane patches must be 2-dimensional")
        n = int(np.ceil(2.0 * R / h)) + 1
        if n * n > tol.grid_cap:
            raise MedianError(f"plane grid for h={h:g} exceeds the node cap; use a larger h")
        s = np.linspace(-R, R, n)
        S, T = np.meshgrid(s, s)
        coords = np.stack([S.ravel(), T.ravel()], axis=-1)
        nodes = base + coords @ B
        step = s[1] - s[0]
        cover = min(slack_cap, L * step * np.sqrt(2.0) / 2.0)
        best = _grid_min(body, wp, nodes)
        # ensure the base point participates so values outside the patch
        # (all >= F(base)) cannot undercut the bound
        best = min(best, float(objective(body, wp, base)))
        return best - cover

    raise MedianError(f"unsupported region {region!r}")


def plane_patch_radius(body: Body, wp: WeightedPoints, base: np.ndarray) -> float:
    """Radius guaranteed to contain every minimizer of F over the plane."""
    lo, _ = body.equivalence_constants()
    wmin = float(wp.weights[wp.weights > 0].min())
    return float(objective(body, wp, base)) / (wmin * lo) + float(
        np.linalg.norm(wp.points - base, axis=1).max())


# ---------------------------------------------------------------------------
# Euclidean cross-check


def weiszfeld(wp: WeightedPoints, tol: Tolerances = DEFAULT) -> MedianResult:
    """Classic multiplicative iteration for the Euclidean norm."""
    P, w = wp.points, wp.weights
    if wp.size == 1:
        return MedianResult(P[0].copy(), 0.0, 0.0, 0, "converged")

    def anchored(idx):
        diffs = P[idx] - np.delete(P, idx, axis=0)
        ws = np.delete(w, idx)
        R = (ws / np.linalg.norm(diffs, axis=1)) @ diffs
        return float(np.linalg.norm(R)) <= w[idx] + 1e-12, R

    vals = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=-1) @ w
    for idx in range(wp.size):
        ok, _ = anchored(idx)
        if ok:
            return MedianResult(P[idx].copy(), float(vals[idx]), 0.0, 0, "converged")

    x = wp.centroid()
    for it in range(tol.weiszfeld_max_iter):
        d = np.linalg.norm(x - P, axis=1)
        near = d < 1e-14
        if near.any():
            idx = int(np.nonzero(near)[0][0])
            ok, R = anchored(idx)
            if ok:
                return MedianResult(P[idx].copy(), float(vals[idx]), 0.0, it, "converged")
            x = P[idx] - (np.linalg.norm(R) - w[idx]) / np.linalg.norm(R) * R * 1e-3
            continue
        coef = w / d
        x_new = (coef @ P) / coef.sum()
        if np.linalg.norm(x_new - x) <= tol.weiszfeld_move:
            x = x_new
            val = float(np.linalg.norm(x - P, axis=1) @ w)
            g = ((x - P).T * (w / np.linalg.norm(x - P, axis=1))).sum(axis=1)
            return MedianResult(x, val, float(np.linalg.norm(g)), it + 1, "converged")
        x = x_new
    val = float(np.linalg.norm(x - P, axis=1) @ w)
    return MedianResult(x, val, np.inf, tol.weiszfeld_max_iter, "iteration_cap")
