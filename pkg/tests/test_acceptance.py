"""Acceptance gate.

Nine criteria, one test each, every test printing a single pass/fail line
with its key measurements. Seeds and search budgets are frozen; see the
suites module for the batteries shared with the command line.
"""

import numpy as np
import pytest

from medianorm.bodies import LpBall
from medianorm.median import (
    MedianError,
    SolveOptions,
    WeightedPoints,
    objective,
    solve_unconstrained,
    weiszfeld,
)
from medianorm.intuition import construct_median_weights
from medianorm.suites import (
    random_body_2d,
    suite_ellipsoids,
    suite_planar,
    suite_shadow,
    suite_subgradients,
    suite_witnesses,
)

OPTS = SolveOptions(seed=0)


def _verdict(capsys, num, label, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {num} [{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, f"criterion {num} failed ({label}): {detail}"


@pytest.fixture(scope="module")
def witness_battery():
    return suite_witnesses(7)


def _grid_min(body, wp, nodes):
    """Brute-force objective minimum over a square grid covering the hull,
    padded by one instance diameter."""
    pts = wp.points
    diam = max(np.linalg.norm(pts - pts.mean(axis=0), axis=1).max() * 2.0, 0.5)
    lo = pts.min(axis=0) - diam
    hi = pts.max(axis=0) + diam
    xs = np.linspace(lo[0], hi[0], nodes)
    ys = np.linspace(lo[1], hi[1], nodes)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = np.zeros(len(grid))
    for p, w in zip(pts, wp.weights):
        vals += w * np.asarray(body.gauge(grid - p))
    step = max((hi - lo) / (nodes - 1))
    return float(vals.min()), float(step)


def test_criterion_1_gauge_subgradient_axioms(capsys):
    rep = suite_subgradients(7)
    ok = rep.passed and rep.seconds < 10.0
    _verdict(capsys, 1, "gauge and subgradient axioms on 10 bodies x 500 samples",
             ok, f"{sum(c['ok'] for c in rep.checks)}/{len(rep.checks)} checks, "
                 f"{rep.seconds:.1f}s")


def test_criterion_2_planar_battery(capsys):
    rep = suite_planar(7)
    ok = rep.passed and rep.seconds < 120.0
    gap = rep.checks[0]["detail"]["max_gap"]
    _verdict(capsys, 2, "500 random 2D instances stay in the hull",
             ok, f"max gap {gap:.2e} <= 1e-6, {rep.seconds:.1f}s")


def test_criterion_3_ellipsoid_battery(capsys):
    rep = suite_ellipsoids(7)
    ok = rep.passed and rep.seconds < 120.0
    d = {c["label"]: c["detail"] for c in rep.checks}
    _verdict(capsys, 3, "200 ellipsoid instances + 100 linear-image identities",
             ok, f"max gap {d['hull_gap_ellipsoid_3d']['max_gap']:.2e}, "
                 f"max deviation {d['linear_invariance']['max_value_deviation']:.2e}, "
                 f"{rep.seconds:.1f}s")


def test_criterion_4_hull_witnesses(capsys, witness_battery):
    hull = [c for c in witness_battery.checks if "affine" not in c["label"]]
    secs = sum(c["detail"].get("seconds", 0.0) for c in hull)
    ok = len(hull) == 3 and all(c["ok"] for c in hull) and secs < 600.0
    gaps = {c["label"]: c["detail"].get("gap") for c in hull}
    _verdict(capsys, 4, "certified hull-escape witnesses (l1, box, l4)",
             ok, f"gaps {gaps}, {secs:.0f}s")


def test_criterion_5_affine_witness(capsys, witness_battery):
    aff = [c for c in witness_battery.checks if "affine" in c["label"]]
    ok = len(aff) == 1 and aff[0]["ok"] \
        and aff[0]["detail"].get("seconds", 1e9) < 300.0
    _verdict(capsys, 5, "certified coplanar witness escaping its plane (l4)",
             ok, f"gap {aff[0]['detail'].get('gap')}, "
                 f"{aff[0]['detail'].get('seconds', 0):.0f}s")


def test_criterion_6_weight_constructor(capsys):
    rng = np.random.default_rng([7, 600])
    built = 0
    worst_sum = 0.0
    worst_opt = -np.inf
    worst_grid = -np.inf
    grid_checked = 0
    while built < 100:
        body = random_body_2d(rng)
        pts = [body.boundary_point(d) for d in rng.standard_normal((3, 2))]
        try:
            wp, gens = construct_median_weights(body, *pts, return_generators=True)
        except MedianError:
            continue
        built += 1
        z = np.asarray(pts[2])
        wz = wp.weights[np.linalg.norm(wp.points - z, axis=1).argmin()]
        assert wz > 0.0
        worst_sum = max(worst_sum,
                        float(np.linalg.norm((wp.weights[:, None] * gens).sum(axis=0))))
        f0 = objective(body, wp, np.zeros(2))
        res = solve_unconstrained(body, wp, OPTS)
        worst_opt = max(worst_opt, f0 - res.value)
        if built % 10 == 0 and grid_checked < 10:
            gmin, step = _grid_min(body, wp, 2001)
            _, upper = body.equivalence_constants()
            worst_grid = max(worst_grid, f0 - gmin - upper * step * np.sqrt(2.0))
            grid_checked += 1
    ok = worst_sum <= 1e-10 and worst_opt <= 1e-7 and worst_grid <= 1e-7
    _verdict(capsys, 6, "100 constructed weight vectors make the origin a median",
             ok, f"max |sum W g| {worst_sum:.1e}, max solver excess {worst_opt:.1e}, "
                 f"max grid excess {worst_grid:.1e}, grids {grid_checked}")


def test_criterion_7_unit_square(capsys):
    body = LpBall(1.0, np.ones(2))
    wp = WeightedPoints(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([0.5, 0.5]))
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    rng = np.random.default_rng(7)
    interior = rng.uniform(0.0, 1.0, size=(20, 2))
    vals = [objective(body, wp, x) for x in np.vstack([corners, interior])]
    flat = max(abs(v - 1.0) for v in vals)
    res = solve_unconstrained(body, wp, OPTS)
    ok = flat <= 1e-12 and abs(res.value - 1.0) <= 1e-8
    _verdict(capsys, 7, "two-point cross-polytope instance is flat on the square",
             ok, f"max |F-1| {flat:.1e} over 24 points, solver value {res.value}")


def test_criterion_8_ellipsoid_detectors(capsys):
    rep = suite_shadow(7)
    ok = rep.passed and rep.seconds < 60.0
    _verdict(capsys, 8, "parallelogram and shadow-rank detectors separate",
             ok, f"{sum(c['ok'] for c in rep.checks)}/{len(rep.checks)} checks, "
                 f"{rep.seconds:.1f}s")


def test_criterion_9_solver_cross_validation(capsys):
    rng = np.random.default_rng([7, 900])
    ball = LpBall(2.0, np.ones(3))
    worst_w = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        wp = WeightedPoints(rng.uniform(-1.0, 1.0, size=(n, 3)),
                            rng.dirichlet(np.ones(n)))
        worst_w = max(worst_w, abs(weiszfeld(wp).value
                                   - solve_unconstrained(ball, wp, OPTS).value))

    cross = LpBall(1.0, np.ones(3))
    worst_l1 = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        pts = rng.uniform(-1.0, 1.0, size=(n, 3))
        w = rng.dirichlet(np.ones(n))
        wp = WeightedPoints(pts, w)
        med = np.array([
            pts[np.argsort(pts[:, c]), c][int(np.searchsorted(
                np.cumsum(w[np.argsort(pts[:, c])]), 0.5))]
            for c in range(3)])
        worst_l1 = max(worst_l1, abs(solve_unconstrained(cross, wp, OPTS).value
                                     - objective(cross, wp, med)))

    worst_g = 0.0
    for _ in range(50):
        body = random_body_2d(rng)
        n = int(rng.integers(2, 4))
        wp = WeightedPoints(rng.uniform(-1.0, 1.0, size=(n, 2)),
                            rng.dirichlet(np.ones(n)))
        val = solve_unconstrained(body, wp, OPTS).value
        gmin, step = _grid_min(body, wp, 401)
        _, upper = body.equivalence_constants()
        assert val <= gmin + 1e-9
        worst_g = max(worst_g, gmin - val - upper * step * np.sqrt(2.0))

    ok = worst_w <= 1e-5 and worst_l1 <= 1e-7 and worst_g <= 0.0
    _verdict(capsys, 9, "independent-oracle cross-validation",
             ok, f"weiszfeld {worst_w:.1e} <= 1e-5, coordinatewise {worst_l1:.1e} "
                 f"<= 1e-7, grid slack {worst_g:.1e} <= 0")
