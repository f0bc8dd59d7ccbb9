import numpy as np
import pytest

from medianorm.bodies import Ellipsoid, LpBall
from medianorm.intuition import (
    SearchConfig,
    Witness,
    check_affine,
    check_intuitive,
    construct_median_weights,
    replay_witness,
    search_witness,
)
from medianorm.median import (
    MedianError,
    SolveOptions,
    WeightedPoints,
    objective,
    solve_unconstrained,
)
from medianorm.serialize import witness_from_json, witness_to_json
from medianorm.suites import random_body_2d, random_ellipsoid

OPTS = SolveOptions(seed=0)


@pytest.fixture(scope="module")
def l1_witness_outcome():
    """The unit-vector triple under the cross-polytope norm escapes its hull."""
    body = LpBall(1.0, np.ones(3))
    wp = WeightedPoints(np.eye(3), np.full(3, 1 / 3))
    return body, wp, check_intuitive(body, wp)


def test_ellipsoid_instances_intuitive():
    rng = np.random.default_rng(0)
    for _ in range(5):
        body = random_ellipsoid(rng, 3)
        n = int(rng.integers(2, 6))
        pts = rng.uniform(-1.0, 1.0, size=(n, 3))
        wp = WeightedPoints(pts, rng.dirichlet(np.ones(n)))
        out = check_intuitive(body, wp)
        assert out.verdict == "intuitive_at_tol"
        assert out.certificate is None


def test_planar_instances_intuitive():
    rng = np.random.default_rng(1)
    for _ in range(5):
        body = random_body_2d(rng)
        n = int(rng.integers(2, 7))
        pts = rng.uniform(-1.0, 1.0, size=(n, 2))
        wp = WeightedPoints(pts, rng.dirichlet(np.ones(n)))
        assert check_intuitive(body, wp).verdict == "intuitive_at_tol"


def test_cross_polytope_violation(l1_witness_outcome):
    body, wp, out = l1_witness_outcome
    assert out.verdict == "violated"
    # free minimum is the origin with value 1; hull-constrained minimum is 4/3
    assert out.gap == pytest.approx(1 / 3, abs=1e-6)
    w = out.certificate
    assert w is not None and w.gap > 0.0
    assert objective(body, wp, w.escaped) == pytest.approx(1.0, abs=1e-8)
    assert w.separator[1] > 0.0


def test_witness_replays_after_round_trip(l1_witness_outcome):
    _, _, out = l1_witness_outcome
    w = witness_from_json(witness_to_json(out.certificate))
    assert replay_witness(w)


def test_check_affine_two_points():
    body = LpBall(4.0, np.ones(3))
    wp = WeightedPoints(np.array([[0.0, 0.0, 0.0], [1.0, 0.5, -0.3]]),
                        np.array([0.4, 0.6]))
    assert check_affine(body, wp).verdict == "intuitive_at_tol"


def test_check_affine_planar_ellipsoid():
    rng = np.random.default_rng(2)
    body = random_ellipsoid(rng, 3)
    coords = rng.uniform(-1.0, 1.0, size=(3, 2))
    pts = np.concatenate([coords, np.zeros((3, 1))], axis=1)
    wp = WeightedPoints(pts, np.full(3, 1 / 3))
    assert check_affine(body, wp).verdict == "intuitive_at_tol"


def test_search_on_ellipsoid_finds_nothing():
    body = Ellipsoid(np.diag([1.0, 2.0, 0.5]))
    assert search_witness(body, SearchConfig(trials=60, seed=0)) is None


def test_gap_rigid_motion_invariance():
    body = LpBall(2.0, np.ones(3))
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1.0, 1.0, size=(4, 3))
    w = rng.dirichlet(np.ones(4))
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    g1 = check_intuitive(body, WeightedPoints(pts, w)).gap
    g2 = check_intuitive(body, WeightedPoints(pts @ Q.T, w)).gap
    assert abs(g1 - g2) <= 1e-8


# ---------------------------------------------------------------------------
# planar median-weight constructor


def test_constructor_disc_example():
    body = LpBall(2.0, np.ones(2))
    z = np.array([-1.0, -1.0]) / np.sqrt(2)
    wp = construct_median_weights(body, [1.0, 0.0], [0.0, 1.0], z)
    total = 1.0 + np.sqrt(2)
    lookup = {tuple(np.round(p, 9)): w for p, w in zip(wp.points, wp.weights)}
    assert lookup[tuple(np.round(z, 9))] == pytest.approx(1.0 / total)
    assert lookup[(1.0, 0.0)] == pytest.approx(np.sqrt(2) / 2 / total)
    assert lookup[(0.0, 1.0)] == pytest.approx(np.sqrt(2) / 2 / total)


def test_constructor_antipodal_pair():
    body = LpBall(2.0, np.ones(2))
    wp = construct_median_weights(body, [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0])
    assert len(wp.points) == 2
    assert np.allclose(sorted(wp.weights), [0.5, 0.5])
    # the segment between the two support points passes through the origin
    assert np.allclose(wp.points.sum(axis=0), 0.0)


def test_constructor_cross_polytope_explicit_generators():
    body = LpBall(1.0, np.ones(2))
    wp = construct_median_weights(body, [1.0, 0.0], [0.0, 1.0], [-0.5, -0.5],
                                  gx=[1.0, 0.0], gy=[0.0, 1.0])
    assert np.allclose(np.sort(wp.weights), np.full(3, 1 / 3))
    res = solve_unconstrained(body, wp, OPTS)
    assert objective(body, wp, np.zeros(2)) <= res.value + 1e-9


def test_constructor_rejects_bad_inputs():
    body = LpBall(2.0, np.ones(2))
    with pytest.raises(MedianError):
        construct_median_weights(body, [2.0, 0.0], [0.0, 1.0], [-1.0, 0.0])
    with pytest.raises(MedianError, match="det"):
        # antipodal x and y share a tangent line up to sign: dependent generators
        construct_median_weights(body, [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0])


def test_constructor_random_bodies_make_origin_optimal():
    rng = np.random.default_rng(4)
    built = 0
    while built < 20:
        body = random_body_2d(rng)
        dirs = rng.standard_normal((3, 2))
        pts = [body.boundary_point(d) for d in dirs]
        try:
            wp, gens = construct_median_weights(body, *pts, return_generators=True)
        except MedianError:
            continue
        built += 1
        assert np.linalg.norm((wp.weights[:, None] * gens).sum(axis=0)) <= 1e-10
        res = solve_unconstrained(body, wp, OPTS)
        assert objective(body, wp, np.zeros(2)) <= res.value + 1e-7
