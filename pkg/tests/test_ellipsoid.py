import numpy as np
import pytest

from medianorm.bodies import Ellipsoid, HPolytope, LinearImage, LpBall
from medianorm.ellipsoid import DetectorError, mm_scan, parallelogram_defect, shadow_rank
from medianorm.suites import random_ellipsoid

DIAG = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)


def test_defect_vanishes_on_ellipsoids():
    rng = np.random.default_rng(0)
    bodies = [LpBall(2.0, np.ones(3)), Ellipsoid(np.diag([1.0, 4.0, 0.25])),
              random_ellipsoid(rng, 3)]
    for body in bodies:
        assert parallelogram_defect(body, n_samples=200, seed=11) <= 1e-9


def test_defect_large_on_polytopes_and_lp():
    for body in (LpBall(1.0, np.ones(2)), LpBall(1.0, np.ones(3)),
                 LpBall(4.0, np.ones(3)), LpBall(6.0, np.ones(3))):
        assert parallelogram_defect(body, n_samples=200, seed=11) >= 0.5


def test_defect_worst_pairs_arithmetic():
    # closed-form defect values for axis pairs, checked against the gauge
    cross = LpBall(1.0, np.ones(2))
    x, y = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    val = abs(cross.gauge(x + y) ** 2 + cross.gauge(x - y) ** 2
              - 2 * cross.gauge(x) ** 2 - 2 * cross.gauge(y) ** 2)
    assert val == pytest.approx(4.0)

    quart = LpBall(4.0, np.ones(3))
    x, y = np.eye(3)[0], np.eye(3)[1]
    val = abs(quart.gauge(x + y) ** 2 + quart.gauge(x - y) ** 2
              - 2 * quart.gauge(x) ** 2 - 2 * quart.gauge(y) ** 2)
    assert val == pytest.approx(abs(2 * np.sqrt(2) - 4), abs=1e-12)


def test_defect_dilation_invariance():
    body = LpBall(4.0, np.ones(3))
    scaled = LpBall(4.0, 3.0 * np.ones(3))
    a = parallelogram_defect(body, n_samples=200, seed=5)
    b = parallelogram_defect(scaled, n_samples=200, seed=5)
    assert abs(a - b) <= 1e-9


def test_shadow_rank_sphere_and_ellipsoid():
    rng = np.random.default_rng(1)
    rep = shadow_rank(LpBall(2.0, np.ones(3)), DIAG)
    assert rep.sigma3 <= 1e-12
    for _ in range(3):
        body = random_ellipsoid(rng, 3)
        ell = rng.standard_normal(3)
        ell /= np.linalg.norm(ell)
        rep = shadow_rank(body, ell)
        assert rep.sigma3 <= 1e-9
        # the reported null direction is orthogonal to every sampled gradient
        assert rep.sigma3 > 1e-7 or rep.best_u is not None


def test_shadow_null_direction_validity():
    body = Ellipsoid(np.diag([1.0, 4.0, 0.25]))
    rep = shadow_rank(body, DIAG)
    assert rep.sigma3 <= 1e-7
    # gradients on the section boundary are A z; all orthogonal to best_u
    A = body.A
    rng = np.random.default_rng(2)
    from medianorm.bodies import frame_from_normal
    frame = frame_from_normal(DIAG)
    for _ in range(50):
        t = rng.uniform(0.0, 2 * np.pi)
        d = np.cos(t) * frame.v1 + np.sin(t) * frame.v2
        z = body.boundary_point(d)
        g = A @ z
        assert abs(rep.best_u @ (g / np.linalg.norm(g))) <= 1e-5


def test_shadow_rank_l4_diagonal():
    rep = shadow_rank(LpBall(4.0, np.ones(3)), DIAG, m=256)
    assert rep.sigma3 > 0.01


def test_shadow_rank_refuses_polytopes():
    with pytest.raises(DetectorError):
        shadow_rank(HPolytope(np.eye(3)), DIAG)


def test_mm_scan_separation():
    rng = np.random.default_rng(3)
    assert mm_scan(LpBall(2.0, np.ones(3)), n_directions=16, seed=3).max_sigma3 <= 1e-8
    assert mm_scan(random_ellipsoid(rng, 3), n_directions=16, seed=3).max_sigma3 <= 1e-8
    T = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    image = LinearImage(T, LpBall(2.0, np.ones(3)))
    assert mm_scan(image, n_directions=16, seed=3).max_sigma3 <= 1e-8
    assert mm_scan(LpBall(4.0, np.ones(3)), n_directions=16, seed=3).max_sigma3 > 0.01


def test_sigma3_dilation_invariance():
    a = shadow_rank(LpBall(4.0, np.ones(3)), DIAG).sigma3
    b = shadow_rank(LpBall(4.0, 2.5 * np.ones(3)), DIAG).sigma3
    assert abs(a - b) <= 1e-9
