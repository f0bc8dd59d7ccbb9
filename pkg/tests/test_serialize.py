import json

import numpy as np
import pytest

from medianorm.bodies import (
    BodyError,
    Ellipsoid,
    FrameSection,
    HPolytope,
    LinearImage,
    LpBall,
    VPolytope,
    frame_from_normal,
)
from medianorm.median import SolveOptions, WeightedPoints, solve_unconstrained
from medianorm.serialize import (
    body_from_json,
    body_to_json,
    instance_from_json,
    instance_to_json,
    result_to_json,
)


def _all_bodies():
    rng = np.random.default_rng(0)
    frame = frame_from_normal(np.array([1.0, 1.0, 1.0]))
    return [
        Ellipsoid(np.diag([1.0, 4.0, 0.25])),
        LpBall(3.5, np.array([1.0, 2.0, 0.5])),
        HPolytope(rng.uniform(-1.0, 1.0, size=(4, 3))),
        VPolytope(rng.uniform(-1.0, 1.0, size=(5, 3))),
        LinearImage(rng.standard_normal((3, 3)) + 2 * np.eye(3),
                    LpBall(2.0, np.ones(3))),
        FrameSection(LpBall(4.0, np.ones(3)), frame),
    ]


def test_body_round_trips():
    rng = np.random.default_rng(1)
    for body in _all_bodies():
        data = json.loads(json.dumps(body_to_json(body)))
        back = body_from_json(data)
        for _ in range(30):
            x = rng.uniform(-2.0, 2.0, size=body.dim)
            assert back.gauge(x) == pytest.approx(body.gauge(x), abs=1e-12)


def test_instance_round_trip():
    body = LpBall(1.0, np.ones(3))
    wp = WeightedPoints(np.eye(3), np.full(3, 1 / 3))
    data = json.loads(json.dumps(instance_to_json(body, wp)))
    body2, wp2 = instance_from_json(data)
    assert np.array_equal(wp2.points, wp.points)
    assert np.array_equal(wp2.weights, wp.weights)
    assert body2.gauge(np.ones(3)) == pytest.approx(3.0)


def test_result_serializes_with_seed():
    body = LpBall(2.0, np.ones(2))
    wp = WeightedPoints(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([0.5, 0.5]))
    res = solve_unconstrained(body, wp, SolveOptions(seed=3))
    data = json.loads(json.dumps(result_to_json(res, seed=3)))
    assert data["seed"] == 3
    assert data["status"] == "converged"
    assert set(data) == {"minimizer", "value", "residual", "iterations", "status", "seed"}


def test_bad_body_json_rejected():
    with pytest.raises(BodyError):
        body_from_json({"type": "mystery"})
    with pytest.raises(BodyError):
        body_from_json({"no_type": 1})
