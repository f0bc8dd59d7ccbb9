"""JSON schemas for bodies, instances, results, and witnesses.

All matrices are row-major nested lists of decimal doubles; every record
round-trips through ``json.dumps``/``json.loads``.
"""

from __future__ import annotations

import numpy as np

from .bodies import (
    Body,
    BodyError,
    Ellipsoid,
    FrameSection,
    HPolytope,
    LinearImage,
    LpBall,
    SectionFrame,
    VPolytope,
)
from .intuition import Witness
from .median import MedianResult, WeightedPoints


def body_to_json(body: Body) -> dict:
    return body.to_json()


def body_from_json(data: dict) -> Body:
    try:
        kind = data["type"]
    except (KeyError, TypeError):
        raise BodyError("body JSON needs a 'type' field")
    if kind == "ellipsoid":
        return Ellipsoid(np.array(data["matrix"], float))
    if kind == "lp_ball":
        return LpBall(float(data["p"]), np.array(data["scale"], float))
    if kind == "h_polytope":
        return HPolytope(np.array(data["functionals"], float))
    if kind == "v_polytope":
        return VPolytope(np.array(data["generators"], float))
    if kind == "linear_image":
        return LinearImage(np.array(data["matrix"], float), body_from_json(data["inner"]))
    if kind == "frame_section":
        f = data["frame"]
        frame = SectionFrame(u=np.array(f["u"], float), v1=np.array(f["v1"], float),
                             v2=np.array(f["v2"], float))
        return FrameSection(body_from_json(data["parent"]), frame)
    raise BodyError(f"unknown body type {kind!r}")


def instance_to_json(body: Body, wp: WeightedPoints) -> dict:
    return {
        "body": body_to_json(body),
        "points": wp.points.tolist(),
        "weights": wp.weights.tolist(),
    }


def instance_from_json(data: dict) -> tuple[Body, WeightedPoints]:
    body = body_from_json(data["body"])
    wp = WeightedPoints(np.array(data["points"], float), np.array(data["weights"], float))
    return body, wp


def result_to_json(res: MedianResult, seed: int | None = None) -> dict:
    out = {
        "minimizer": np.asarray(res.minimizer).tolist(),
        "value": res.value,
        "residual": res.residual,
        "iterations": res.iterations,
        "status": res.status,
    }
    if seed is not None:
        out["seed"] = int(seed)
    return out


def witness_to_json(w: Witness) -> dict:
    normal, margin = w.separator
    return {
        "body": body_to_json(w.body),
        "points": w.wp.points.tolist(),
        "weights": w.wp.weights.tolist(),
        "escaped": np.asarray(w.escaped).tolist(),
        "gap": float(w.gap),
        "separator": {"normal": np.asarray(normal).tolist(), "margin": float(margin)},
        "region": w.region,
        "provenance": w.provenance,
    }


def witness_from_json(data: dict) -> Witness:
    body = body_from_json(data["body"])
    wp = WeightedPoints(np.array(data["points"], float), np.array(data["weights"], float))
    sep = (np.array(data["separator"]["normal"], float), float(data["separator"]["margin"]))
    return Witness(body=body, wp=wp, escaped=np.array(data["escaped"], float),
                   gap=float(data["gap"]), separator=sep, region=data["region"],
                   provenance=dict(data.get("provenance", {})))
