"""Numerical ellipsoid detectors.

Two independent detectors: the worst sampled parallelogram-law defect of
the gauge, and the shadow-boundary rank test (third singular value of the
boundary gradients of a central planar section; a common plane of
gradients is the ellipsoid signature).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import Body, BodyError, HPolytope, LinearImage, LpBall, VPolytope, frame_from_normal
from .tolerances import DEFAULT
from .util import parallel_map


class DetectorError(RuntimeError):
    pass


@dataclass(frozen=True)
class ShadowReport:
    direction: np.ndarray    # the section normal
    sigma3: float            # third singular value of the normalized gradients
    best_u: np.ndarray       # candidate common-plane normal
    samples: int
    skipped: int = 0


def parallelogram_defect(body: Body, n_samples: int = 200, seed: int = 0) -> float:
    """Max |g(x+y)^2 + g(x-y)^2 - 2 g(x)^2 - 2 g(y)^2| over sampled pairs.

    Samples are drawn in the Euclidean unit ball and rescaled onto the
    body's unit ball, which makes the defect invariant under dilations of
    the body for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    d = body.dim

    def sample(n):
        v = rng.standard_normal((n, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        r = rng.random(n) ** (1.0 / d)
        raw = v * r[:, None]
        g = np.asarray(body.gauge(raw))
        return raw * (np.linalg.norm(raw, axis=1) / np.maximum(g, 1e-300))[:, None]

    x = sample(n_samples)
    y = sample(n_samples)
    gx = np.asarray(body.gauge(x))
    gy = np.asarray(body.gauge(y))
    gp = np.asarray(body.gauge(x + y))
    gm = np.asarray(body.gauge(x - y))
    return float(np.abs(gp ** 2 + gm ** 2 - 2.0 * gx ** 2 - 2.0 * gy ** 2).max())


def _is_smooth(body: Body) -> bool:
    """True when the gauge is differentiable away from the origin."""
    if isinstance(body, (HPolytope, VPolytope)):
        return False
    if isinstance(body, LpBall):
        return body.p > 1.0
    if isinstance(body, LinearImage):
        return _is_smooth(body.inner)
    return True


def shadow_rank(body: Body, direction, m: int = 256) -> ShadowReport:
    """Rank test for the boundary gradients of the central section K ∩ l^perp."""
    if body.dim != 3:
        raise DetectorError("shadow_rank requires a 3-dimensional body")
    if not _is_smooth(body):
        raise DetectorError("shadow rank is defined through boundary gradients; "
                            "polytopal bodies have kinks, use a smooth body")
    ell = np.asarray(direction, float)
    ell = ell / np.linalg.norm(ell)
    frame = frame_from_normal(ell)

    thetas = np.arange(m) * (2.0 * np.pi / m)
    dirs = np.cos(thetas)[:, None] * frame.v1 + np.sin(thetas)[:, None] * frame.v2

    grads = []
    skipped = 0
    for d in dirs:
        z = body.boundary_point(d)
        s = body.subdifferential(z)
        if s.kind != "smooth":
            skipped += 1
            continue
        grads.append(s.gradient)
    if skipped > 0.1 * m:
        raise DetectorError(
            f"{skipped}/{m} section samples hit gauge kinks; the shadow rank "
            "test requires a smooth body")
    G = np.asarray(grads)
    G = G / np.linalg.norm(G, axis=1, keepdims=True)
    _, svals, Vt = np.linalg.svd(G, full_matrices=False)
    sigma3 = float(svals[2]) if len(svals) >= 3 else 0.0
    best_u = Vt[2] if Vt.shape[0] >= 3 else np.cross(Vt[0], Vt[1])
    return ShadowReport(direction=ell, sigma3=sigma3, best_u=best_u,
                        samples=len(G), skipped=skipped)


def sphere_directions(n: int, seed: int | None = None) -> np.ndarray:
    """Quasi-uniform directions on the sphere (Fibonacci lattice); a seed
    applies a fixed random rotation."""
    i = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    golden = np.pi * (1.0 + np.sqrt(5.0))
    theta = golden * i
    dirs = np.stack([np.cos(theta) * np.sin(phi),
                     np.sin(theta) * np.sin(phi),
                     np.cos(phi)], axis=-1)
    if seed is not None:
        rng = np.random.default_rng(seed)
        Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        dirs = dirs @ Q.T
    return dirs


def _scan_one(ell: np.ndarray, body: Body, m: int) -> ShadowReport:
    return shadow_rank(body, ell, m=m)


@dataclass(frozen=True)
class ScanSummary:
    max_sigma3: float
    argmax_direction: np.ndarray
    reports: tuple


def mm_scan(body: Body, n_directions: int = 64, seed: int = 0, m: int = 256) -> ScanSummary:
    """shadow_rank over quasi-uniform directions; max sigma3 near zero is
    numerical evidence that every central section boundary fits in one
    shadow boundary (the ellipsoid criterion)."""
    reports = parallel_map(_scan_one, sphere_directions(n_directions, seed), body, m)
    best = max(reports, key=lambda r: r.sigma3)
    return ScanSummary(max_sigma3=best.sigma3, argmax_direction=best.direction,
                       reports=tuple(reports))
