"""Euclidean convex-hull primitives for small point sets.

The hull is handled implicitly through nearest-point computations (a
Wolfe-style min-norm-point scheme over simplicial active sets); no facet
enumeration anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tolerances import DEFAULT, Tolerances


class HullError(RuntimeError):
    """Nearest-point iteration failed to converge; carries the best iterate."""

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


@dataclass(frozen=True)
class HullProjection:
    distance: float
    nearest: np.ndarray
    coefficients: np.ndarray  # simplex weights over the input points


@dataclass(frozen=True)
class AffineSpan:
    base: np.ndarray
    basis: np.ndarray  # (dim_span, ambient) orthonormal rows; may be empty
    dim: int


def _affine_min_norm(S: np.ndarray) -> np.ndarray:
    """Affine coefficients of the min-norm point of aff(rows of S)."""
    k = S.shape[0]
    M = np.empty((k + 1, k + 1))
    M[:k, :k] = S @ S.T
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    M[k, k] = 0.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(
    linmin: Callable[[np.ndarray], tuple[np.ndarray, object]],
    dim: int,
    gap_tol: float = DEFAULT.hull_gap,
    max_iter: int = DEFAULT.hull_max_iter,
):
    """Wolfe's min-norm-point algorithm over an implicitly given polytope.

    ``linmin(d)`` must return ``(vertex, key)`` with ``vertex`` minimizing
    <d, v> over the polytope; ``key`` is an arbitrary hashable identifier of
    the vertex. Returns ``(x, corral_keys, corral_coeffs)``.
    """
    v0, k0 = linmin(np.zeros(dim))
    S = [np.asarray(v0, float)]
    keys = [k0]
    lam = np.array([1.0])
    x = S[0].copy()
    scale = max(1.0, float(x @ x))
    for _ in range(max_iter):
        v, key = linmin(x)
        gap = float(x @ x) - float(x @ v)
        scale = max(scale, float(np.abs(np.asarray(S) ).max()) ** 2 if S else 1.0)
        if gap <= gap_tol * max(1.0, scale):
            return x, keys, lam
        if any(np.array_equal(v, s) for s in S):
            # no progress possible: numerical floor reached
            return x, keys, lam
        S.append(np.asarray(v, float))
        keys.append(key)
        lam = np.append(lam, 0.0)
        # minor cycle: restore a corral (min-norm affine point with positive weights)
        while True:
            A = np.asarray(S)
            alpha = _affine_min_norm(A)
            if (alpha > 1e-14).all():
                lam = alpha
                x = A.T @ lam
                break
            # move from lam toward alpha until a weight hits zero
            diff = lam - alpha
            mask = diff > 1e-14
            theta = np.min(lam[mask] / diff[mask])
            lam = (1.0 - theta) * lam + theta * alpha
            lam[lam < 1e-14] = 0.0
            keep = lam > 0.0
            if not keep.any():
                keep[int(np.argmax(alpha))] = True
                lam[keep] = 1.0
            S = [s for s, k in zip(S, keep) if k]
            keys = [s for s, k in zip(keys, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
            x = np.asarray(S).T @ lam
    raise HullError("min-norm-point iteration cap exceeded", best=x)


def project_to_hull(query, P: Sequence, tol: Tolerances = DEFAULT) -> HullProjection:
    """Nearest point of conv(P) to ``query`` in the Euclidean metric."""
    query = np.asarray(query, float)
    pts = np.asarray(P, float)
    if pts.ndim != 2 or not (1 <= len(pts) <= 16):
        raise ValueError("P must hold between 1 and 16 points")
    shifted = pts - query

    def linmin(d):
        i = int(np.argmin(shifted @ d))
        return shifted[i], i

    x, keys, lam = min_norm_point(linmin, pts.shape[1], gap_tol=tol.hull_gap, max_iter=tol.hull_max_iter)
    coeffs = np.zeros(len(pts))
    for k, l in zip(keys, lam):
        coeffs[k] += l
    nearest = query + x
    return HullProjection(distance=float(np.linalg.norm(x)), nearest=nearest, coefficients=coeffs)


def separating_hyperplane(query, P: Sequence, tol: Tolerances = DEFAULT):
    """Unit normal and margin separating ``query`` from conv(P).

    Guarantees <normal, query - nearest> = margin and
    <normal, p - nearest> <= ~0 for every p in P.
    """
    proj = project_to_hull(query, P, tol)
    if proj.distance <= 0.0:
        raise ValueError("query lies in the hull; no separating hyperplane")
    normal = (np.asarray(query, float) - proj.nearest) / proj.distance
    return normal, proj.distance


def affine_span(P: Sequence, tol: Tolerances = DEFAULT) -> AffineSpan:
    pts = np.asarray(P, float)
    if pts.ndim != 2 or len(pts) < 1:
        raise ValueError("P must hold at least one point")
    base = pts[0]
    diffs = pts - base
    if len(pts) == 1 or np.abs(diffs).max() == 0.0:
        return AffineSpan(base=base, basis=np.zeros((0, pts.shape[1])), dim=0)
    U, s, Vt = np.linalg.svd(diffs, full_matrices=False)
    keep = s > tol.span_cutoff * s[0]
    basis = Vt[keep]
    return AffineSpan(base=base, basis=basis, dim=int(keep.sum()))
