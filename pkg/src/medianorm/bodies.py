"""Symmetric convex bodies in dimension 2 or 3.

A body is given by one of a closed family of shapes (ellipsoid, lp ball,
H-polytope, V-polytope, linear image, planar section) and exposes the
gauge norm, the dual (support) norm, subdifferentials of the gauge, planar
sections, and Euclidean norm-equivalence constants.

All operations accept batched inputs where noted: ``x`` may have shape
``(..., dim)`` and the result drops the last axis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .tolerances import DEFAULT, Tolerances


class BodyError(ValueError):
    """Invalid body construction or invalid oracle input."""


# ---------------------------------------------------------------------------
# subgradient sets and section frames


@dataclass(frozen=True)
class SubgradientSet:
    """The subdifferential of the gauge at a nonzero point.

    ``kind`` is "smooth" (a single gradient) or "facial" (the list of
    extreme points; the full set is their convex hull).
    """

    kind: str
    generators: np.ndarray  # (k, dim)
    base_point: np.ndarray  # (dim,)

    @property
    def gradient(self) -> np.ndarray:
        if self.kind != "smooth":
            raise BodyError("facial subdifferential has no unique gradient")
        return self.generators[0]

    def linmin(self, direction: np.ndarray) -> np.ndarray:
        """Generator minimizing <direction, g> (linear oracle over the set)."""
        dots = self.generators @ np.asarray(direction)
        return self.generators[int(np.argmin(dots))]

    def average(self) -> np.ndarray:
        return self.generators.mean(axis=0)

    def contains(self, g: np.ndarray, tol: float = 1e-8) -> bool:
        from .geometry import project_to_hull

        return project_to_hull(np.asarray(g, float), list(self.generators)).distance <= tol


@dataclass(frozen=True)
class SectionFrame:
    """Orthonormal frame (u; v1, v2) with u normal to the section plane."""

    u: np.ndarray
    v1: np.ndarray
    v2: np.ndarray

    def __post_init__(self):
        tol = DEFAULT.frame_ortho
        for name, v in (("u", self.u), ("v1", self.v1), ("v2", self.v2)):
            v = np.asarray(v, float)
            object.__setattr__(self, name, v)
            if v.shape != (3,):
                raise BodyError("frame vectors must be 3-vectors")
            if abs(np.linalg.norm(v) - 1.0) > tol:
                raise BodyError(f"frame vector {name} is not unit")
        for a, b in ((self.u, self.v1), (self.u, self.v2), (self.v1, self.v2)):
            if abs(float(a @ b)) > tol:
                raise BodyError("frame vectors are not orthogonal")

    @property
    def basis(self) -> np.ndarray:
        """3x2 matrix with columns v1, v2."""
        return np.stack([self.v1, self.v2], axis=1)

    def to_plane(self, x: np.ndarray) -> np.ndarray:
        """Coordinates (s, t) of an in-plane 3-vector."""
        return np.asarray(x) @ self.basis

    def to_ambient(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(w) @ self.basis.T


def frame_from_normal(u: np.ndarray) -> SectionFrame:
    """Deterministic orthonormal completion of a (nonzero) normal."""
    u = np.asarray(u, float)
    n = np.linalg.norm(u)
    if n == 0:
        raise BodyError("zero normal")
    u = u / n
    pivot = np.zeros(3)
    pivot[int(np.argmin(np.abs(u)))] = 1.0
    v1 = np.cross(u, pivot)
    v1 /= np.linalg.norm(v1)
    v2 = np.cross(u, v1)
    return SectionFrame(u=u, v1=v1, v2=v2)


# ---------------------------------------------------------------------------
# polytope vertex enumeration (dimension 2 or 3, small instance sizes)


def _halfspace_vertices(rows: np.ndarray) -> np.ndarray:
    """Vertices of {x : <r_i, x> <= 1 for all rows r_i}.

    Brute-force enumeration of row subsets of size dim; the polytope must be
    bounded (callers guarantee the rows positively span the space).
    """
    rows = np.asarray(rows, float)
    n, d = rows.shape
    combos = np.array(list(itertools.combinations(range(n), d)))
    mats = rows[combos]  # (c, d, d)
    dets = np.linalg.det(mats)
    scale = np.abs(mats).max() ** d + 1e-300
    good = np.abs(dets) > 1e-10 * scale
    if not good.any():
        raise BodyError("degenerate polytope: no vertex candidates")
    sols = np.linalg.solve(mats[good], np.ones((int(good.sum()), d, 1)))[..., 0]
    feas = (sols @ rows.T <= 1.0 + 1e-9).all(axis=1)
    verts = sols[feas]
    if len(verts) == 0:
        raise BodyError("unbounded or empty polytope")
    # dedupe
    order = np.lexsort(verts.T)
    verts = verts[order]
    keep = [0]
    for i in range(1, len(verts)):
        if np.linalg.norm(verts[i] - verts[keep[-1]]) > 1e-9 * (1 + np.abs(verts).max()):
            keep.append(i)
    return verts[keep]


def _dedupe_rows(rows: np.ndarray, signed: bool = True) -> np.ndarray:
    """Remove duplicate rows; with ``signed`` also identify r with -r."""
    out: list[np.ndarray] = []
    for r in rows:
        dup = False
        for s in out:
            if np.linalg.norm(r - s) < 1e-12 or (signed and np.linalg.norm(r + s) < 1e-12):
                dup = True
                break
        if not dup:
            out.append(r)
    return np.array(out)


# ---------------------------------------------------------------------------
# body family


class Body:
    """Base class; subclasses implement the gauge and subdifferential oracles."""

    dim: int
    smooth: bool = False

    def __init__(self, tol: Tolerances = DEFAULT):
        self.tol = tol

    # -- oracles -----------------------------------------------------------
    def gauge(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dual_gauge(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def subdifferential(self, p: np.ndarray, active_rel: float | None = None) -> SubgradientSet:
        p = np.asarray(p, float)
        if p.shape != (self.dim,):
            raise BodyError(f"expected a {self.dim}-vector")
        if np.linalg.norm(p) == 0.0:
            raise BodyError("subdifferential at origin not supported")
        return self._subdiff(p, self.tol.active_rel if active_rel is None else active_rel)

    def _subdiff(self, p: np.ndarray, active_rel: float) -> SubgradientSet:
        raise NotImplementedError

    def section(self, frame: SectionFrame) -> "Body":
        if self.dim != 3:
            raise BodyError("section requires a 3-dimensional body")
        return self._section(frame)

    def _section(self, frame: SectionFrame) -> "Body":
        return FrameSection(self, frame, tol=self.tol)

    def equivalence_constants(self) -> tuple[float, float]:
        """Certified (lower, upper) with lower <= gauge(v) <= upper on the
        Euclidean unit sphere; exact for all shapes except generic linear
        images and generic sections, where a safe enclosure is returned."""
        raise NotImplementedError

    # -- helpers -----------------------------------------------------------
    def boundary_point(self, direction: np.ndarray) -> np.ndarray:
        direction = np.asarray(direction, float)
        g = float(self.gauge(direction))
        if g == 0.0:
            raise BodyError("zero direction has no boundary point")
        return direction / g

    def dual_ball_vertices(self) -> np.ndarray | None:
        """Vertices of the dual unit ball when it is a polytope, else None."""
        return None

    def apply_linear(self, T: np.ndarray) -> "Body":
        return LinearImage(T, self, tol=self.tol)

    def to_json(self) -> dict:
        raise NotImplementedError


class Ellipsoid(Body):
    """{x : x^T A x <= 1} for symmetric positive-definite A."""

    smooth = True

    def __init__(self, A: np.ndarray, tol: Tolerances = DEFAULT):
        super().__init__(tol)
        A = np.asarray(A, float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in (2, 3):
            raise BodyError("A must be a 2x2 or 3x3 matrix")
        if np.abs(A - A.T).max() > 1e-10 * (1 + np.abs(A).max()):
            raise BodyError("A must be symmetric")
        self.A = 0.5 * (A + A.T)
        self.dim = A.shape[0]
        evals = np.linalg.eigvalsh(self.A)
        if evals[0] <= tol.pd_floor:
            raise BodyError(f"A is not positive definite (lambda_min={evals[0]:g})")
        self._evals = evals
        self._Ainv = np.linalg.inv(self.A)

    def gauge(self, x):
        x = np.asarray(x, float)
        return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", x, self.A, x), 0.0))

    def dual_gauge(self, g):
        g = np.asarray(g, float)
        return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", g, self._Ainv, g), 0.0))

    def _subdiff(self, p, active_rel):
        g = self.A @ p / float(self.gauge(p))
        return SubgradientSet("smooth", g[None, :], p)

    def _section(self, frame):
        E = frame.basis
        return Ellipsoid(E.T @ self.A @ E, tol=self.tol)

    def equivalence_constants(self):
        return float(np.sqrt(self._evals[0])), float(np.sqrt(self._evals[-1]))

    def to_json(self):
        return {"type": "ellipsoid", "matrix": self.A.tolist()}


class LpBall(Body):
    """{x : sum |x_i / s_i|^p <= 1} with p >= 1 and positive scales s."""

    def __init__(self, p: float, scale=None, dim: int | None = None, tol: Tolerances = DEFAULT):
        super().__init__(tol)
        if not np.isfinite(p) or p < 1.0:
            raise BodyError("p must be a finite real >= 1")
        if scale is None:
            if dim is None:
                raise BodyError("need scale or dim")
            scale = np.ones(dim)
        scale = np.asarray(scale, float)
        if scale.ndim != 1 or scale.shape[0] not in (2, 3):
            raise BodyError("scale must have length 2 or 3")
        if (scale <= 0).any():
            raise BodyError("scales must be positive")
        self.p = float(p)
        self.scale = scale
        self.dim = scale.shape[0]
        self.smooth = self.p > 1.0

    def gauge(self, x):
        y = np.abs(np.asarray(x, float) / self.scale)
        if self.p == 1.0:
            return y.sum(axis=-1)
        m = y.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return (m[..., 0] * (((y / safe) ** self.p).sum(axis=-1)) ** (1.0 / self.p))

    def dual_gauge(self, g):
        z = np.abs(np.asarray(g, float) * self.scale)
        if self.p == 1.0:
            return z.max(axis=-1)
        q = self.p / (self.p - 1.0)
        m = z.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return (m[..., 0] * (((z / safe) ** q).sum(axis=-1)) ** (1.0 / q))

    def _subdiff(self, p_vec, active_rel):
        y = p_vec / self.scale
        a = np.abs(y)
        if self.p > 1.0:
            m = a.max()
            t = a / m
            num = t ** (self.p - 1.0) * np.sign(y)
            den = (t ** self.p).sum() ** ((self.p - 1.0) / self.p)
            g = num / den / self.scale
            return SubgradientSet("smooth", g[None, :], p_vec)
        # p = 1: sign vector with free signs on (relatively) zero coordinates
        zero = a <= self.tol.zero_coord_rel * a.max()
        base = np.sign(y) / self.scale
        free = np.nonzero(zero)[0]
        gens = []
        for signs in itertools.product((-1.0, 1.0), repeat=len(free)):
            g = base.copy()
            g[free] = np.array(signs) / self.scale[free]
            gens.append(g)
        if len(gens) == 1:
            return SubgradientSet("smooth", np.array(gens), p_vec)
        return SubgradientSet("facial", np.array(gens), p_vec)

    def _section(self, frame):
        # axis-aligned frames reduce to a 2d lp ball; otherwise generic wrapper
        E = frame.basis
        axes = []
        for j in range(2):
            col = E[:, j]
            nz = np.nonzero(np.abs(col) > 1e-14)[0]
            if len(nz) == 1 and abs(abs(col[nz[0]]) - 1.0) < 1e-14:
                axes.append(int(nz[0]))
            else:
                return FrameSection(self, frame, tol=self.tol)
        if len(set(axes)) == 2:
            return LpBall(self.p, self.scale[axes], tol=self.tol)
        return FrameSection(self, frame, tol=self.tol)

    def dual_ball_vertices(self):
        if self.p != 1.0:
            return None
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=self.dim)))
        return signs / self.scale

    def equivalence_constants(self):
        d = np.ones(self.dim) / self.scale
        p = self.p
        if p <= 2.0:
            if p == 2.0:
                upper = float(d.max())
            else:
                r = 2.0 * p / (2.0 - p)
                upper = float((d ** r).sum() ** (1.0 / p - 0.5))
            lower = float(d.min())
        else:
            upper = float(d.max())
            r = 2.0 * p / (p - 2.0)
            lower = float((self.scale ** r).sum() ** (-(0.5 - 1.0 / p)))
        return lower, upper

    def to_json(self):
        return {"type": "lp_ball", "p": self.p, "scale": self.scale.tolist()}


class HPolytope(Body):
    """{x : |<a_i, x>| <= 1} for functionals a_1..a_k spanning the space."""

    def __init__(self, functionals: np.ndarray, tol: Tolerances = DEFAULT):
        super().__init__(tol)
        A = np.asarray(functionals, float)
        if A.ndim != 2 or A.shape[1] not in (2, 3):
            raise BodyError("functionals must be a (k, dim) array")
        if (np.linalg.norm(A, axis=1) < 1e-12).any():
            raise BodyError("zero functional")
        if np.linalg.matrix_rank(A, tol=1e-9 * np.abs(A).max()) < A.shape[1]:
            raise BodyError("functionals do not span the space")
        self.functionals = _dedupe_rows(A, signed=True)
        self.dim = A.shape[1]
        rows = np.vstack([self.functionals, -self.functionals])
        self._vertices = _halfspace_vertices(rows)

    def gauge(self, x):
        x = np.asarray(x, float)
        return np.abs(x @ self.functionals.T).max(axis=-1)

    def dual_gauge(self, g):
        g = np.asarray(g, float)
        return np.abs(g @ self._vertices.T).max(axis=-1)

    def _subdiff(self, p, active_rel):
        dots = self.functionals @ p
        m = np.abs(dots).max()
        active = np.abs(dots) >= m * (1.0 - active_rel)
        gens = np.sign(dots[active])[:, None] * self.functionals[active]
        gens = _dedupe_rows(gens, signed=False)
        kind = "smooth" if len(gens) == 1 else "facial"
        return SubgradientSet(kind, gens, p)

    def _section(self, frame):
        E = frame.basis
        A2 = self.functionals @ E
        A2 = A2[np.linalg.norm(A2, axis=1) > 1e-12]
        return HPolytope(A2, tol=self.tol)

    def equivalence_constants(self):
        upper = float(np.linalg.norm(self.functionals, axis=1).max())
        lower = float(1.0 / np.linalg.norm(self._vertices, axis=1).max())
        return lower, upper

    def dual_ball_vertices(self):
        return np.vstack([self.functionals, -self.functionals])

    def to_json(self):
        return {"type": "h_polytope", "functionals": self.functionals.tolist()}


class VPolytope(Body):
    """conv{±v_1 .. ±v_k} for generators spanning the space."""

    def __init__(self, generators: np.ndarray, tol: Tolerances = DEFAULT):
        super().__init__(tol)
        V = np.asarray(generators, float)
        if V.ndim != 2 or V.shape[1] not in (2, 3):
            raise BodyError("generators must be a (k, dim) array")
        if np.linalg.matrix_rank(V, tol=1e-9 * np.abs(V).max()) < V.shape[1]:
            raise BodyError("generators do not span the space")
        self.generators = _dedupe_rows(V, signed=True)
        self.dim = V.shape[1]
        # dual ball {g : |<g, v_i>| <= 1}; gauge is its support function
        rows = np.vstack([self.generators, -self.generators])
        self._dual_vertices = _halfspace_vertices(rows)

    def gauge(self, x):
        x = np.asarray(x, float)
        return np.abs(x @ self._dual_vertices.T).max(axis=-1)

    def dual_gauge(self, g):
        g = np.asarray(g, float)
        return np.abs(g @ self.generators.T).max(axis=-1)

    def _subdiff(self, p, active_rel):
        dots = self._dual_vertices @ p
        m = dots.max()
        active = dots >= m * (1.0 - active_rel) - 1e-300
        gens = _dedupe_rows(self._dual_vertices[active], signed=False)
        kind = "smooth" if len(gens) == 1 else "facial"
        return SubgradientSet(kind, gens, p)

    def _section(self, frame):
        E = frame.basis
        A2 = self._dual_vertices @ E
        A2 = _dedupe_rows(A2[np.linalg.norm(A2, axis=1) > 1e-12], signed=True)
        return HPolytope(A2, tol=self.tol)

    def equivalence_constants(self):
        upper = float(np.linalg.norm(self._dual_vertices, axis=1).max())
        lower = float(1.0 / np.linalg.norm(self.generators, axis=1).max())
        return lower, upper

    def dual_ball_vertices(self):
        return self._dual_vertices

    def to_json(self):
        return {"type": "v_polytope", "generators": self.generators.tolist()}


class LinearImage(Body):
    """T K for an invertible matrix T and an inner body K."""

    def __init__(self, T: np.ndarray, inner: Body, tol: Tolerances = DEFAULT):
        super().__init__(tol)
        T = np.asarray(T, float)
        if T.shape != (inner.dim, inner.dim):
            raise BodyError("T must match the inner body dimension")
        det = np.linalg.det(T)
        if abs(det) <= tol.det_floor:
            raise BodyError(f"T is near-singular (det={det:g})")
        self.T = T
        self.Tinv = np.linalg.inv(T)
        self.inner = inner
        self.dim = inner.dim
        self.smooth = inner.smooth

    def gauge(self, x):
        return self.inner.gauge(np.asarray(x, float) @ self.Tinv.T)

    def dual_gauge(self, g):
        return self.inner.dual_gauge(np.asarray(g, float) @ self.T)

    def _subdiff(self, p, active_rel):
        s = self.inner.subdifferential(self.Tinv @ p, active_rel)
        return SubgradientSet(s.kind, s.generators @ self.Tinv, p)

    def _section(self, frame):
        # gauge(E w) = gauge_inner(T^-1 E w); factor T^-1 E = Q R with Q an
        # orthonormal in-plane frame of the inner body
        M = self.Tinv @ frame.basis
        Q, R = np.linalg.qr(M)
        u = np.cross(Q[:, 0], Q[:, 1])
        inner_sec = self.inner.section(SectionFrame(u=u / np.linalg.norm(u), v1=Q[:, 0], v2=Q[:, 1]))
        return LinearImage(np.linalg.inv(R), inner_sec, tol=self.tol)

    def equivalence_constants(self):
        lo, up = self.inner.equivalence_constants()
        sv = np.linalg.svd(self.T, compute_uv=False)
        if isinstance(self.inner, LpBall) and self.inner.p == 2.0 and np.ptp(self.inner.scale) == 0.0:
            # exact: image of a round ball
            s = self.inner.scale[0]
            return float(1.0 / (sv[0] * s)), float(1.0 / (sv[-1] * s))
        return float(lo / sv[0]), float(up / sv[-1])

    def dual_ball_vertices(self):
        inner_verts = self.inner.dual_ball_vertices()
        if inner_verts is None:
            return None
        return inner_verts @ self.Tinv

    def to_json(self):
        return {"type": "linear_image", "matrix": self.T.tolist(), "inner": self.inner.to_json()}


class FrameSection(Body):
    """Generic planar section K ∩ u^perp in frame coordinates."""

    def __init__(self, parent: Body, frame: SectionFrame, tol: Tolerances = DEFAULT):
        super().__init__(tol)
        if parent.dim != 3:
            raise BodyError("FrameSection requires a 3-dimensional parent")
        self.parent = parent
        self.frame = frame
        self.dim = 2
        self.smooth = parent.smooth
        self._E = frame.basis  # 3x2

    def gauge(self, x):
        return self.parent.gauge(np.asarray(x, float) @ self._E.T)

    def dual_gauge(self, g):
        g = np.asarray(g, float)
        scalar = g.ndim == 1
        gs = g[None, :] if scalar else g.reshape(-1, 2)
        out = np.array([self._dual_gauge_one(v) for v in gs])
        return float(out[0]) if scalar else out.reshape(g.shape[:-1])

    def _dual_gauge_one(self, g: np.ndarray) -> float:
        # max <g, w> over the section unit ball, via boundary parametrization
        thetas = np.linspace(0.0, 2 * np.pi, 720, endpoint=False)
        dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
        vals = (dirs @ g) / self.gauge(dirs)
        i = int(np.argmax(vals))

        def f(t):
            d = np.array([np.cos(t), np.sin(t)])
            return -(d @ g) / float(self.gauge(d))

        lo, hi = thetas[i] - 2 * np.pi / 720, thetas[i] + 2 * np.pi / 720
        phi = (np.sqrt(5) - 1) / 2
        a, b = lo, hi
        c, d_ = b - phi * (b - a), a + phi * (b - a)
        fc, fd = f(c), f(d_)
        for _ in range(80):
            if fc < fd:
                b, d_, fd = d_, c, fc
                c = b - phi * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d_, fd
                d_ = a + phi * (b - a)
                fd = f(d_)
        return -min(fc, fd)

    def _subdiff(self, p, active_rel):
        s = self.parent.subdifferential(self._E @ p, active_rel)
        return SubgradientSet(s.kind, s.generators @ self._E, p)

    def equivalence_constants(self):
        return self.parent.equivalence_constants()

    def dual_ball_vertices(self):
        verts = self.parent.dual_ball_vertices()
        if verts is None:
            return None
        return _dedupe_rows(verts @ self._E, signed=False)

    def to_json(self):
        return {
            "type": "frame_section",
            "parent": self.parent.to_json(),
            "frame": {"u": self.frame.u.tolist(), "v1": self.frame.v1.tolist(), "v2": self.frame.v2.tolist()},
        }


# ---------------------------------------------------------------------------
# functional-style wrappers (module-level API mirroring the class methods)


def gauge(body: Body, x) -> np.ndarray:
    return body.gauge(x)


def dual_gauge(body: Body, g) -> np.ndarray:
    return body.dual_gauge(g)


def subdifferential(body: Body, p) -> SubgradientSet:
    return body.subdifferential(p)


def section(body: Body, frame: SectionFrame) -> Body:
    return body.section(frame)


def apply_linear(body: Body, T) -> Body:
    return body.apply_linear(np.asarray(T, float))


def norm_equivalence_constants(body: Body) -> tuple[float, float]:
    return body.equivalence_constants()


def boundary_point(body: Body, direction) -> np.ndarray:
    return body.boundary_point(direction)
