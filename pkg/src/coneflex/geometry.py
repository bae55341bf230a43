"""Euclidean and Minkowski linear algebra, model conversions, hyperbolic metric.

Points of hyperbolic space live on the upper sheet of the hyperboloid
``<x, x> = -1`` in R^{3,1}; de Sitter points satisfy ``<x, x> = +1``.  The
Klein model is the central projection of both quadrics to the affine
hyperplane ``x0 = 1``: the interior of the unit ball carries H^3, the exterior
carries (the upper half of) de Sitter space.

All functions accept plain numpy arrays.  :class:`ModelPoint` is only a thin
tagged wrapper used by :func:`convert_model`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GeometryError

MODELS = ("euclidean", "klein", "hyperboloid", "desitter", "halfspace")

# signature (-, +, +, +)
MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])

_BALL_EPS = 1e-12


def minkowski_dot(x, y):
    """Minkowski product ``-x0 y0 + x1 y1 + x2 y2 + x3 y3`` (broadcasts)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def minkowski_norm2(x):
    return minkowski_dot(x, x)


@dataclass(frozen=True)
class ModelPoint:
    """A coordinate vector tagged with the model it lives in.

    ``ideal`` marks boundary points (unit sphere in the Klein model, the
    plane ``z = 0`` or infinity in the half-space model).  Ideal points are
    carried as null vectors with ``x0 = 1`` in the hyperboloid model.
    """

    model: str
    coords: np.ndarray
    ideal: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise GeometryError(f"unknown model {self.model!r}")
        c = np.array(self.coords, dtype=float)
        if not np.all(np.isfinite(c)):
            raise GeometryError("non-finite coordinates")
        want = 4 if self.model in ("hyperboloid", "desitter") else 3
        if c.shape != (want,):
            raise GeometryError(f"{self.model} point needs {want} coordinates, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        self._check()

    def _check(self):
        c = self.coords
        if self.model == "hyperboloid":
            n2 = minkowski_norm2(c)
            if self.ideal:
                if abs(n2) > 1e-9 or abs(c[0] - 1.0) > 1e-9:
                    raise GeometryError("ideal hyperboloid point must be null with x0 = 1")
            elif abs(n2 + 1.0) > 1e-9 or c[0] <= 0:
                raise GeometryError("hyperboloid point must satisfy <x,x> = -1, x0 > 0")
        elif self.model == "desitter":
            if abs(minkowski_norm2(c) - 1.0) > 1e-9:
                raise GeometryError("de Sitter point must satisfy <x,x> = +1")
        elif self.model == "klein" and not self.ideal:
            pass  # exterior Klein points stand for de Sitter points
        elif self.model == "halfspace" and not self.ideal and c[2] <= 0:
            raise GeometryError("half-space point needs positive height")


# -- model conversions -------------------------------------------------------

def klein_to_hyperboloid(p):
    p = np.asarray(p, dtype=float)
    g = 1.0 - np.sum(p * p, axis=-1)
    if np.any(g <= _BALL_EPS):
        raise GeometryError("Klein point is not inside the unit ball")
    s = 1.0 / np.sqrt(g)
    return np.concatenate([s[..., None], p * s[..., None]], axis=-1)


def klein_to_desitter(p):
    p = np.asarray(p, dtype=float)
    h = np.sum(p * p, axis=-1) - 1.0
    if np.any(h <= _BALL_EPS):
        raise GeometryError("Klein point is not outside the unit ball")
    s = 1.0 / np.sqrt(h)
    return np.concatenate([s[..., None], p * s[..., None]], axis=-1)


def klein_lift(p):
    """Lift Klein points to the hyperboloid (inside) or de Sitter space (outside)."""
    p = np.asarray(p, dtype=float)
    g = 1.0 - np.sum(p * p, axis=-1)
    if np.any(np.abs(g) <= _BALL_EPS):
        raise GeometryError("Klein point lies on the unit sphere; it has no lift")
    s = 1.0 / np.sqrt(np.abs(g))
    return np.concatenate([s[..., None], p * s[..., None]], axis=-1)


def projective_to_klein(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x[..., 0]) < 1e-300):
        raise GeometryError("vector with x0 = 0 has no Klein image")
    return x[..., 1:] / x[..., :1]


hyperboloid_to_klein = projective_to_klein
desitter_to_klein = projective_to_klein


def hyperboloid_to_halfspace(x):
    x = np.asarray(x, dtype=float)
    den = x[0] - x[3]
    if den <= 0:
        raise GeometryError("point maps to infinity of the half-space model")
    return np.array([x[1] / den, x[2] / den, 1.0 / den])


def halfspace_to_hyperboloid(u):
    u = np.asarray(u, dtype=float)
    r2 = float(np.dot(u, u))
    w = u[2]
    if w <= 0:
        raise GeometryError("half-space point needs positive height")
    return np.array([(r2 + 1.0) / (2 * w), u[0] / w, u[1] / w, (r2 - 1.0) / (2 * w)])


def halfspace_boundary_to_null(z):
    """Ideal point ``(u, v)`` of the boundary plane as a null vector with x0 = 1.

    ``None`` stands for the point at infinity.
    """
    if z is None:
        return np.array([1.0, 0.0, 0.0, 1.0])
    u, v = float(z[0]), float(z[1])
    r2 = u * u + v * v
    vec = np.array([r2 + 1.0, 2 * u, 2 * v, r2 - 1.0])
    return vec / vec[0]


def convert_model(point: ModelPoint, target: str) -> ModelPoint:
    """Convert between the supported model pairs.

    Supported: klein <-> hyperboloid, klein <-> desitter, hyperboloid <->
    halfspace (and identity).  Klein points on the unit sphere cannot be lifted.
    """
    src = point.model
    if target not in MODELS:
        raise GeometryError(f"unknown model {target!r}")
    if src == target:
        return point
    c = point.coords
    if point.ideal:
        raise GeometryError("ideal points are not converted between models")
    pair = (src, target)
    if pair == ("klein", "hyperboloid"):
        return ModelPoint("hyperboloid", klein_to_hyperboloid(c))
    if pair == ("klein", "desitter"):
        return ModelPoint("desitter", klein_to_desitter(c))
    if pair in (("hyperboloid", "klein"), ("desitter", "klein")):
        return ModelPoint("klein", projective_to_klein(c))
    if pair == ("hyperboloid", "halfspace"):
        return ModelPoint("halfspace", hyperboloid_to_halfspace(c))
    if pair == ("halfspace", "hyperboloid"):
        return ModelPoint("hyperboloid", halfspace_to_hyperboloid(c))
    raise GeometryError(f"unsupported conversion {src} -> {target}")


def as_hyperboloid(p) -> np.ndarray:
    if isinstance(p, ModelPoint):
        if p.model == "hyperboloid":
            return p.coords
        if p.model in ("klein", "halfspace"):
            return convert_model(p, "hyperboloid").coords
        raise GeometryError(f"{p.model} point is not a hyperbolic point")
    return np.asarray(p, dtype=float)


# -- metric ------------------------------------------------------------------

def hyp_distance(p, q, tol=1e-9):
    """Hyperbolic distance ``arccosh(-<p, q>)`` between hyperboloid points."""
    x = as_hyperboloid(p)
    y = as_hyperboloid(q)
    c = -minkowski_dot(x, y)
    if np.any(c < 1.0 - tol):
        raise GeometryError(f"-<p,q> = {c} < 1: inputs are not hyperboloid points")
    # 2 asinh(|x - y| / 2) is exact near zero where arccosh loses sqrt(eps)
    diff = x - y
    chord = np.sqrt(np.maximum(minkowski_dot(diff, diff), 0.0))
    d = np.where(c < 2.0, 2 * np.arcsinh(0.5 * chord), np.arccosh(np.maximum(c, 1.0)))
    return float(d) if d.ndim == 0 else d


def geodesic_point(p, v, t):
    """Point at parameter ``t`` on the geodesic through ``p`` with velocity ``v``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if abs(minkowski_dot(p, v)) > 1e-10 * max(1.0, float(np.abs(v).max())):
        raise GeometryError("velocity is not tangent to the hyperboloid at p")
    n2 = minkowski_dot(v, v)
    if n2 <= 0.0:
        return p.copy()
    n = np.sqrt(n2)
    return np.cosh(t * n) * p + np.sinh(t * n) * (v / n)


def tangent_towards(p, q):
    """Unit tangent at hyperboloid point ``p`` pointing to ``q`` and the distance."""
    c = -minkowski_dot(p, q)
    w = q - c * p
    n2 = minkowski_dot(w, w)
    if n2 <= 0:
        raise GeometryError("coincident points define no direction")
    return w / np.sqrt(n2), float(np.arccosh(max(c, 1.0)))


@dataclass(frozen=True)
class Plane:
    """Affine plane ``normal . x = offset`` with unit normal (model coordinates)."""

    normal: np.ndarray
    offset: float

    @classmethod
    def from_coefficients(cls, a, b):
        a = np.asarray(a, dtype=float)
        n = np.linalg.norm(a)
        if n == 0:
            raise GeometryError("plane needs a nonzero normal")
        return cls(a / n, float(b) / n)

    @property
    def row(self):
        return np.append(self.normal, self.offset)

    def residual(self, x):
        return np.asarray(x, dtype=float) @ self.normal - self.offset


def polar_plane(p) -> Plane:
    """Polar plane ``{x : p . x = 1}`` of a Klein-exterior point."""
    if isinstance(p, ModelPoint):
        p = p.coords if p.model == "klein" else projective_to_klein(p.coords)
    p = np.asarray(p, dtype=float)
    if np.dot(p, p) <= 1.0 + _BALL_EPS:
        raise GeometryError("polar plane is only a hyperbolic plane for exterior points")
    return Plane.from_coefficients(p, 1.0)


def dual_plane_distance(pi, pj, tol=1e-12):
    """Distance between the hyperbolic planes dual to de Sitter points."""
    pi = np.asarray(pi, dtype=float)
    pj = np.asarray(pj, dtype=float)
    c = minkowski_dot(pi, pj)
    if c > -1.0 + tol and not np.allclose(pi, pj, atol=tol):
        raise GeometryError(f"<p_i,p_j> = {c:.6g} > -1: the dual planes intersect")
    return float(np.arccosh(max(-c, 1.0)))


def dual_plane_feet(pi, pj):
    """Feet of the common perpendicular of the planes dual to ``pi`` and ``pj``."""
    c = minkowski_dot(pi, pj)
    feet = []
    for a, b in ((pi, pj), (pj, pi)):
        x = b - c * a
        x = x / np.sqrt(-minkowski_dot(x, x))
        feet.append(x if x[0] > 0 else -x)
    return feet[0], feet[1]


# -- lines and segments ------------------------------------------------------

def _frame(a, b):
    """Base point, unit direction and length of the geodesic from a to b."""
    a = as_hyperboloid(a)
    b = as_hyperboloid(b)
    w, length = tangent_towards(a, b)
    if length < 1e-14:
        raise GeometryError("degenerate line: coincident defining points")
    return a, w, length


def line_line_distance(a1, b1, a2, b2):
    """Length of the common perpendicular of two hyperbolic lines.

    Each line is given by two distinct hyperboloid points.  Intersecting and
    asymptotic lines give 0.  Closed form: with null endpoints ``n±`` of each
    line, ``cosh d = (sqrt(<n1+,n2+><n1-,n2->) + sqrt(<n1+,n2-><n1-,n2+>)) / 2``.
    """
    u1, w1, _ = _frame(a1, b1)
    u2, w2, _ = _frame(a2, b2)
    p1, m1 = u1 + w1, u1 - w1
    p2, m2 = u2 + w2, u2 - w2
    al = -minkowski_dot(p1, p2)
    de = -minkowski_dot(m1, m2)
    be = -minkowski_dot(p1, m2)
    ga = -minkowski_dot(m1, p2)
    c = 0.5 * (np.sqrt(max(al * de, 0.0)) + np.sqrt(max(be * ga, 0.0)))
    return float(np.arccosh(max(c, 1.0)))


def segment_distance(a1, b1, a2, b2, tol=1e-10):
    """Minimum hyperbolic distance between two geodesic segments.

    Nested golden-section search over both arclength parameters (the
    distance is jointly convex).  Returns ``(distance, s, t)`` with ``s`` and
    ``t`` the arclengths of the closest points from ``a1`` and ``a2``.
    """
    u1, w1, l1 = _frame(a1, b1)
    u2, w2, l2 = _frame(a2, b2)
    c, s, t = kernels.segment_cosh_min(u1, w1, l1, u2, w2, l2, tol)
    return float(np.arccosh(max(c, 1.0))), s, t


def segment_distance_exact(a1, b1, a2, b2):
    """Closed-form segment distance; used to cross-check the search kernel.

    ``cosh d(s, t) = A e^{s+t} + B e^{s-t} + C e^{t-s} + D e^{-s-t}``; the
    minimum over the box is at the interior critical point or on an edge,
    where the one-dimensional minimum is also explicit.
    """
    u1, w1, l1 = _frame(a1, b1)
    u2, w2, l2 = _frame(a2, b2)
    p1, m1 = u1 + w1, u1 - w1
    p2, m2 = u2 + w2, u2 - w2
    A = -0.25 * minkowski_dot(p1, p2)
    B = -0.25 * minkowski_dot(p1, m2)
    C = -0.25 * minkowski_dot(m1, p2)
    D = -0.25 * minkowski_dot(m1, m2)

    def f(s, t):
        return A * np.exp(s + t) + B * np.exp(s - t) + C * np.exp(t - s) + D * np.exp(-s - t)

    def argmin_1d(coef_plus, coef_minus, lo, hi):
        # minimise coef_plus e^x + coef_minus e^-x over [lo, hi]
        if coef_plus <= 0:
            return hi
        if coef_minus <= 0:
            return lo
        return min(max(0.5 * np.log(coef_minus / coef_plus), lo), hi)

    cands = []
    if min(A, B, C, D) > 0:
        ps = 0.5 * np.log(D / A)  # s + t
        qs = 0.5 * np.log(C / B)  # s - t
        s, t = 0.5 * (ps + qs), 0.5 * (ps - qs)
        if 0 <= s <= l1 and 0 <= t <= l2:
            cands.append((f(s, t), s, t))
    for s in (0.0, l1):
        t = argmin_1d(A * np.exp(s) + C * np.exp(-s), B * np.exp(s) + D * np.exp(-s), 0.0, l2)
        cands.append((f(s, t), s, t))
    for t in (0.0, l2):
        s = argmin_1d(A * np.exp(t) + B * np.exp(-t), C * np.exp(t) + D * np.exp(-t), 0.0, l1)
        cands.append((f(s, t), s, t))
    c, s, t = min(cands)
    return float(np.arccosh(max(c, 1.0))), float(s), float(t)


# -- Killing fields ----------------------------------------------------------

def _minkowski_generators():
    gens = []
    for a in range(4):
        for b in range(a + 1, 4):
            S = np.zeros((4, 4))
            S[a, b], S[b, a] = 1.0, -1.0
            gens.append(MINKOWSKI @ S)
    return gens


MINKOWSKI_KILLING = tuple(_minkowski_generators())


def killing_basis(points, ambient="euclidean"):
    """The six infinitesimal isometries evaluated at ``points``.

    Returns an array of shape ``(6, n, d)``.  Euclidean: three translations
    and three rotations about the coordinate axes.  Minkowski: ``x -> A x``
    for a basis of the Lie algebra of the Minkowski form; these are
    automatically tangent to both quadrics.
    """
    pts = np.asarray(points, dtype=float)
    if ambient == "euclidean":
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise GeometryError("euclidean Killing fields need (n, 3) points")
        fields = [np.tile(e, (len(pts), 1)) for e in np.eye(3)]
        fields += [np.cross(e, pts) for e in np.eye(3)]
    elif ambient == "minkowski":
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise GeometryError("minkowski Killing fields need (n, 4) points")
        fields = [pts @ A.T for A in MINKOWSKI_KILLING]
    else:
        raise GeometryError(f"unknown ambient {ambient!r}")
    basis = np.stack(fields)
    stacked = basis.reshape(6, -1).T
    sv = np.linalg.svd(stacked, compute_uv=False)
    if sv[-1] < 1e-9 * sv[0]:
        raise GeometryError("degenerate point configuration: Killing fields are dependent")
    return basis
