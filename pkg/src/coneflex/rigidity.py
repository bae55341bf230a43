"""Rigidity matrices, flex spaces, the Pogorelov map and the Blaschke-Liebmann test."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import FlexError, GeometryError, ValidationError
from .polyhedron import TriangulatedPolyhedron, dihedral_angles, face_plane

AMBIENTS = {"euclidean": "euclidean", "minkowski": "minkowski",
            "hyperbolic": "minkowski", "desitter": "minkowski"}


def _ambient(name):
    try:
        return AMBIENTS[name]
    except KeyError:
        raise ValidationError(f"unknown ambient {name!r}") from None


@dataclass(frozen=True, eq=False)
class FlexField:
    """Per-vertex velocities.

    ``ambient`` is ``"euclidean"`` (velocities of Euclidean positions),
    ``"klein"`` (velocities of Klein-model positions of a hyperbolic or
    hyperideal polyhedron) or ``"minkowski"`` (tangent 4-vectors on the
    hyperboloid or de Sitter quadric).
    """

    vectors: np.ndarray
    ambient: str = "euclidean"

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if self.ambient not in ("euclidean", "klein", "minkowski"):
            raise ValidationError(f"unknown field ambient {self.ambient!r}")
        want = 4 if self.ambient == "minkowski" else 3
        if v.ndim != 2 or v.shape[1] != want:
            raise ValidationError(f"{self.ambient} field needs shape (n, {want})")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __neg__(self):
        return FlexField(-self.vectors, self.ambient)

    def scaled(self, s):
        return FlexField(s * self.vectors, self.ambient)

    @property
    def max_speed(self):
        return float(np.linalg.norm(self.vectors, axis=1).max())

    def normalized(self):
        m = self.max_speed
        return self if m == 0 else self.scaled(1.0 / m)

    def check_tangent(self, points, tol=1e-10):
        if self.ambient != "minkowski":
            return
        r = np.abs(geo.minkowski_dot(points, self.vectors))
        if r.max() > tol * max(1.0, self.max_speed):
            raise FlexError(f"field is not tangent to the quadric (residual {r.max():.3g})")


@dataclass
class FlexReport:
    """Outcome of :func:`flex_analysis`."""

    singular_values: np.ndarray
    kernel_dim: int
    trivial_dim: int
    flexes: list = field(default_factory=list)
    ambient: str = "euclidean"
    tol: float = 1e-9

    @property
    def flexible(self):
        return self.kernel_dim > self.trivial_dim

    @property
    def verdict(self):
        return "flexible" if self.flexible else "rigid"

    def to_dict(self):
        return {
            "ambient": self.ambient,
            "tol": self.tol,
            "singular_values": self.singular_values.tolist(),
            "kernel_dim": self.kernel_dim,
            "trivial_dim": self.trivial_dim,
            "verdict": self.verdict,
            "flexes": [{"ambient": f.ambient, "vectors": f.vectors.tolist()} for f in self.flexes],
        }

    @classmethod
    def from_dict(cls, d):
        flexes = [FlexField(np.array(f["vectors"]), f["ambient"]) for f in d.get("flexes", [])]
        return cls(np.array(d["singular_values"]), int(d["kernel_dim"]), int(d["trivial_dim"]),
                   flexes, d.get("ambient", "euclidean"), float(d.get("tol", 1e-9)))


# -- matrices ---------------------------------------------------------------------

def tangent_frames(X):
    """Euclidean-orthonormal bases (n, 4, 3) of the Minkowski tangent spaces at X."""
    X = np.asarray(X, dtype=float)
    JX = X * np.array([-1.0, 1, 1, 1])
    frames = np.empty((len(X), 4, 3))
    for i, w in enumerate(JX):
        _, _, vt = np.linalg.svd(w[None, :])
        frames[i] = vt[1:].T
    return frames


def _positions(P: TriangulatedPolyhedron, ambient):
    if ambient == "euclidean":
        if P.model not in ("euclidean", "klein"):
            raise GeometryError(f"euclidean ambient needs affine coordinates, got {P.model}")
        return np.array(P.vertices)
    if P.model == "euclidean":
        raise GeometryError("minkowski ambient needs a klein, hyperboloid or de Sitter polyhedron")
    return P.minkowski_coords()


def rigidity_matrix(P: TriangulatedPolyhedron, ambient="euclidean", frames=None):
    """Edge-by-velocity matrix whose kernel is the space of isometric flexes.

    Euclidean rows are ``<p_i - p_j, q_i - q_j>``.  In the Minkowski ambient
    each velocity is written in a tangent frame (3 columns per vertex) and
    the rows are ``<p_i - p_j, E_i c_i - E_j c_j>_(3,1)``.
    """
    ambient = _ambient(ambient)
    X = _positions(P, ambient)
    n, m = len(X), len(P.edges)
    if ambient == "euclidean":
        R = np.zeros((m, 3 * n))
        for r, (i, j) in enumerate(P.edges):
            d = X[i] - X[j]
            R[r, 3 * i:3 * i + 3] = d
            R[r, 3 * j:3 * j + 3] = -d
        return R
    E = tangent_frames(X) if frames is None else frames
    R = np.zeros((m, 3 * n))
    for r, (i, j) in enumerate(P.edges):
        d = (X[i] - X[j]) * np.array([-1.0, 1, 1, 1])
        R[r, 3 * i:3 * i + 3] = d @ E[i]
        R[r, 3 * j:3 * j + 3] = -(d @ E[j])
    return R


def _killing_columns(X, ambient, frames):
    K = geo.killing_basis(X, ambient)
    if ambient == "euclidean":
        return K.reshape(6, -1)
    return np.einsum("fnd,ndk->fnk", K, frames).reshape(6, -1)


def _to_vectors(c, frames, ambient):
    c = c.reshape(-1, 3)
    if ambient == "euclidean":
        return c
    return np.einsum("ndk,nk->nd", frames, c)


def _to_coords(vectors, frames, ambient):
    v = np.asarray(vectors, dtype=float)
    if ambient == "euclidean":
        return v.reshape(-1)
    return np.einsum("ndk,nd->nk", frames, v).reshape(-1)


def flex_analysis(P: TriangulatedPolyhedron, ambient="euclidean", tol=1e-9) -> FlexReport:
    """Kernel, trivial subspace and nontrivial flexes of the rigidity matrix.

    Parameters
    ----------
    P : TriangulatedPolyhedron
    ambient : {"euclidean", "minkowski", "hyperbolic", "desitter"}
        The last three all select the tangent-frame Minkowski matrix.
    tol : float
        Singular values below ``tol * sigma_max`` count as zero.

    Returns
    -------
    FlexReport
        Nontrivial flexes are orthogonal to the Killing span and scaled to
        maximal vertex speed 1.
    """
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    amb = _ambient(ambient)
    X = _positions(P, amb)
    frames = None if amb == "euclidean" else tangent_frames(X)
    R = rigidity_matrix(P, amb, frames)
    ncols = R.shape[1]
    _, s, vt = np.linalg.svd(R)
    rank = int(np.sum(s >= tol * s[0])) if s.size else 0
    kernel = vt[rank:]
    kdim = ncols - rank

    K = _killing_columns(X, amb, frames)
    ks = np.linalg.svd(K, compute_uv=False)
    tdim = int(np.sum(ks >= 1e-9 * ks[0]))
    if tdim < 6:
        raise GeometryError("degenerate configuration: trivial motions have rank < 6")
    q, _ = np.linalg.qr(K.T)
    comp = kernel - (kernel @ q) @ q.T
    flexes = []
    if kdim > tdim:
        u, cs, _ = np.linalg.svd(comp.T, full_matrices=False)
        for c in u[:, :kdim - tdim].T:
            f = FlexField(_to_vectors(c, frames, amb), "minkowski" if amb == "minkowski" else "euclidean")
            flexes.append(f.normalized())
    out_amb = "minkowski" if amb == "minkowski" else "euclidean"
    return FlexReport(s, kdim, tdim, flexes, out_amb, tol)


def killing_fields(P: TriangulatedPolyhedron, ambient="euclidean"):
    """The six Killing fields at the vertices as :class:`FlexField` objects."""
    amb = _ambient(ambient)
    X = _positions(P, amb)
    K = geo.killing_basis(X, amb)
    return [FlexField(k, "minkowski" if amb == "minkowski" else "euclidean") for k in K]


def killing_complement_norm(P, flex: FlexField):
    """Norm of the part of ``flex`` orthogonal to the Killing span."""
    amb = "minkowski" if flex.ambient == "minkowski" else "euclidean"
    X = _positions(P, amb)
    K = geo.killing_basis(X, amb).reshape(6, -1)
    q, _ = np.linalg.qr(K.T)
    v = flex.vectors.reshape(-1)
    return float(np.linalg.norm(v - q @ (q.T @ v)))


# -- residuals and the Pogorelov map ------------------------------------------

def lift_klein_velocity(p, v):
    """Velocity on the quadric of the lifted trajectory ``t -> lift(p + t v)``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    g = 1.0 - np.sum(p * p, axis=-1)
    if np.any(np.abs(g) < 1e-12):
        raise GeometryError("point on the unit sphere")
    r = np.sqrt(np.abs(g))
    pv = np.sum(p * v, axis=-1)
    ones = np.ones(p.shape[:-1] + (1,))
    zeros = np.zeros(p.shape[:-1] + (1,))
    return (np.concatenate([zeros, v], -1) / r[..., None]
            + np.concatenate([ones, p], -1) * (pv / (g * r))[..., None])


def as_minkowski_field(P: TriangulatedPolyhedron, flex: FlexField) -> FlexField:
    if flex.ambient == "minkowski":
        return flex
    if flex.ambient == "klein":
        return FlexField(lift_klein_velocity(P.klein_coords(), flex.vectors), "minkowski")
    raise GeometryError("a euclidean field has no Minkowski meaning; apply the Pogorelov map first")


def flex_residual(P: TriangulatedPolyhedron, flex: FlexField) -> float:
    """Largest first-order change of a squared edge length (and tangency defect)."""
    if flex.ambient == "euclidean":
        if P.model not in ("euclidean", "klein"):
            raise GeometryError("euclidean field on a non-affine polyhedron")
        v, q = P.vertices, flex.vectors
        return float(max(abs(np.dot(v[i] - v[j], q[i] - q[j])) for i, j in P.edges))
    X = P.minkowski_coords()
    Q = as_minkowski_field(P, flex).vectors
    res = [abs(geo.minkowski_dot(X[i] - X[j], Q[i] - Q[j])) for i, j in P.edges]
    res.append(float(np.abs(geo.minkowski_dot(X, Q)).max()))
    return float(max(res))


def pogorelov_velocity(p, q):
    """Klein-chart velocity ``q - (p . q) p`` of the transferred deformation.

    Works for points inside (hyperbolic) and outside (de Sitter) the unit
    ball; rejects points on the sphere.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(np.abs(np.sum(p * p, axis=-1) - 1.0) <= 1e-12):
        raise GeometryError("Pogorelov map is undefined on the unit sphere")
    return q - np.sum(p * q, axis=-1)[..., None] * p


def pogorelov_transfer(P: TriangulatedPolyhedron, flex: FlexField) -> FlexField:
    """Map a Euclidean flex of ``P`` (read in the Klein chart) to a Minkowski flex."""
    if flex.ambient != "euclidean":
        raise FlexError("Pogorelov transfer expects a euclidean field")
    p = P.klein_coords()
    v = pogorelov_velocity(p, flex.vectors)
    return FlexField(lift_klein_velocity(p, v), "minkowski")


# -- angle variations -------------------------------------------------------------

def trajectory(P: TriangulatedPolyhedron, flex: FlexField, t):
    """Polyhedron moved to time ``t`` along the straight trajectory of ``flex``.

    Euclidean and Klein fields move affine positions linearly; Minkowski
    fields move ``X + tQ`` and are read back in the Klein chart.
    """
    if flex.ambient in ("euclidean", "klein"):
        return P.with_vertices(P.klein_coords() + t * flex.vectors,
                               "euclidean" if P.model == "euclidean" else "klein")
    X = P.minkowski_coords() + t * flex.vectors
    return P.with_vertices(geo.projective_to_klein(X), "klein")


def angle_variation(P: TriangulatedPolyhedron, flex: FlexField, h=1e-5, tol=1e-6):
    """Central-difference derivative of every dihedral angle along ``flex``."""
    scale = flex.max_speed
    if scale == 0:
        return np.zeros(len(P.edges))
    res = flex_residual(P, flex) / scale
    if res > tol:
        raise FlexError(f"field is not an isometric flex (residual {res:.3g})")
    plus = dihedral_angles(trajectory(P, flex, h))
    minus = dihedral_angles(trajectory(P, flex, -h))
    return (plus - minus) / (2 * h)


# -- Blaschke-Liebmann ------------------------------------------------------------

@dataclass
class BLReport:
    det_black: float
    det_white: float
    tol: float = 1e-8

    @property
    def flexible(self):
        return abs(self.det_black) < self.tol

    @property
    def verdict(self):
        return "flexible" if self.flexible else "rigid"

    def to_dict(self):
        return {"det_black": self.det_black, "det_white": self.det_white,
                "tol": self.tol, "verdict": self.verdict}


def octahedral_coloring(P: TriangulatedPolyhedron):
    """Check octahedral combinatorics and return a proper 2-coloring of faces."""
    if P.n_vertices != 6 or len(P.faces) != 8:
        raise ValidationError("not combinatorially an octahedron (need 6 vertices, 8 faces)")
    deg = np.zeros(6, int)
    for i, j in P.edges:
        deg[i] += 1
        deg[j] += 1
    if np.any(deg != 4):
        raise ValidationError("not combinatorially an octahedron (vertex degrees must be 4)")
    if P.coloring is not None:
        return P.coloring
    col = [None] * 8
    col[0] = "black"
    stack = [0]
    while stack:
        k = stack.pop()
        for e in P.edges:
            f1, f2 = P.edge_faces[e]
            if k in (f1, f2):
                m = f2 if k == f1 else f1
                if col[m] is None:
                    col[m] = "white" if col[k] == "black" else "black"
                    stack.append(m)
    return tuple(col)


def blaschke_liebmann(P: TriangulatedPolyhedron, tol=1e-8) -> BLReport:
    """Concurrency determinants of the black and of the white face planes."""
    col = octahedral_coloring(P)
    rows = {"black": [], "white": []}
    for k in range(8):
        rows[col[k]].append(face_plane(P, k).row)
    if len(rows["black"]) != 4:
        raise ValidationError("coloring must have 4 black and 4 white faces")
    return BLReport(float(np.linalg.det(np.array(rows["black"]))),
                    float(np.linalg.det(np.array(rows["white"]))), tol)
