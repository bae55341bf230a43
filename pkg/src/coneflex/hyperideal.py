"""Truncated hyperideal polyhedra: polar truncation, metrics, flexes, tube distances."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import kernels
from .errors import GeometryError, ValidationError
from .polyhedron import TriangulatedPolyhedron, _minkowski_unsigned
from .polyhedron import from_dict as poly_from_dict, to_dict as poly_to_dict
from .rigidity import FlexReport, flex_analysis


@dataclass(frozen=True, eq=False)
class TruncatedHyperidealPolyhedron:
    """Compact polyhedron left after cutting every hyperideal end along its polar plane.

    Attributes
    ----------
    source : TriangulatedPolyhedron
        Klein-model polyhedron with all vertices outside the unit ball.
    lifts : ndarray (n, 4)
        De Sitter points of the source vertices.
    planes : list of Plane
        Polar plane of each source vertex (Klein coordinates).
    points : ndarray (m, 4)
        Truncation vertices on the hyperboloid.
    index : dict
        ``(i, j) -> k`` with ``points[k]`` the vertex on plane ``i`` along edge ``ij``.
    old_faces : list of 6-tuples
        Right-angled hexagons, one per source face, in the source orientation.
    new_faces : list of tuples
        One polygon per source vertex, oriented outward.
    old_edges, new_edges : list of pairs of point indices
    """

    source: TriangulatedPolyhedron
    lifts: np.ndarray
    planes: list
    points: np.ndarray
    index: dict
    old_faces: list
    new_faces: list
    old_edges: list
    new_edges: list

    @property
    def counts(self):
        V = len(self.points)
        E = len(self.old_edges) + len(self.new_edges)
        F = len(self.old_faces) + len(self.new_faces)
        return V, E, F

    @property
    def euler_characteristic(self):
        V, E, F = self.counts
        return V - E + F

    def klein_points(self):
        return geo.projective_to_klein(self.points)

    def to_dict(self):
        src = self.source
        return {
            "source": poly_to_dict(src.with_vertices(src.klein_coords(), "klein")),
            "points": self.points.tolist(),
            "point_edges": [[i, j] for (i, j), _ in sorted(self.index.items(), key=lambda kv: kv[1])],
            "old_faces": [list(f) for f in self.old_faces],
            "new_faces": [list(f) for f in self.new_faces],
            "old_edges": [list(e) for e in self.old_edges],
            "new_edges": [list(e) for e in self.new_edges],
        }


def _link_cycle(P, v):
    """Neighbours of ``v`` in the cyclic order induced by the face orientation."""
    succ = {}
    for f in P.faces:
        if v in f:
            a = f.index(v)
            succ[f[(a + 1) % 3]] = f[(a + 2) % 3]
    start = next(iter(succ))
    cyc = [start]
    while succ[cyc[-1]] != start:
        cyc.append(succ[cyc[-1]])
        if len(cyc) > len(succ):
            raise ValidationError(f"link of vertex {v} is not a cycle")
    return cyc


def truncation_parameter(pi, pj):
    """Affine parameter ``s`` of the point of segment ``pi pj`` on the polar plane of ``pi``."""
    a = float(np.dot(pi, pi))
    return (a - 1.0) / (a - float(np.dot(pi, pj)))


def truncate(P: TriangulatedPolyhedron) -> TruncatedHyperidealPolyhedron:
    """Cut off the hyperideal ends of a Klein-model polyhedron along polar planes.

    Raises
    ------
    GeometryError
        A vertex is not outside the unit ball, or an edge misses the open ball.
    """
    if P.model not in ("klein", "desitter"):
        raise ValidationError("truncation needs a klein (or de Sitter) polyhedron")
    v = P.klein_coords()
    r = np.linalg.norm(v, axis=1)
    inside = np.flatnonzero(r <= 1 + 1e-9)
    if inside.size:
        raise GeometryError(f"vertex {inside[0]} is not hyperideal (|p| = {r[inside[0]]:.6g})")
    lifts = geo.klein_to_desitter(v)
    for i, j in P.edges:
        c = geo.minkowski_dot(lifts[i], lifts[j])
        if c >= -1.0 - 1e-12:
            raise GeometryError(f"edge ({i},{j}) misses the open unit ball (<p_i,p_j> = {c:.6g})")
    planes = [geo.polar_plane(p) for p in v]

    index, pts = {}, []
    for i, j in P.edges:
        for a, b in ((i, j), (j, i)):
            s = truncation_parameter(v[a], v[b])
            index[(a, b)] = len(pts)
            pts.append(v[a] + s * (v[b] - v[a]))
    points = geo.klein_to_hyperboloid(np.array(pts))

    old_faces, new_edges = [], []
    for i, j, k in P.faces:
        hexagon = (index[(i, j)], index[(j, i)], index[(j, k)], index[(k, j)], index[(k, i)], index[(i, k)])
        old_faces.append(hexagon)
    new_faces = []
    kp = geo.projective_to_klein(points)
    for i in range(P.n_vertices):
        cyc = [index[(i, j)] for j in _link_cycle(P, i)]
        q = kp[cyc]
        n = np.zeros(3)
        for a in range(len(q)):
            n += np.cross(q[a], q[(a + 1) % len(q)])
        if np.dot(n, v[i] - q.mean(0)) < 0:
            cyc = cyc[::-1]
        new_faces.append(tuple(cyc))
        for a in range(len(cyc)):
            e = (cyc[a], cyc[(a + 1) % len(cyc)])
            new_edges.append((min(e), max(e)))
    old_edges = [(index[(i, j)], index[(j, i)]) for i, j in P.edges]
    return TruncatedHyperidealPolyhedron(P, lifts, planes, points, index, old_faces,
                                         new_faces, old_edges, sorted(new_edges))


# -- metrics -------------------------------------------------------------------

def _face_normal(kp, face):
    n = np.zeros(3)
    for a in range(len(face)):
        n += np.cross(kp[face[a]], kp[face[(a + 1) % len(face)]])
    return n


def _faces_at(T, u, w):
    out = []
    for kind, faces in (("old", T.old_faces), ("new", T.new_faces)):
        for k, f in enumerate(faces):
            m = len(f)
            for a in range(m):
                if f[a] == u and f[(a + 1) % m] == w:
                    out.append((kind, k, f))
    return out


def _inward_point(kp, face, u, w):
    """A Klein point in the half-plane of ``face`` bounded by its edge ``u -> w``."""
    n = _face_normal(kp, face)
    d = np.cross(n, kp[w] - kp[u])
    d /= np.linalg.norm(d)
    L = np.linalg.norm(kp[w] - kp[u])
    return 0.5 * (kp[u] + kp[w]) + 1e-3 * L * d


def edge_dihedral(T: TruncatedHyperidealPolyhedron, u, w):
    """Hyperbolic interior dihedral angle at the edge ``u w`` of ``T``.

    Faces may be non-convex polygons, so each half-plane is sampled just
    inside the edge instead of at an arbitrary polygon vertex.
    """
    f1 = _faces_at(T, u, w)
    f2 = _faces_at(T, w, u)
    if len(f1) != 1 or len(f2) != 1:
        raise ValidationError(f"({u},{w}) is not an edge of the truncated polyhedron")
    F1, F2 = f1[0][2], f2[0][2]
    kp = T.klein_points()
    x1 = _inward_point(kp, F1, u, w)
    x2 = _inward_point(kp, F2, w, u)
    X = np.vstack([T.points[[u, w]], geo.klein_to_hyperboloid(np.array([x1, x2]))])
    phi = _minkowski_unsigned(X, 0, 1, 2, 3)
    n = _face_normal(kp, F1)
    reflex = float(np.dot(n, x2 - kp[u])) > 0
    return 2 * np.pi - phi if reflex else phi


def polygon_angles(X, face):
    """Hyperbolic interior angles of a polygon with hyperboloid vertices."""
    out = []
    m = len(face)
    for a in range(m):
        x, y, z = X[face[a]], X[face[a - 1]], X[face[(a + 1) % m]]
        u = y + geo.minkowski_dot(x, y) * x
        v = z + geo.minkowski_dot(x, z) * x
        c = geo.minkowski_dot(u, v) / np.sqrt(geo.minkowski_dot(u, u) * geo.minkowski_dot(v, v))
        out.append(float(np.arccos(np.clip(c, -1, 1))))
    return out


def hexagon_new_lengths(old):
    """New side lengths of the right-angled hexagon with alternate sides ``old``.

    ``old[k]`` is the distance between the lines carrying new sides ``k+1``
    and ``k+2`` (indices mod 3).  The three lines are realized in R^{2,1}
    from their Gram matrix and the new sides are measured between feet of
    common perpendiculars.  Returns ``new`` with ``new[k]`` on line ``k``.
    """
    a = np.asarray(old, dtype=float)
    G = np.eye(3)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        G[i, j] = G[j, i] = -np.cosh(a[k])
    lam, V = np.linalg.eigh(G)
    if not (lam[0] < 0 < lam[1]):
        raise GeometryError("old lengths do not bound a right-angled hexagon")
    N = np.sqrt(np.abs(lam))[:, None] * V.T          # columns are the line normals
    J = np.diag([-1.0, 1.0, 1.0])

    def foot(i, j):
        x = N[:, j] - (N[:, i] @ J @ N[:, j]) * N[:, i]
        x = x / np.sqrt(-(x @ J @ x))
        return x if x[0] > 0 else -x

    new = np.empty(3)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        c = -(foot(i, j) @ J @ foot(i, k))
        new[i] = np.arccosh(max(c, 1.0))
    return new


def hexagon_new_lengths_closed_form(old):
    """Oracle: ``cosh new_k = (cosh a_{k+1} cosh a_{k+2} + cosh a_k) / (sinh a_{k+1} sinh a_{k+2})``.

    With ``old[k]`` opposite to ``new[k]``.
    """
    a = np.asarray(old, dtype=float)
    out = np.empty(3)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        out[k] = np.arccosh((np.cosh(a[i]) * np.cosh(a[j]) + np.cosh(a[k])) / (np.sinh(a[i]) * np.sinh(a[j])))
    return out


def hexagon_jacobian(old, h=1e-6):
    """Finite-difference Jacobian of old lengths -> new lengths."""
    old = np.asarray(old, dtype=float)
    Jm = np.empty((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        Jm[:, k] = (hexagon_new_lengths(old + e) - hexagon_new_lengths(old - e)) / (2 * h)
    return Jm


def _hexagon_sides(T, face):
    X = T.points
    return [float(geo.hyp_distance(X[face[a]], X[face[(a + 1) % 6]])) for a in range(6)]


def truncated_metrics(T: TruncatedHyperidealPolyhedron, tol=1e-9) -> dict:
    """Edge lengths, dihedral angles and right-angled hexagon checks of ``T``.

    Old edge lengths are measured directly and through the de Sitter
    products; the two must agree within ``tol``.
    """
    X = T.points
    direct = np.array([geo.hyp_distance(X[a], X[b]) for a, b in T.old_edges])
    dual = np.array([geo.dual_plane_distance(T.lifts[i], T.lifts[j]) for i, j in T.source.edges])
    if np.abs(direct - dual).max() > tol:
        raise GeometryError("old edge lengths disagree between the two formulas")
    old_dihedral = np.array([edge_dihedral(T, *_oriented(T, e)) for e in T.old_edges])
    new_dihedral = np.array([edge_dihedral(T, *_oriented(T, e)) for e in T.new_edges])
    new_face_lengths = [sorted(float(geo.hyp_distance(X[f[a]], X[f[(a + 1) % len(f)]]))
                               for a in range(len(f))) for f in T.new_faces]
    hex_angles = [polygon_angles(X, f) for f in T.old_faces]
    hex_dev = max(abs(a - np.pi / 2) for angs in hex_angles for a in angs)

    sides = [_hexagon_sides(T, f) for f in T.old_faces]
    # sides alternate old (0, 2, 4) and new (1, 3, 5); the new sides lie on
    # the polar lines of i, j, k as sides 5, 1, 3
    s = sides[0]
    old0 = np.array([s[2], s[4], s[0]])
    measured_new = np.array([s[5], s[1], s[3]])
    coord_new = hexagon_new_lengths(old0)
    jac = hexagon_jacobian(old0)
    sv = np.linalg.svd(jac, compute_uv=False)
    return {
        "old_lengths": direct.tolist(),
        "old_lengths_dual": dual.tolist(),
        "length_agreement": float(np.abs(direct - dual).max()),
        "old_dihedral": old_dihedral.tolist(),
        "new_dihedral_max_dev": float(np.abs(new_dihedral - np.pi / 2).max()),
        "new_face_lengths": new_face_lengths,
        "hexagon": {
            "max_right_angle_dev": float(hex_dev),
            "sides_face0": sides[0],
            "measured_new_face0": measured_new.tolist(),
            "reconstructed_new_face0": coord_new.tolist(),
            "jacobian_singular_values": sv.tolist(),
            "jacobian_condition": float(sv[0] / sv[-1]),
            "jacobian_nondegenerate": bool(sv[-1] > 1e-8 * max(1.0, sv[0])),
        },
    }


def _oriented(T, e):
    a, b = e
    return (a, b) if _faces_at(T, a, b) else (b, a)


def old_edge_dihedrals(T: TruncatedHyperidealPolyhedron):
    """Dihedral angle of ``T`` at each old edge (ordered as the source edges)."""
    return np.array([edge_dihedral(T, *_oriented(T, e)) for e in T.old_edges])


def old_edge_lengths(T: TruncatedHyperidealPolyhedron):
    return np.array([geo.dual_plane_distance(T.lifts[i], T.lifts[j]) for i, j in T.source.edges])


def truncated_flex_analysis(T: TruncatedHyperidealPolyhedron, tol=1e-9) -> FlexReport:
    """Flex analysis of the de Sitter vertex configuration of ``T``."""
    return flex_analysis(T.source, "desitter", tol)


def min_tube_distance(T: TruncatedHyperidealPolyhedron, tol=1e-10) -> dict:
    """Smallest distance between two old edges (all unordered pairs)."""
    X = T.points
    frames = []
    for a, b in T.old_edges:
        w, length = geo.tangent_towards(X[a], X[b])
        frames.append((X[a], w, length))
    pairs, grams = [], []
    for i in range(len(frames)):
        for j in range(i + 1, len(frames)):
            u1, w1, _ = frames[i]
            u2, w2, _ = frames[j]
            pairs.append((i, j))
            grams.append([geo.minkowski_dot(u1, u2), geo.minkowski_dot(u1, w2),
                          geo.minkowski_dot(w1, u2), geo.minkowski_dot(w1, w2)])
    lengths = np.array([f[2] for f in frames])
    res = kernels.pairwise_segment_cosh_min(np.array(grams), lengths, np.array(pairs, dtype=np.int64), tol)
    d = np.arccosh(np.maximum(res[:, 0], 1.0))
    k = int(np.argmin(d))
    i, j = pairs[k]
    E = T.source.edges
    return {"min_distance": float(d[k]), "edge_pair": [list(E[i]), list(E[j])],
            "bound": float(np.arctanh(1 / np.sqrt(3))), "distances": d.tolist(),
            "pairs": [[list(E[a]), list(E[b])] for a, b in pairs]}


def dumps(T: TruncatedHyperidealPolyhedron) -> str:
    return json.dumps(T.to_dict(), indent=2)


def loads(text: str) -> TruncatedHyperidealPolyhedron:
    d = json.loads(text)
    src = dict(d["source"] if "source" in d else d)
    src.setdefault("space", "klein")
    return truncate(poly_from_dict(src))
