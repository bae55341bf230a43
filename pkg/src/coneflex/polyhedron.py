"""Closed triangulated surfaces with coordinates: validation, planes, angles, I/O."""
from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import GeometryError, ValidationError

SPACES = ("euclidean", "klein", "hyperboloid", "desitter")


@dataclass(frozen=True, eq=False)
class TriangulatedPolyhedron:
    """An oriented closed triangulated surface with vertex coordinates.

    Attributes
    ----------
    vertices : ndarray, shape (n, 3) or (n, 4)
        Model coordinates; 4-vectors for the hyperboloid and de Sitter models.
    faces : tuple of (i, j, k)
        Oriented counterclockwise when seen from outside (positive volume).
    model : str
        One of ``euclidean``, ``klein``, ``hyperboloid``, ``desitter``.
    coloring : tuple of str or None
        ``"black"``/``"white"`` per face, adjacent faces differently colored.
    labels : tuple of str or None
        Optional vertex names.
    """

    vertices: np.ndarray
    faces: tuple
    model: str = "euclidean"
    coloring: tuple | None = None
    labels: tuple | None = None
    edges: tuple = field(init=False)
    edge_faces: dict = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", tuple(tuple(int(x) for x in f) for f in self.faces))
        edges, edge_faces = _edge_table(self.faces)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "edge_faces", edge_faces)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def euler_characteristic(self):
        return self.n_vertices - len(self.edges) + len(self.faces)

    def klein_coords(self):
        """Vertex positions in the affine chart (identity for euclidean/klein)."""
        if self.model in ("euclidean", "klein"):
            return np.array(self.vertices)
        return geo.projective_to_klein(self.vertices)

    def minkowski_coords(self):
        """Vertices on the hyperboloid or de Sitter quadric (klein points lifted)."""
        if self.model in ("hyperboloid", "desitter"):
            return np.array(self.vertices)
        if self.model == "klein":
            return geo.klein_lift(self.vertices)
        raise GeometryError("euclidean polyhedron has no Minkowski coordinates")

    def vertex_label(self, i):
        return self.labels[i] if self.labels else str(i)

    def face_index(self, verts):
        key = frozenset(verts)
        for k, f in enumerate(self.faces):
            if frozenset(f) == key:
                return k
        raise KeyError(f"no face with vertices {sorted(verts)}")

    def edge_index(self, i, j):
        return self.edges.index((min(i, j), max(i, j)))

    def with_vertices(self, vertices, model=None):
        """Same combinatorics, new coordinates (validation is skipped)."""
        return TriangulatedPolyhedron(vertices, self.faces, model or self.model,
                                      self.coloring, self.labels)


def _edge_table(faces):
    directed = defaultdict(list)
    for k, f in enumerate(faces):
        for a in range(3):
            directed[(f[a], f[(a + 1) % 3])].append(k)
    edge_faces = {}
    for (i, j), fs in directed.items():
        if i < j:
            back = directed.get((j, i), [])
            edge_faces[(i, j)] = (fs[0], back[0] if back else -1)
    for (i, j) in directed:
        if i > j and (j, i) not in directed:
            edge_faces[(j, i)] = (-1, directed[(i, j)][0])
    edges = tuple(sorted(edge_faces))
    return edges, edge_faces


def _parse_coloring(coloring, n_faces):
    if coloring is None:
        return None
    if isinstance(coloring, dict):
        col = [None] * n_faces
        for name in ("black", "white"):
            for k in coloring.get(name, []):
                if not 0 <= k < n_faces:
                    raise ValidationError(f"coloring refers to face {k} out of range")
                if col[k] is not None:
                    raise ValidationError(f"face {k} colored twice")
                col[k] = name
        if any(c is None for c in col):
            raise ValidationError("coloring must cover every face")
        return tuple(col)
    col = tuple(str(c) for c in coloring)
    if len(col) != n_faces or not set(col) <= {"black", "white"}:
        raise ValidationError("coloring needs one of black/white per face")
    return col


def orient_faces(faces):
    """Reorder vertex triples so that orientations agree across every edge.

    Breadth-first propagation from face 0; raises if the surface is
    non-orientable.
    """
    faces = [list(f) for f in faces]
    by_edge = defaultdict(list)
    for k, f in enumerate(faces):
        for a in range(3):
            by_edge[frozenset((f[a], f[(a + 1) % 3]))].append(k)
    done = [False] * len(faces)
    for start in range(len(faces)):
        if done[start]:
            continue
        done[start] = True
        queue = deque([start])
        while queue:
            k = queue.popleft()
            f = faces[k]
            for a in range(3):
                i, j = f[a], f[(a + 1) % 3]
                for m in by_edge[frozenset((i, j))]:
                    if m == k:
                        continue
                    g = faces[m]
                    same = any(g[b] == i and g[(b + 1) % 3] == j for b in range(3))
                    if done[m]:
                        if same:
                            raise ValidationError("surface is not orientable")
                        continue
                    if same:
                        g.reverse()
                    done[m] = True
                    queue.append(m)
    return [tuple(f) for f in faces]


def signed_volume(points, faces):
    p = np.asarray(points, dtype=float)
    return sum(float(np.dot(p[a], np.cross(p[b], p[c]))) for a, b, c in faces) / 6.0


def build_polyhedron(vertices, faces, model="euclidean", coloring=None, labels=None):
    """Validate and build a :class:`TriangulatedPolyhedron`.

    Faces are reoriented as a whole so that the enclosed signed volume is
    positive (outward normals).  Half-space coordinates are converted to the
    hyperboloid model.

    Raises
    ------
    ValidationError
        Index out of range, non-manifold edge, inconsistent orientation,
        invalid coloring.
    GeometryError
        Degenerate face or points off the model's domain.
    """
    if model == "halfspace":
        vertices = [geo.halfspace_to_hyperboloid(v) for v in vertices]
        model = "hyperboloid"
    if model not in SPACES:
        raise ValidationError(f"unknown space {model!r}")
    v = np.asarray(vertices, dtype=float)
    dim = 4 if model in ("hyperboloid", "desitter") else 3
    if v.ndim != 2 or v.shape[1] != dim:
        raise ValidationError(f"{model} vertices must have {dim} coordinates")
    if not np.all(np.isfinite(v)):
        raise ValidationError("non-finite vertex coordinates")
    n = len(v)
    fl = []
    for k, f in enumerate(faces):
        f = tuple(f)
        if len(f) != 3:
            raise ValidationError(f"face {k} is not a triangle: {f}")
        if any((not isinstance(x, (int, np.integer))) or not 0 <= x < n for x in f):
            raise ValidationError(f"face {k} has a vertex index out of range: {f}")
        if len(set(f)) != 3:
            raise ValidationError(f"face {k} repeats a vertex: {f}")
        fl.append(tuple(int(x) for x in f))
    if len(set(frozenset(f) for f in fl)) != len(fl):
        raise ValidationError("duplicate face")

    count = defaultdict(list)
    directed = defaultdict(list)
    for k, f in enumerate(fl):
        for a in range(3):
            i, j = f[a], f[(a + 1) % 3]
            count[(min(i, j), max(i, j))].append(k)
            directed[(i, j)].append(k)
    for e, ks in count.items():
        if len(ks) != 2:
            raise ValidationError(f"edge {e} lies in {len(ks)} faces (faces {ks}); need 2")
    for (i, j), ks in directed.items():
        if len(ks) > 1:
            raise ValidationError(
                f"faces {ks} traverse edge ({i},{j}) in the same direction: inconsistent orientation")

    if model == "hyperboloid":
        sq = geo.minkowski_norm2(v)
        if np.any(np.abs(sq + 1) > 1e-9) or np.any(v[:, 0] <= 0):
            raise GeometryError("hyperboloid vertices must satisfy <x,x> = -1, x0 > 0")
    if model == "desitter":
        if np.any(np.abs(geo.minkowski_norm2(v) - 1) > 1e-9):
            raise GeometryError("de Sitter vertices must satisfy <x,x> = +1")
        if np.any(np.abs(v[:, 0]) < 1e-14):
            raise GeometryError("de Sitter vertices need x0 != 0 to have an affine image")

    pts = v if dim == 3 else geo.projective_to_klein(v)
    diam2 = max(float(np.sum((pts[i] - pts[j]) ** 2)) for i in range(n) for j in range(i + 1, n))
    for k, (a, b, c) in enumerate(fl):
        area = 0.5 * np.linalg.norm(np.cross(pts[b] - pts[a], pts[c] - pts[a]))
        if area < 1e-14 * diam2:
            raise GeometryError(f"face {k} is degenerate (area {area:.3g})")

    if signed_volume(pts, fl) < 0:
        fl = [(a, c, b) for a, b, c in fl]

    col = _parse_coloring(coloring, len(fl))
    if col is not None:
        for e, (f1, f2) in count.items():
            if col[f1] == col[f2]:
                raise ValidationError(f"adjacent faces {f1} and {f2} share color {col[f1]}")
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise ValidationError("need one label per vertex")
    return TriangulatedPolyhedron(v, tuple(fl), model, col, labels)


# -- planes and angles ---------------------------------------------------------

def face_plane(P: TriangulatedPolyhedron, face) -> geo.Plane:
    """Plane of a face in affine coordinates, normal pointing outward."""
    f = P.faces[face] if isinstance(face, (int, np.integer)) else tuple(face)
    pts = P.klein_coords()
    a, b, c = pts[f[0]], pts[f[1]], pts[f[2]]
    n = np.cross(b - a, c - a)
    if np.linalg.norm(n) < 1e-14 * max(1.0, np.abs(pts).max() ** 2):
        raise GeometryError(f"face {f} has collinear vertices")
    return geo.Plane.from_coefficients(n, float(np.dot(n, a)))


def _edge_wedge(P, edge):
    i, j = edge
    key = (min(i, j), max(i, j))
    if key not in P.edge_faces:
        raise ValidationError(f"{edge} is not an edge")
    i, j = key
    f1, f2 = P.edge_faces[key]
    k = next(x for x in P.faces[f1] if x not in key)
    l = next(x for x in P.faces[f2] if x not in key)
    return i, j, k, l, f1


def _is_reflex(pts, face, l):
    a, b, c = pts[face[0]], pts[face[1]], pts[face[2]]
    n = np.cross(b - a, c - a)
    return float(np.dot(n, pts[l] - a)) > 0.0


def _euclidean_unsigned(pts, i, j, k, l):
    e = pts[j] - pts[i]
    e = e / np.linalg.norm(e)
    u1 = pts[k] - pts[i]
    u2 = pts[l] - pts[i]
    u1 = u1 - np.dot(u1, e) * e
    u2 = u2 - np.dot(u2, e) * e
    n1, n2 = np.linalg.norm(u1), np.linalg.norm(u2)
    if n1 < 1e-15 or n2 < 1e-15:
        raise GeometryError("degenerate face at edge")
    return float(np.arctan2(np.linalg.norm(np.cross(u1, u2)), np.dot(u1, u2)))


def _minkowski_unsigned(X, i, j, k, l):
    """Angle at the line span(X_i, X_j) between the half-planes towards X_k, X_l."""
    B = np.stack([X[i], X[j]], axis=1)                  # 4 x 2
    JB = geo.MINKOWSKI @ B
    G = B.T @ JB
    if np.linalg.det(G) >= 0:
        raise GeometryError("edge line does not meet hyperbolic space")

    def perp(v):
        return v - B @ np.linalg.solve(G, JB.T @ v)

    u1, u2 = perp(X[k]), perp(X[l])
    a11 = geo.minkowski_dot(u1, u1)
    a22 = geo.minkowski_dot(u2, u2)
    a12 = geo.minkowski_dot(u1, u2)
    if a11 <= 0 or a22 <= 0:
        raise GeometryError("degenerate face at edge")
    cross = np.sqrt(max(a11 * a22 - a12 * a12, 0.0))
    return float(np.arctan2(cross, a12))


def dihedral_angle(P: TriangulatedPolyhedron, edge) -> float:
    """Interior dihedral angle at ``edge`` in (0, 2*pi).

    Euclidean metric for euclidean polyhedra, hyperbolic metric otherwise.
    The angle between the two face half-planes is folded to a reflex value
    when the far vertex of one face lies outside the plane of the other.
    """
    i, j, k, l, f1 = _edge_wedge(P, edge)
    pts = P.klein_coords()
    if P.model == "euclidean":
        phi = _euclidean_unsigned(pts, i, j, k, l)
    else:
        X = np.concatenate([np.ones((len(pts), 1)), pts], axis=1)
        phi = _minkowski_unsigned(X, i, j, k, l)
    return 2 * np.pi - phi if _is_reflex(pts, P.faces[f1], l) else phi


def dihedral_angles(P: TriangulatedPolyhedron) -> np.ndarray:
    return np.array([dihedral_angle(P, e) for e in P.edges])


def edge_lengths(P: TriangulatedPolyhedron) -> np.ndarray:
    """Edge lengths in the ambient metric (euclidean or hyperbolic)."""
    if P.model == "euclidean":
        v = P.vertices
        return np.array([np.linalg.norm(v[i] - v[j]) for i, j in P.edges])
    if P.model == "desitter":
        raise GeometryError("edges between de Sitter points have no hyperbolic length")
    X = P.minkowski_coords()
    return np.array([geo.hyp_distance(X[i], X[j]) for i, j in P.edges])


# -- combinatorial symmetry ------------------------------------------------------

def combinatorial_automorphisms(P: TriangulatedPolyhedron):
    """All vertex permutations preserving the face set (including reflections).

    A permutation is determined by the image of one ordered face; images are
    propagated across edges.  Returns a list of integer arrays.
    """
    faces = P.faces
    face_set = {frozenset(f) for f in faces}
    opposite = {}
    for f in faces:
        for a in range(3):
            i, j, k = f[a], f[(a + 1) % 3], f[(a + 2) % 3]
            opposite.setdefault(frozenset((i, j)), []).append(k)
    f0 = faces[0]
    result = []
    for g in faces:
        for perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2)):
            img = {f0[a]: g[perm[a]] for a in range(3)}
            queue = deque([f0])
            seen = {frozenset(f0)}
            ok = True
            while queue and ok:
                f = queue.popleft()
                for a in range(3):
                    i, j = f[a], f[(a + 1) % 3]
                    for x in opposite[frozenset((i, j))]:
                        if x in f:
                            continue
                        y = [z for z in opposite[frozenset((img[i], img[j]))] if z not in
                             (img[f[(a + 2) % 3]],)]
                        if len(y) != 1:
                            ok = False
                            break
                        if x in img and img[x] != y[0]:
                            ok = False
                            break
                        img[x] = y[0]
                        nf = frozenset((i, j, x))
                        if nf not in seen:
                            seen.add(nf)
                            queue.append((i, j, x))
                    if not ok:
                        break
            if not ok or len(img) != P.n_vertices or len(set(img.values())) != P.n_vertices:
                continue
            if {frozenset(img[x] for x in f) for f in faces} != face_set:
                continue
            result.append(np.array([img[x] for x in range(P.n_vertices)]))
    return result


# -- I/O ------------------------------------------------------------------------

def to_dict(P: TriangulatedPolyhedron) -> dict:
    d = {"space": P.model, "vertices": P.vertices.tolist(), "faces": [list(f) for f in P.faces]}
    if P.coloring is not None:
        d["coloring"] = {
            "black": [k for k, c in enumerate(P.coloring) if c == "black"],
            "white": [k for k, c in enumerate(P.coloring) if c == "white"],
        }
    if P.labels is not None:
        d["labels"] = list(P.labels)
    return d


def from_dict(d: dict) -> TriangulatedPolyhedron:
    for key in ("space", "vertices", "faces"):
        if key not in d:
            raise ValidationError(f"missing field {key!r}")
    faces = d["faces"]
    if not isinstance(faces, list):
        raise ValidationError("field 'faces' must be an array")
    for k, f in enumerate(faces):
        if not isinstance(f, list) or len(f) != 3 or not all(isinstance(x, int) for x in f):
            raise ValidationError(f"faces[{k}] must be an array of 3 integers, got {f!r}")
    try:
        verts = np.array(d["vertices"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"field 'vertices' is not numeric: {exc}") from None
    return build_polyhedron(verts, faces, d["space"], d.get("coloring"), d.get("labels"))


def dumps(P: TriangulatedPolyhedron) -> str:
    return json.dumps(to_dict(P), indent=2)


def loads(text: str) -> TriangulatedPolyhedron:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return from_dict(d)


def save(P, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(P))


def load(path) -> TriangulatedPolyhedron:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def regular_octahedron(scale=1.0, model="euclidean"):
    """Regular octahedron with vertices on the coordinate axes."""
    v = scale * np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    faces = [(0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4), (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5)]
    coloring = {"black": [0, 2, 5, 7], "white": [1, 3, 4, 6]}
    return build_polyhedron(v, faces, model, coloring)


def tetrahedron(model="euclidean"):
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float) * 0.5
    return build_polyhedron(v, [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)], model)


def realized_symmetries(P: TriangulatedPolyhedron, tol=1e-9):
    """Combinatorial automorphisms realized by an orthogonal map about the origin.

    Works on affine (Euclidean or Klein) coordinates; orthogonal maps fixing
    the origin are isometries in both readings.  Returns ``(perm, O)`` pairs
    with ``O @ p_i = p_perm[i]``.
    """
    pts = P.klein_coords()
    out = []
    for perm in combinatorial_automorphisms(P):
        A, B = pts, pts[perm]
        u, _, vt = np.linalg.svd(B.T @ A)
        O = u @ vt
        if np.abs(A @ O.T - B).max() < tol * max(1.0, np.abs(pts).max()):
            out.append((perm, O))
    return out
