"""Constructors for the example polyhedra and their explicit flexes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ValidationError
from .polyhedron import (TriangulatedPolyhedron, build_polyhedron, dihedral_angles,
                         orient_faces, realized_symmetries)
from .rigidity import FlexField, flex_residual, killing_complement_norm, pogorelov_transfer

SCHONHARDT_LABELS = ("A", "B", "C", "A'", "B'", "C'")
_A, _B, _C, _A1, _B1, _C1 = range(6)
SCHONHARDT_FACES = (
    (_A, _B, _C), (_A1, _B1, _C1), (_A, _B, _C1), (_A1, _B, _C),
    (_A, _B1, _C), (_A1, _B1, _C), (_A, _B1, _C1), (_A1, _B, _C1),
)
SCHONHARDT_BLACK = (1, 2, 3, 4)   # A'B'C', ABC', A'BC, AB'C
REFLEX_EDGES = ((_A, _B1), (_B, _C1), (_C, _A1))
CONVEX_LATERALS = ((_A, _C1), (_B, _A1), (_C, _B1))
BASE_EDGES = ((_A, _B), (_B, _C), (_A, _C), (_A1, _B1), (_B1, _C1), (_A1, _C1))


@dataclass(frozen=True)
class SchonhardtParams:
    """Base edge ``a``, height ``b`` and screw angle ``twist`` of the top triangle."""

    a: float = 1.0
    b: float = 1.0
    twist: float = np.pi / 2

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValidationError("Schonhardt parameters need a > 0 and b > 0")
        if not 0 < self.twist < 2 * np.pi:
            raise ValidationError("twist must lie in (0, 2*pi)")


def _colored(faces, black_idx):
    return {"black": list(black_idx), "white": [k for k in range(len(faces)) if k not in black_idx]}


def schonhardt(a=1.0, b=1.0, twist=np.pi / 2, model="euclidean") -> TriangulatedPolyhedron:
    """Twisted octahedron over an equilateral triangle.

    The base triangle ``ABC`` (edge ``a``) lies in ``z = -b/2`` and its screw
    image ``A'B'C'`` in ``z = +b/2``, rotated by ``twist``; the polyhedron is
    centred at the origin so that it is inscribed in a sphere about it.
    """
    prm = a if isinstance(a, SchonhardtParams) else SchonhardtParams(a, b, twist)
    R = prm.a / np.sqrt(3.0)
    ang = 2 * np.pi * np.arange(3) / 3
    base = np.stack([R * np.cos(ang), R * np.sin(ang), np.full(3, -prm.b / 2)], 1)
    top = np.stack([R * np.cos(ang + prm.twist), R * np.sin(ang + prm.twist), np.full(3, prm.b / 2)], 1)
    verts = np.vstack([base, top])
    return build_polyhedron(verts, orient_faces(SCHONHARDT_FACES), model,
                            _colored(SCHONHARDT_FACES, SCHONHARDT_BLACK), SCHONHARDT_LABELS)


def _rot_z(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def _twist_of(P):
    v = P.klein_coords()
    return float(np.mod(np.arctan2(v[_A1, 1], v[_A1, 0]) - np.arctan2(v[_A, 1], v[_A, 0]), 2 * np.pi))


def schonhardt_flex(P: TriangulatedPolyhedron) -> FlexField:
    """Explicit flex: base fixed, top vertices moved normal to the planes ``ABC'`` etc.

    ``q(C')`` is the unit normal of the plane ``ABC'``; ``q(A')`` and ``q(B')``
    are its rotations by 2pi/3 and 4pi/3 about the axis.
    """
    if P.n_vertices != 6 or abs(_twist_of(P) - np.pi / 2) > 1e-9:
        raise ValidationError("explicit flex needs a Schonhardt octahedron with twist pi/2")
    v = P.klein_coords()
    n = np.cross(v[_B] - v[_A], v[_C1] - v[_A])
    n /= np.linalg.norm(n)
    q = np.zeros((6, 3))
    q[_C1] = n
    q[_A1] = _rot_z(2 * np.pi / 3) @ n
    q[_B1] = _rot_z(4 * np.pi / 3) @ n
    return FlexField(q, "euclidean")


def symmetrize_flex(P: TriangulatedPolyhedron, flex: FlexField, symmetries=None) -> FlexField:
    """Average of ``flex`` over the realized symmetries (result is invariant).

    For a symmetry with ``O p_i = p_perm[i]`` the pushed field is
    ``(g q)_perm[i] = O q_i``.
    """
    syms = realized_symmetries(P) if symmetries is None else symmetries
    q = flex.vectors
    acc = np.zeros_like(q)
    for perm, O in syms:
        pushed = np.empty_like(q)
        pushed[perm] = q @ O.T
        acc += pushed
    return FlexField(acc / len(syms), flex.ambient).normalized()


def canonical_flex(P: TriangulatedPolyhedron) -> FlexField:
    """Symmetry-invariant nontrivial Euclidean flex of a Schonhardt octahedron."""
    f = symmetrize_flex(P, schonhardt_flex(P))
    if killing_complement_norm(P, f) < 0.1:
        raise GeometryError("symmetrized flex is trivial")
    if flex_residual(P, f) > 1e-10:
        raise GeometryError("symmetrized field is not a flex")
    return f


def canonical_hyperbolic_flex(P: TriangulatedPolyhedron) -> FlexField:
    """Canonical flex of a Klein-model Schonhardt octahedron as Minkowski velocities."""
    E = P.with_vertices(P.klein_coords(), "euclidean")
    return pogorelov_transfer(P, canonical_flex(E))


def schonhardt_edge_classes(P: TriangulatedPolyhedron):
    """Indices of the base edges, convex laterals and reflex laterals."""
    def idx(pairs):
        return [P.edge_index(i, j) for i, j in pairs]
    return {"base": idx(BASE_EDGES), "convex": idx(CONVEX_LATERALS), "reflex": idx(REFLEX_EDGES)}


# -- Gluck octahedron ---------------------------------------------------------

GLUCK_LABELS = ("A", "B", "C", "D", "E", "F")
# vertex v_ab lies on black planes a and b: A=v01 B=v02 C=v13 D=v23 E=v03 F=v12
GLUCK_FACES = ((0, 1, 4), (0, 5, 2), (1, 5, 3), (4, 2, 3),   # black
               (0, 1, 5), (0, 4, 2), (1, 4, 3), (5, 2, 3))   # white


def _line_intersection(p1, p2, p3, p4):
    """Intersection of the coplanar lines p1p2 and p3p4 (least squares)."""
    d1, d2 = p2 - p1, p4 - p3
    M = np.stack([d1, -d2], 1)
    st, *_ = np.linalg.lstsq(M, p3 - p1, rcond=None)
    return p1 + st[0] * d1


def gluck_octahedron(A=(-1.0, 0.1, 0.0), B=(0.1, -1.2, 0.05), C=(-0.1, 1.0, -0.05),
                     D=(1.1, 0.0, 0.1), E=(0.1, 0.15, 1.2), mu=0.4, lam=1.0, d_offset=0.0):
    """Octahedron whose four black planes are concurrent once ``A, B, C, D`` are coplanar.

    ``D`` is projected onto the plane ``ABC`` (then optionally pushed off it by
    ``d_offset`` along the normal).  With ``Y = AB & CD`` and ``Z = AC & BD``
    the vertex ``F`` is placed on the line through ``E`` and a point ``M`` of
    ``YZ``; then ``E, F, Y, Z`` are coplanar and the black planes meet at
    ``EY & FZ``.  Returns the polyhedron and the concurrency point.
    """
    A, B, C, D, E = (np.asarray(x, dtype=float) for x in (A, B, C, D, E))
    n = np.cross(B - A, C - A)
    if np.linalg.norm(n) < 1e-12:
        raise GeometryError("A, B, C are collinear")
    n /= np.linalg.norm(n)
    D = D - np.dot(D - A, n) * n
    Y = _line_intersection(A, B, C, D)
    Z = _line_intersection(A, C, B, D)
    M = Y + mu * (Z - Y)
    F = M + lam * (M - E)
    W = _line_intersection(E, Y, F, Z)
    D = D + d_offset * n
    verts = np.array([A, B, C, D, E, F])
    P = build_polyhedron(verts, orient_faces(GLUCK_FACES), "euclidean",
                         {"black": [0, 1, 2, 3], "white": [4, 5, 6, 7]}, GLUCK_LABELS)
    return P, W


# -- antiprisms ------------------------------------------------------------------

def twisted_antiprism(n, a=1.0, b=1.0, twist=-np.pi / 2):
    """Antiprism over regular ``n``-gons with the top rotated by an extra ``twist``.

    ``twist = 0`` gives the convex regular antiprism; the default reproduces
    the Schonhardt octahedron (up to relabeling) for ``n = 3``.  The two
    ``n``-gons are fan-triangulated.
    """
    if n < 3:
        raise ValidationError("antiprism needs n >= 3")
    R = a / (2 * np.sin(np.pi / n))
    ang = 2 * np.pi * np.arange(n) / n
    off = np.pi / n + twist
    base = np.stack([R * np.cos(ang), R * np.sin(ang), np.full(n, -b / 2)], 1)
    top = np.stack([R * np.cos(ang + off), R * np.sin(ang + off), np.full(n, b / 2)], 1)
    faces = []
    for k in range(n):
        k1 = (k + 1) % n
        faces.append((k, k1, n + k))
        faces.append((n + k, n + k1, k1))
    for k in range(1, n - 1):
        faces.append((0, k, k + 1))
        faces.append((n, n + k, n + k + 1))
    return build_polyhedron(np.vstack([base, top]), orient_faces(faces), "euclidean")


# -- ideal octahedron ---------------------------------------------------------------

@dataclass(frozen=True)
class IdealOctahedronParams:
    ratio: float

    def __post_init__(self):
        if not self.ratio > 1:
            raise ValidationError("ideal octahedron needs ratio r > 1")


def ideal_vertices(r):
    """Boundary-plane positions (complex numbers) of A, B, C, A', B', C'."""
    ang = 2 * np.pi * np.arange(3) / 3
    inner = np.exp(1j * ang)
    outer = r * np.exp(1j * (ang + np.pi / 2))
    return np.concatenate([inner, outer])


def _link_angles(z, apex, cycle):
    """Interior angles of the link polygon at ``apex`` (after sending it to infinity)."""
    w = 1.0 / (z[list(cycle)] - z[apex])
    area = 0.5 * np.sum(w.real * np.roll(w.imag, -1) - np.roll(w.real, -1) * w.imag)
    if area < 0:
        w = w[::-1]
        cycle = cycle[::-1]
    out = {}
    m = len(w)
    for k in range(m):
        d_in = w[k] - w[k - 1]
        d_out = w[(k + 1) % m] - w[k]
        turn = np.angle(d_out / d_in)
        out[cycle[k]] = np.pi - turn
    return out


def _vertex_link_cycle(faces, v):
    inc = [f for f in faces if v in f]
    # neighbours in cyclic order around v
    pairs = [tuple(x for x in f if x != v) for f in inc]
    cyc = [pairs[0][0], pairs[0][1]]
    used = {0}
    while len(cyc) < len(pairs):
        for k, (x, y) in enumerate(pairs):
            if k in used:
                continue
            if x == cyc[-1]:
                cyc.append(y)
                used.add(k)
                break
            if y == cyc[-1]:
                cyc.append(x)
                used.add(k)
                break
    return cyc


def ideal_edge_angles(r):
    """Dihedral angle of the ideal twisted octahedron at each of its 12 edges.

    Each dihedral angle equals the angle between boundary circles; sending
    one endpoint of the edge to infinity turns the circles through it into
    lines, so the angle is an interior angle of the resulting link polygon.
    """
    z = ideal_vertices(r)
    angles = {}
    for v in range(6):
        cyc = _vertex_link_cycle(SCHONHARDT_FACES, v)
        for u, th in _link_angles(z, v, cyc).items():
            angles.setdefault((min(u, v), max(u, v)), []).append(th)
    return {e: float(np.mean(t)) for e, t in angles.items()}


IDEAL_CLASSES = {
    "inner": ((_A, _B), (_B, _C), (_A, _C)),
    "outer": ((_A1, _B1), (_B1, _C1), (_A1, _C1)),
    "convex": CONVEX_LATERALS,
    "reflex": REFLEX_EDGES,
}


def ideal_twisted_octahedron_angles(params) -> dict:
    """The four edge-orbit dihedral angles of the ideal twisted octahedron.

    Returns a dict with ``classes`` (orbit name -> angle), ``sorted`` (the
    four values ascending) and ``spread`` (largest deviation inside an orbit).
    """
    prm = params if isinstance(params, IdealOctahedronParams) else IdealOctahedronParams(float(params))
    ang = ideal_edge_angles(prm.ratio)
    classes, spread = {}, 0.0
    for name, edges in IDEAL_CLASSES.items():
        vals = [ang[(min(e), max(e))] for e in edges]
        classes[name] = float(np.mean(vals))
        spread = max(spread, float(np.ptp(vals)))
    return {"ratio": prm.ratio, "classes": classes,
            "sorted": sorted(classes.values()), "spread": spread}


def ratio_to_inscribed_params(r):
    """Parameters ``(a, b)`` of the Schonhardt octahedron inscribed in the unit
    sphere whose stereographic picture has radius ratio ``r``."""
    if r <= 1:
        raise ValidationError("ratio must exceed 1")
    h = (r - 1.0) / (r + 1.0)
    R = np.sqrt(1.0 - h * h)
    return float(np.sqrt(3.0) * R), float(2 * h)


def ideal_schonhardt(r) -> TriangulatedPolyhedron:
    """Klein-model twisted octahedron with all vertices on the unit sphere."""
    a, b = ratio_to_inscribed_params(r)
    P = schonhardt(a, b)
    return P.with_vertices(P.vertices, "klein")


def ideal_angles_klein(r):
    """Independent route: hyperbolic dihedral angles of the ideal Klein polyhedron."""
    P = ideal_schonhardt(r)
    th = dihedral_angles(P)
    out = {}
    for name, edges in IDEAL_CLASSES.items():
        out[name] = float(np.mean([th[P.edge_index(*e)] for e in edges]))
    return out


def ratio_with_min_angle_above(bound=np.pi / 7, ratios=None):
    """First ratio on a grid at which all four ideal angle classes exceed ``bound``."""
    grid = np.geomspace(1.5, 1e4, 200) if ratios is None else ratios
    for r in grid:
        res = ideal_twisted_octahedron_angles(float(r))
        if min(res["sorted"]) > bound:
            return float(r), res
    raise GeometryError(f"no ratio on the grid has all angles above {bound}")


# -- hyperideal placements ---------------------------------------------------------

def edges_crossing_ball(P: TriangulatedPolyhedron):
    """Per edge: distance from the origin to the segment in Klein coordinates."""
    v = P.klein_coords()
    out = []
    for i, j in P.edges:
        d = v[j] - v[i]
        t = np.clip(-np.dot(v[i], d) / np.dot(d, d), 0.0, 1.0)
        out.append(float(np.linalg.norm(v[i] + t * d)))
    return np.array(out)


def hyperideal_polyhedron(P: TriangulatedPolyhedron, shrink=0.95) -> TriangulatedPolyhedron:
    """Rescale an origin-inscribed polyhedron to circumradius ``1/shrink`` (Klein model)."""
    if not 0 < shrink < 1:
        raise ValidationError("shrink must lie in (0, 1)")
    v = P.klein_coords()
    radii = np.linalg.norm(v, axis=1)
    if np.ptp(radii) > 1e-12 * radii.max():
        raise GeometryError("polyhedron is not inscribed in a sphere about the origin")
    w = v / (radii.max() * shrink)
    if np.linalg.norm(w, axis=1).min() <= 1 + 1e-9:
        raise GeometryError("vertices must lie strictly outside the unit ball")
    Q = P.with_vertices(w, "klein")
    dist = edges_crossing_ball(Q)
    bad = np.flatnonzero(dist >= 1.0)
    if bad.size:
        e = Q.edges[bad[0]]
        raise GeometryError(f"edge {e} misses the open unit ball (distance {dist[bad[0]]:.6g}); increase shrink")
    return Q


def hyperideal_schonhardt(a=1.0, b=1.0, shrink=0.95, twist=np.pi / 2):
    """Schonhardt octahedron scaled to circumradius ``1/shrink`` in the Klein model."""
    return hyperideal_polyhedron(schonhardt(a, b, twist), shrink)


def hyperideal_regular_octahedron(shrink=0.95):
    from .polyhedron import regular_octahedron
    return hyperideal_polyhedron(regular_octahedron(), shrink)


def hyperideal_from_ratio(r, shrink=0.99):
    """Hyperideal twisted octahedron close to the ideal one with radius ratio ``r``."""
    a, b = ratio_to_inscribed_params(r)
    return hyperideal_schonhardt(a, b, shrink)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def placed_in_ball(P: TriangulatedPolyhedron, rng, max_radius=0.9):
    """Random rotation, scale and translation keeping every vertex in the ball."""
    v = P.klein_coords()
    v = (v - v.mean(0)) @ random_rotation(rng).T
    v *= rng.uniform(0.3, 0.8) * max_radius / np.linalg.norm(v, axis=1).max()
    room = max_radius - np.linalg.norm(v, axis=1).max()
    shift = rng.normal(size=3)
    shift *= rng.uniform(0, room) / np.linalg.norm(shift)
    return P.with_vertices(v + shift, "klein")



def random_gluck_octahedron(rng, concurrent=True, max_tries=50):
    """Random octahedron from the concurrent-plane construction.

    With ``concurrent=False`` the fourth base vertex is pushed off the plane
    by a random amount in ``[0.05, 0.3]``, which breaks the concurrency.
    """
    base = np.array([(-1.0, 0.1, 0.0), (0.1, -1.2, 0.05), (-0.1, 1.0, -0.05),
                     (1.1, 0.0, 0.1), (0.1, 0.15, 1.2)])
    for _ in range(max_tries):
        pts = base + rng.normal(scale=0.15, size=base.shape)
        off = 0.0 if concurrent else rng.choice([-1, 1]) * rng.uniform(0.05, 0.3)
        try:
            P, _ = gluck_octahedron(*pts, mu=rng.uniform(0.2, 0.8), lam=rng.uniform(0.5, 1.5),
                                    d_offset=off)
        except (GeometryError, ValidationError):
            continue
        return P
    raise GeometryError("could not draw a nondegenerate octahedron")
