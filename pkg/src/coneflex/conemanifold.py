"""Gluing schemas, cone-manifold assembly, flexibility transfer and branched covers."""
from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import geometry as geo
from . import kernels
from .errors import GluingError, ValidationError
from .hyperideal import (TruncatedHyperidealPolyhedron, edge_dihedral, polygon_angles,
                         truncate, _oriented)
from .polyhedron import TriangulatedPolyhedron, dihedral_angles, realized_symmetries
from .polyhedron import from_dict as poly_from_dict, to_dict as poly_to_dict
from .rigidity import FlexField, flex_residual, trajectory

TWO_PI = 2 * np.pi
ANGLE_TOL = 1e-8
ISO_TOL = 1e-9


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


# -- piece geometry ----------------------------------------------------------------

class PieceGeometry:
    """Uniform view of a closed polyhedron or a truncated hyperideal polyhedron.

    Exposes faces (vertex cycles), face kinds and labels, edges with their
    dihedral angles and lengths, and first-order variations under a flex.
    """

    def __init__(self, base):
        self.base = base
        if isinstance(base, TruncatedHyperidealPolyhedron):
            self.kind = "truncated"
            self.faces = [tuple(f) for f in base.old_faces] + [tuple(f) for f in base.new_faces]
            self.face_kind = ["old"] * len(base.old_faces) + ["new"] * len(base.new_faces)
            labels = base.source.labels
            self.face_label = [None] * len(base.old_faces) + [
                labels[i] if labels else None for i in range(len(base.new_faces))]
            self.points = base.points
            self.edges = sorted({(min(e), max(e)) for e in list(base.old_edges) + list(base.new_edges)})
            self._point_pair = {k: ij for ij, k in base.index.items()}
            self.edge_kind = {}
            for e in base.old_edges:
                self.edge_kind[(min(e), max(e))] = "old"
            for e in base.new_edges:
                self.edge_kind[(min(e), max(e))] = "new"
        elif isinstance(base, TriangulatedPolyhedron):
            self.kind = "closed"
            self.faces = [tuple(f) for f in base.faces]
            self.face_kind = ["face"] * len(self.faces)
            self.face_label = [None] * len(self.faces)
            self.points = base.minkowski_coords() if base.model != "euclidean" else np.array(base.vertices)
            self.edges = list(base.edges)
            self.edge_kind = {e: "face" for e in self.edges}
        else:
            raise ValidationError(f"unsupported piece type {type(base).__name__}")
        self.edge_index = {e: k for k, e in enumerate(self.edges)}
        self._angles = None
        self._lengths = None

    @property
    def hyperbolic(self):
        return self.kind == "truncated" or self.base.model != "euclidean"

    def dist(self, u, w):
        if self.hyperbolic:
            return float(geo.hyp_distance(self.points[u], self.points[w]))
        return float(np.linalg.norm(self.points[u] - self.points[w]))

    def face_edges(self, f):
        face = self.faces[f]
        m = len(face)
        return [(face[a], face[(a + 1) % m]) for a in range(m)]

    def edge_id(self, u, w):
        return self.edge_index[(min(u, w), max(u, w))]

    @property
    def angles(self):
        if self._angles is None:
            if self.kind == "closed":
                self._angles = dihedral_angles(self.base)
            else:
                self._angles = np.array([edge_dihedral(self.base, *_oriented(self.base, e)) for e in self.edges])
        return self._angles

    @property
    def lengths(self):
        if self._lengths is None:
            self._lengths = np.array([self.dist(u, w) for u, w in self.edges])
        return self._lengths

    def find_face(self, label=None, kind=None):
        for k, (lab, kd) in enumerate(zip(self.face_label, self.face_kind)):
            if lab == label and (kind is None or kd == kind):
                return k
        raise ValidationError(f"piece has no face labeled {label!r}")

    # first-order data ---------------------------------------------------------
    def _source(self):
        return self.base.source if self.kind == "truncated" else self.base

    def _moved(self, flex, t):
        Q = trajectory(self._source(), flex, t)
        if self.kind == "truncated":
            return truncate(Q)
        return Q

    def _edge_angles_of(self, moved):
        if self.kind == "closed":
            return dihedral_angles(moved)
        src = moved.source
        out = np.empty(len(self.edges))
        th = dihedral_angles(src)
        for k, e in enumerate(self.edges):
            if self.edge_kind[e] == "new":
                out[k] = np.pi / 2
            else:
                i, j = self._source_edge_of(e)
                out[k] = th[src.edge_index(i, j)]
        return out

    def _source_edge_of(self, e):
        return self._point_pair[e[0]]

    def _positions(self, moved):
        pts = moved.points if self.kind == "truncated" else (
            moved.minkowski_coords() if moved.model != "euclidean" else moved.vertices)
        return pts

    def variation(self, flex: FlexField, h=1e-4):
        """Central differences of edge angles, edge lengths, new-face angles and positions."""
        plus, minus = self._moved(flex, h), self._moved(flex, -h)
        dth = (self._edge_angles_of(plus) - self._edge_angles_of(minus)) / (2 * h)
        pp, pm = self._positions(plus), self._positions(minus)
        dlen = np.array([(self._d(pp, u, w) - self._d(pm, u, w)) / (2 * h) for u, w in self.edges])
        if self.kind == "truncated":
            new = [f for f, k in zip(self.faces, self.face_kind) if k == "new"]
            ap = np.concatenate([polygon_angles(plus.points, f) for f in new])
            am = np.concatenate([polygon_angles(minus.points, f) for f in new])
            witness = (ap - am) / (2 * h)
        else:
            witness = dth
        return {"angles": dth, "lengths": dlen, "witness": witness, "plus": pp, "minus": pm}

    def _d(self, pts, u, w):
        if self.hyperbolic:
            return float(geo.hyp_distance(pts[u], pts[w]))
        return float(np.linalg.norm(pts[u] - pts[w]))


# -- schema --------------------------------------------------------------------------

@dataclass
class Piece:
    """A copy of a polyhedron inside a gluing; ``mirror`` marks reflected copies."""

    geometry: PieceGeometry
    flex_sign: int = 1
    mirror: bool = False
    name: str = ""

    def __post_init__(self):
        if self.flex_sign not in (-1, 0, 1):
            raise ValidationError("flex sign must be -1, 0 or +1")


@dataclass
class Pairing:
    """Identification of face ``face_a`` of piece ``a`` with face ``face_b`` of piece ``b``.

    ``vertex_map`` sends each vertex of the first face to one of the second.
    ``preserves_order`` records whether the listed cyclic orders correspond.
    """

    a: int
    face_a: int
    b: int
    face_b: int
    vertex_map: dict
    preserves_order: bool | None = None

    def to_dict(self):
        return {"a": [self.a, self.face_a], "b": [self.b, self.face_b],
                "map": [[int(u), int(v)] for u, v in self.vertex_map.items()],
                "preserves_order": self.preserves_order}


@dataclass
class GluingSchema:
    pieces: list
    pairings: list
    name: str = "custom"
    alternatives: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        used = set()
        for k, pr in enumerate(self.pairings):
            for p, f in ((pr.a, pr.face_a), (pr.b, pr.face_b)):
                if not 0 <= p < len(self.pieces):
                    raise GluingError(f"pairing {k} refers to piece {p} out of range")
                if not 0 <= f < len(self.pieces[p].geometry.faces):
                    raise GluingError(f"pairing {k} refers to face {f} out of range")
                if (p, f) in used:
                    raise GluingError(f"face {f} of piece {p} appears in two pairings")
                used.add((p, f))
            ga, gb = self.pieces[pr.a].geometry, self.pieces[pr.b].geometry
            fa, fb = ga.faces[pr.face_a], gb.faces[pr.face_b]
            m = pr.vertex_map
            if sorted(m) != sorted(fa) or sorted(m.values()) != sorted(fb):
                raise GluingError(f"pairing {k}: vertex map is not a bijection between the faces")
            img = [m[v] for v in fa]
            n = len(fb)
            start = fb.index(img[0])
            fwd = all(fb[(start + s) % n] == img[s] for s in range(n))
            bwd = all(fb[(start - s) % n] == img[s] for s in range(n))
            if not (fwd or bwd):
                raise GluingError(f"pairing {k}: vertex map does not respect face adjacency")
            if pr.preserves_order is not None and pr.preserves_order != fwd:
                raise GluingError(f"pairing {k}: orientation flag disagrees with the vertex map")
            pr.preserves_order = fwd
            dev = face_map_defect(ga, fa, gb, m)
            if dev > ISO_TOL:
                raise GluingError(f"pairing {k}: faces are not isometric under the map (defect {dev:.3g})")

    def boundary_faces(self):
        used = {(pr.a, pr.face_a) for pr in self.pairings} | {(pr.b, pr.face_b) for pr in self.pairings}
        return [(p, f) for p, pc in enumerate(self.pieces)
                for f in range(len(pc.geometry.faces)) if (p, f) not in used]

    def with_signs(self, signs):
        pieces = [Piece(pc.geometry, s, pc.mirror, pc.name) for pc, s in zip(self.pieces, signs)]
        return GluingSchema(pieces, self.pairings, self.name, self.alternatives)

    def to_dict(self):
        geoms, refs = [], {}
        for pc in self.pieces:
            if id(pc.geometry) not in refs:
                refs[id(pc.geometry)] = len(geoms)
                base = pc.geometry.base
                if pc.geometry.kind == "truncated":
                    geoms.append({"truncated": True, "polyhedron": poly_to_dict(base.source)})
                else:
                    geoms.append({"truncated": False, "polyhedron": poly_to_dict(base)})
        return {
            "name": self.name,
            "sources": geoms,
            "pieces": [{"source": refs[id(pc.geometry)], "flex_sign": pc.flex_sign,
                        "mirror": pc.mirror, "name": pc.name} for pc in self.pieces],
            "pairings": [pr.to_dict() for pr in self.pairings],
        }


def face_map_defect(ga, fa, gb, m):
    """Largest distance mismatch between the vertices of two faces under ``m``."""
    dev = 0.0
    for x in range(len(fa)):
        for y in range(x + 1, len(fa)):
            u, w = fa[x], fa[y]
            dev = max(dev, abs(ga.dist(u, w) - gb.dist(m[u], m[w])))
    return dev


def _load_source(entry, base_dir):
    if isinstance(entry, str):
        path = entry if os.path.isabs(entry) else os.path.join(base_dir, entry)
        with open(path, encoding="utf-8") as fh:
            entry = json.load(fh)
    if "polyhedron" in entry:
        P = poly_from_dict(entry["polyhedron"])
        return PieceGeometry(truncate(P) if entry.get("truncated") else P)
    return PieceGeometry(poly_from_dict(entry))


def schema_from_dict(d, base_dir="."):
    """Parse a schema; ``pieces[k].source`` is an index into ``sources`` or a file path."""
    sources = [_load_source(s, base_dir) for s in d.get("sources", [])]
    cache = {}
    pieces = []
    for k, p in enumerate(d["pieces"]):
        src = p["source"]
        if isinstance(src, int):
            g = sources[src]
        else:
            if src not in cache:
                cache[src] = _load_source(src if isinstance(src, str) else src, base_dir)
            g = cache[src]
        pieces.append(Piece(g, int(p.get("flex_sign", 1)), bool(p.get("mirror", False)), p.get("name", f"P{k}")))
    pairings = []
    for pr in d["pairings"]:
        m = {int(u): int(v) for u, v in pr["map"]}
        pairings.append(Pairing(pr["a"][0], pr["a"][1], pr["b"][0], pr["b"][1], m, pr.get("preserves_order")))
    return GluingSchema(pieces, pairings, d.get("name", "custom"))


# -- builtin schemas ------------------------------------------------------------------

def _identity_pairings(a, b, geom, kinds):
    out = []
    for f, face in enumerate(geom.faces):
        if geom.face_kind[f] in kinds:
            out.append(Pairing(a, f, b, f, {v: v for v in face}))
    return out


def _as_geometry(piece):
    return piece if isinstance(piece, PieceGeometry) else PieceGeometry(piece)


def half_turns(T: TruncatedHyperidealPolyhedron):
    """For each labeled new face ``X``, the orientation-preserving involutive
    symmetry exchanging ``X`` and ``X'`` (as a map of truncation vertices)."""
    src = T.source
    if not src.labels:
        raise ValidationError("truncated schemas need labeled hyperideal vertices")
    lab = {name: i for i, name in enumerate(src.labels)}
    out = {}
    syms = realized_symmetries(src)
    for name in src.labels:
        if name.endswith("'"):
            continue
        partner = name + "'"
        if partner not in lab:
            raise ValidationError(f"face {name} has no partner {partner}")
        x, y = lab[name], lab[partner]
        for perm, O in syms:
            if perm[x] == y and np.linalg.det(O) > 0 and np.all(perm[perm] == np.arange(len(perm))):
                pmap = {T.index[(i, j)]: T.index[(int(perm[i]), int(perm[j]))] for (i, j) in T.index}
                out[name] = (x, y, pmap)
                break
        else:
            raise GluingError(f"no half-turn symmetry exchanges {name} and {partner}")
    return out


def _new_face_of(geom, vertex):
    n_old = geom.face_kind.count("old")
    return n_old + vertex


def _face_bijections(ga, fa, gb, fb):
    """All adjacency-respecting bijections face ``fa`` -> ``fb`` that are isometric."""
    A, B = ga.faces[fa], gb.faces[fb]
    n = len(A)
    out = []
    for s in range(n):
        for d in (1, -1):
            m = {A[k]: B[(s + d * k) % n] for k in range(n)}
            if face_map_defect(ga, A, gb, m) <= ISO_TOL:
                out.append(m)
    return out


def builtin_schema(name, piece) -> GluingSchema:
    """Standard gluings of a polyhedron or truncated polyhedron.

    ``double``
        The piece and a mirror copy glued along corresponding faces (old
        faces only for truncated pieces, leaving the new faces as boundary).
    ``double_of_double``
        Two doubles glued to each other along corresponding new faces.
    ``three_comp``
        The double with the new faces ``X`` and ``X'`` of each half glued by
        the symmetry exchanging them.
    ``four_comp``
        Two doubles, face ``X`` of one glued to face ``X'`` of the other.
    """
    g = _as_geometry(piece)
    if name == "double":
        kinds = {"old"} if g.kind == "truncated" else {"face"}
        pieces = [Piece(g, 1, False, "P"), Piece(g, -1, True, "P-bar")]
        return GluingSchema(pieces, _identity_pairings(0, 1, g, kinds), "double")
    if g.kind != "truncated":
        raise ValidationError(f"schema {name!r} needs a truncated hyperideal piece")
    if name == "double_of_double":
        pieces = [Piece(g, 1, False, "P1"), Piece(g, -1, True, "P1-bar"),
                  Piece(g, 1, False, "P2"), Piece(g, -1, True, "P2-bar")]
        pr = _identity_pairings(0, 1, g, {"old"}) + _identity_pairings(2, 3, g, {"old"})
        pr += _identity_pairings(0, 2, g, {"new"}) + _identity_pairings(1, 3, g, {"new"})
        return GluingSchema(pieces, pr, name)
    turns = half_turns(g.base)
    if name == "three_comp":
        pieces = [Piece(g, 1, False, "P"), Piece(g, -1, True, "P-bar")]
        pr = _identity_pairings(0, 1, g, {"old"})
        alternatives = {}
        for lab, (x, y, pmap) in turns.items():
            fx, fy = _new_face_of(g, x), _new_face_of(g, y)
            m = {v: pmap[v] for v in g.faces[fx]}
            for p in (0, 1):
                pr.append(Pairing(p, fx, p, fy, m))
            alternatives[lab] = len(_face_bijections(g, fx, g, fy))
        return GluingSchema(pieces, pr, name, alternatives)
    if name == "four_comp":
        pieces = [Piece(g, 1, False, "P1"), Piece(g, -1, True, "P1-bar"),
                  Piece(g, 1, False, "P2"), Piece(g, -1, True, "P2-bar")]
        pr = _identity_pairings(0, 1, g, {"old"}) + _identity_pairings(2, 3, g, {"old"})
        alternatives = {}
        for lab, (x, y, pmap) in turns.items():
            fx, fy = _new_face_of(g, x), _new_face_of(g, y)
            mx = {v: pmap[v] for v in g.faces[fx]}
            my = {v: pmap[v] for v in g.faces[fy]}
            for a, b in ((0, 2), (1, 3)):
                pr.append(Pairing(a, fx, b, fy, mx))
                pr.append(Pairing(a, fy, b, fx, my))
            alternatives[lab] = len(_face_bijections(g, fx, g, fy))
        return GluingSchema(pieces, pr, name, alternatives)
    raise ValidationError(f"unknown builtin schema {name!r}")


# -- assembly ----------------------------------------------------------------------------

@dataclass
class EdgeClass:
    wedges: list            # (piece, edge index)
    angle: float
    length: float
    boundary: bool
    ends: tuple             # vertex-class ids

    @property
    def singular(self):
        return not self.boundary and abs(self.angle - TWO_PI) > ANGLE_TOL


@dataclass
class SingularComponent:
    classes: list           # indices into ConeManifold.edge_classes
    arcs: list              # (piece, (u, w)) pairs
    cone_angle: float
    length: float
    is_circle: bool

    def to_dict(self):
        return {"cone_angle": self.cone_angle, "length": self.length, "is_circle": self.is_circle,
                "arcs": [[p, list(e)] for p, e in self.arcs]}


@dataclass
class ConeManifold:
    schema: GluingSchema
    edge_classes: list
    components: list
    orientable: bool
    has_boundary: bool
    vertex_classes: int

    def to_dict(self):
        return {"schema": self.schema.name, "orientable": self.orientable,
                "boundary": self.has_boundary, "n_components": len(self.components),
                "components": [c.to_dict() for c in self.components]}


def assemble(schema: GluingSchema) -> ConeManifold:
    """Trace the singular locus of a glued cone-manifold.

    Edges and vertices of all pieces are identified through the face
    pairings.  Each edge class collects its wedges; the cone angle is the
    sum of their dihedral angles.  Singular classes chain into components
    through vertex classes met by exactly two singular classes.

    Raises
    ------
    GluingError
        Identified edges have different lengths, or angles along one
        component disagree.
    """
    P = schema.pieces
    vuf, euf = _UnionFind(), _UnionFind()
    for p, pc in enumerate(P):
        for v in range(len(pc.geometry.points)):
            vuf.find((p, v))
        for k in range(len(pc.geometry.edges)):
            euf.find((p, k))
    for pr in schema.pairings:
        ga, gb = P[pr.a].geometry, P[pr.b].geometry
        for v, w in pr.vertex_map.items():
            vuf.union((pr.a, v), (pr.b, w))
        for u, w in ga.face_edges(pr.face_a):
            euf.union((pr.a, ga.edge_id(u, w)), (pr.b, gb.edge_id(pr.vertex_map[u], pr.vertex_map[w])))

    bnd_edges = set()
    boundary = schema.boundary_faces()
    for p, f in boundary:
        g = P[p].geometry
        for u, w in g.face_edges(f):
            bnd_edges.add(euf.find((p, g.edge_id(u, w))))

    groups = {}
    for p, pc in enumerate(P):
        for k in range(len(pc.geometry.edges)):
            groups.setdefault(euf.find((p, k)), []).append((p, k))
    vroots = {}
    classes = []
    for root, wedges in groups.items():
        angle = 0.0
        lens = []
        for p, k in wedges:
            g = P[p].geometry
            angle += g.angles[k]
            lens.append(g.lengths[k])
        if max(lens) - min(lens) > ISO_TOL:
            raise GluingError(f"identified edges have different lengths {min(lens):.9g} / {max(lens):.9g}")
        p, k = wedges[0]
        u, w = P[p].geometry.edges[k]
        ends = tuple(vroots.setdefault(vuf.find((p, x)), len(vroots)) for x in (u, w))
        classes.append(EdgeClass(wedges, float(angle), float(np.mean(lens)), root in bnd_edges, ends))
    for p, pc in enumerate(P):
        for v in range(len(pc.geometry.points)):
            vroots.setdefault(vuf.find((p, v)), len(vroots))

    degree = np.zeros(len(vroots), int)
    for c in classes:
        if c.singular:
            degree[c.ends[0]] += 1
            degree[c.ends[1]] += 1
    cuf = _UnionFind()
    by_vertex = {}
    for k, c in enumerate(classes):
        if c.singular:
            cuf.find(k)
            for v in c.ends:
                by_vertex.setdefault(v, []).append(k)
    for v, ks in by_vertex.items():
        if degree[v] == 2:
            for k in ks[1:]:
                cuf.union(ks[0], k)
    comps = {}
    for k, c in enumerate(classes):
        if c.singular:
            comps.setdefault(cuf.find(k), []).append(k)
    components = []
    for ks in comps.values():
        angles = [classes[k].angle for k in ks]
        if max(angles) - min(angles) > ANGLE_TOL:
            raise GluingError(f"cone angle is not constant along a component: {min(angles):.10g} vs {max(angles):.10g}")
        circle = all(degree[v] == 2 for k in ks for v in classes[k].ends)
        arcs = []
        for k in ks:
            p, e = classes[k].wedges[0]
            arcs.append((p, P[p].geometry.edges[e]))
        components.append(SingularComponent(sorted(ks), arcs, float(np.mean(angles)),
                                            float(sum(classes[k].length for k in ks)), circle))
    components.sort(key=lambda c: (c.cone_angle, c.classes[0]))
    return ConeManifold(schema, classes, components, _orientable(schema), bool(boundary), len(vroots))


def _orientable(schema):
    sign = [0] * len(schema.pieces)
    adj = [[] for _ in schema.pieces]
    for pr in schema.pairings:
        rel = -1 if pr.preserves_order else 1
        adj[pr.a].append((pr.b, rel))
        adj[pr.b].append((pr.a, rel))
    for start in range(len(sign)):
        if sign[start]:
            continue
        sign[start] = 1
        stack = [start]
        while stack:
            p = stack.pop()
            for q, rel in adj[p]:
                want = sign[p] * rel
                if sign[q] == 0:
                    sign[q] = want
                    stack.append(q)
                elif sign[q] != want:
                    return False
    return True


# -- flexibility transfer ----------------------------------------------------------------

def manifold_flex_check(schema: GluingSchema, flex: FlexField, h=1e-4, tol=1e-6, witness_tol=1e-3) -> dict:
    """First-order cone-angle variation along each singular component.

    Every piece moves along ``flex_sign * flex``; per edge class the signed
    dihedral variations of its wedges are summed.  Also reports the
    first-order mismatch of glued faces and a nontriviality witness
    (dihedral variations for closed pieces, new-face angle variations for
    truncated pieces).
    """
    M = assemble(schema)
    cache = {}
    for pc in schema.pieces:
        g = pc.geometry
        if id(g) not in cache:
            src = g.base.source if g.kind == "truncated" else g.base
            scale = flex.max_speed
            if scale > 0 and flex_residual(src, flex) / scale > 1e-8:
                raise ValidationError("base field is not an isometric flex of the piece")
            cache[id(g)] = g.variation(flex, h)
    class_var = []
    length_var = []
    for c in M.edge_classes:
        s = sum(schema.pieces[p].flex_sign * cache[id(schema.pieces[p].geometry)]["angles"][k] for p, k in c.wedges)
        class_var.append(float(s))
        length_var.append(max(abs(cache[id(schema.pieces[p].geometry)]["lengths"][k]) for p, k in c.wedges))
    comp_var = [max(abs(class_var[k]) for k in comp.classes) for comp in M.components]
    comp_len = [max(length_var[k] for k in comp.classes) for comp in M.components]

    mismatch = 0.0
    for pr in schema.pairings:
        A, B = schema.pieces[pr.a], schema.pieces[pr.b]
        va, vb = cache[id(A.geometry)], cache[id(B.geometry)]
        fa = A.geometry.faces[pr.face_a]
        for x in range(len(fa)):
            for y in range(x + 1, len(fa)):
                u, w = fa[x], fa[y]
                da = A.flex_sign * _dist_rate(A.geometry, va, u, w, h)
                db = B.flex_sign * _dist_rate(B.geometry, vb, pr.vertex_map[u], pr.vertex_map[w], h)
                mismatch = max(mismatch, abs(da - db))
    witness = max(float(np.abs(cache[id(pc.geometry)]["witness"]).max()) for pc in schema.pieces
                  if pc.flex_sign != 0) if any(pc.flex_sign for pc in schema.pieces) else 0.0
    max_var = max(comp_var) if comp_var else 0.0
    return {
        "schema": schema.name,
        "component_variation": comp_var,
        "component_length_variation": comp_len,
        "max_variation": max_var,
        "face_mismatch": mismatch,
        "witness": witness,
        "passed": bool(max_var < tol and mismatch < tol and witness > witness_tol),
    }


def _dist_rate(g, var, u, w, h):
    return (g._d(var["plus"], u, w) - g._d(var["minus"], u, w)) / (2 * h)


# -- branched covers ------------------------------------------------------------------------

@dataclass
class MeridianSystem:
    """Free generators and one meridian word per edge of a graph.

    Words are sequences of ``(generator index, exponent)`` pairs.
    """

    generators: list
    words: list
    edge_names: list | None = None

    def __post_init__(self):
        if not self.generators:
            raise ValidationError("need at least one generator")
        for w in self.words:
            if not w:
                raise ValidationError("meridian words must be nonempty")
            for g, e in w:
                if not 0 <= g < len(self.generators) or e == 0:
                    raise ValidationError(f"malformed word {w}")

    def matrix(self):
        M = np.zeros((len(self.words), len(self.generators)), dtype=np.int64)
        for r, w in enumerate(self.words):
            for g, e in w:
                M[r, g] += e
        return M

    def images(self, assignment, n):
        return [int(x) for x in (self.matrix() @ np.asarray(assignment, dtype=np.int64)) % n]

    def word_strings(self):
        out = []
        for w in self.words:
            out.append("".join(self.generators[g] + ("" if e == 1 else f"^{e}") for g, e in w))
        return out


def parse_word(text, generators):
    """Parse ``"a2a3"`` or ``"a1^-1a3"`` into ``(index, exponent)`` pairs."""
    toks = re.findall(r"([A-Za-z]+\d*)(?:\^(-?\d+))?", text.replace(" ", ""))
    if not toks or "".join(t + (f"^{e}" if e else "") for t, e in toks) != text.replace(" ", ""):
        raise ValidationError(f"cannot parse word {text!r}")
    return [(generators.index(t), int(e) if e else 1) for t, e in toks]


def prism_meridian_system() -> MeridianSystem:
    """Meridians of the triangular-prism skeleton: four free generators and nine words."""
    gens = ["a1", "a2", "a3", "a4"]
    texts = ["a1", "a2", "a3", "a4", "a2a3", "a4a3", "a2a1", "a4a1", "a1^-1a3"]
    return MeridianSystem(gens, [parse_word(t, gens) for t in texts], texts)


def meridian_cover_search(system: MeridianSystem, n: int):
    """All assignments ``generator -> Z_n`` sending every meridian word to a nonzero class."""
    if n < 2:
        raise ValidationError("cover degree must be at least 2")
    hits = kernels.meridian_scan(system.matrix(), int(n))
    return [tuple(int(x) for x in row) for row in hits]


def meridian_cover_search_reference(system: MeridianSystem, n: int):
    """Straightforward enumeration used to cross-check the scan kernel."""
    M = system.matrix()
    return [a for a in product(range(n), repeat=len(system.generators))
            if np.all((M @ np.array(a)) % n != 0)]


@dataclass
class LiftedComponent:
    base_index: int
    base_angle: float
    image: int | None
    order: int
    copies: int
    angle: float


@dataclass
class LiftedConeManifold:
    """Angle and multiplicity bookkeeping of a cyclic branched cover."""

    degree: int
    components: list
    flexible_inherited: bool = True

    @property
    def angles(self):
        return [c.angle for c in self.components]

    def to_dict(self):
        return {"degree": self.degree, "flexible_inherited": self.flexible_inherited,
                "components": [c.__dict__ for c in self.components],
                "min_angle": min(self.angles) if self.components else None}


def lift_cone_angles(M, branched, k, images=None) -> LiftedConeManifold:
    """Cone angles in the ``k``-fold cyclic cover branched over ``branched``.

    A branched component whose meridian maps to an element of order ``m``
    lifts to ``k / m`` components with angle ``m`` times the original; the
    others lift to ``k`` copies with unchanged angle.  ``images`` are the
    meridian images in ``Z_k`` (default: generators, order ``k``).
    """
    if k < 2:
        raise ValidationError("cover degree must be at least 2")
    comps = M.components if hasattr(M, "components") else M
    angles = [c.cone_angle if hasattr(c, "cone_angle") else float(c) for c in comps]
    branched = list(branched)
    if images is None:
        images = [1] * len(branched)
    if len(images) != len(branched):
        raise ValidationError("need one meridian image per branched component")
    img = dict(zip(branched, images))
    out = []
    for idx, a in enumerate(angles):
        if idx in img:
            g = int(img[idx]) % k
            if g == 0:
                raise ValidationError(f"component {idx} has trivial meridian image; it is not branched")
            m = k // math.gcd(g, k)
            out.append(LiftedComponent(idx, a, g, m, k // m, m * a))
        else:
            out.append(LiftedComponent(idx, a, None, 1, k, a))
    return LiftedConeManifold(k, out)
