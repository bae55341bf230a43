"""Deaveraging of hyperbolic flexes and the equal-cone-angle collision search."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import FlexError, GeometryError, SearchError, ValidationError
from .generators import canonical_hyperbolic_flex, schonhardt, schonhardt_edge_classes
from .polyhedron import (TriangulatedPolyhedron, combinatorial_automorphisms, dihedral_angles,
                         edge_lengths)
from .rigidity import FlexField, as_minkowski_field, flex_residual

# Schonhardt parameters (a, b) are placed in the Klein ball at this scale
KLEIN_SCALE = 0.5
FAMILIES = (1, 2, 3)
CLASS_ORDER = ("base", "convex", "reflex")


@dataclass
class DeaveragedPair:
    P_plus: TriangulatedPolyhedron
    P_minus: TriangulatedPolyhedron
    t: float
    flex: FlexField

    def length_gap(self):
        return float(np.abs(edge_lengths(self.P_plus) - edge_lengths(self.P_minus)).max())


def _moved(X, Q, t):
    Y = X + t * Q
    n2 = -geo.minkowski_dot(Y, Y)
    if np.any(n2 <= 0):
        raise GeometryError(f"trajectory leaves the hyperboloid at t={t}")
    return Y / np.sqrt(n2)[:, None]


def _check_faces(P):
    k = P.klein_coords()
    diam = max(np.linalg.norm(k[i] - k[j]) for i, j in P.edges)
    for f in P.faces:
        a, b, c = k[list(f)]
        if 0.5 * np.linalg.norm(np.cross(b - a, c - a)) < 1e-12 * diam ** 2:
            raise GeometryError(f"degenerate face {f}")


def deaverage(P: TriangulatedPolyhedron, flex: FlexField, t: float, tol=1e-9) -> DeaveragedPair:
    """Polyhedra ``P_t`` and ``P_-t`` whose vertices follow ``normalize(p_i +- t q_i)``.

    The paths are even in ``t`` up to the flex condition, so corresponding
    edge lengths agree to roundoff.
    """
    if P.model not in ("klein", "hyperboloid"):
        raise ValidationError("deaveraging needs a hyperbolic polyhedron")
    scale = flex.max_speed
    if scale > 0 and flex_residual(P, flex) / scale > tol:
        raise FlexError("field is not in the Minkowski rigidity kernel")
    X = P.minkowski_coords()
    Q = as_minkowski_field(P, flex).vectors
    plus = P.with_vertices(_moved(X, Q, t), "hyperboloid")
    minus = P.with_vertices(_moved(X, Q, -t), "hyperboloid")
    _check_faces(plus)
    _check_faces(minus)
    return DeaveragedPair(plus, minus, float(t), flex)


def congruence_defect(P: TriangulatedPolyhedron, Q: TriangulatedPolyhedron, automorphisms=None):
    """Smallest, over face-lattice automorphisms, of the largest edge-length
    or dihedral-angle mismatch."""
    if P.faces != Q.faces and {frozenset(f) for f in P.faces} != {frozenset(f) for f in Q.faces}:
        raise ValidationError("polyhedra have different combinatorics")
    autos = automorphisms if automorphisms is not None else combinatorial_automorphisms(P)
    lp, lq = edge_lengths(P), edge_lengths(Q)
    tp, tq = dihedral_angles(P), dihedral_angles(Q)
    best = np.inf
    for s in autos:
        idx = [Q.edge_index(s[i], s[j]) for i, j in P.edges]
        best = min(best, max(np.abs(lp - lq[idx]).max(), np.abs(tp - tq[idx]).max()))
    return float(best)


def congruence_test(P, Q, tol=1e-8) -> bool:
    return congruence_defect(P, Q) < tol


def length_defect(P, Q, automorphisms=None):
    """Smallest, over automorphisms, of the largest edge-length mismatch."""
    autos = automorphisms if automorphisms is not None else combinatorial_automorphisms(P)
    lp, lq = edge_lengths(P), edge_lengths(Q)
    return float(min(np.abs(lp - lq[[Q.edge_index(s[i], s[j]) for i, j in P.edges]]).max()
                     for s in autos))


# -- the three families ----------------------------------------------------------

def schonhardt_in_ball(a, b):
    """Schonhardt octahedron with parameters ``(a, b)`` centered in the Klein ball."""
    if a <= 0 or b <= 0:
        raise ValidationError("parameters must be positive")
    P = schonhardt(KLEIN_SCALE * a, KLEIN_SCALE * b, model="klein")
    if np.max(np.linalg.norm(P.vertices, axis=1)) >= 1:
        raise ValidationError(f"parameters ({a}, {b}) do not fit in the Klein ball")
    return P


def family_pieces(i, t, a, b):
    """The two polyhedra glued into the cone-manifold of family ``i`` at ``(t, a, b)``."""
    if i not in FAMILIES:
        raise ValidationError("family index must be 1, 2 or 3")
    if t < 0:
        raise ValidationError("family parameter t must be nonnegative")
    P = schonhardt_in_ball(a, b)
    pair = deaverage(P, canonical_hyperbolic_flex(P).normalized(), t)
    return {1: (pair.P_plus, pair.P_plus), 2: (pair.P_plus, pair.P_minus),
            3: (pair.P_minus, pair.P_minus)}[i]


def _triple_from(pieces, classes, spread_tol=1e-8):
    th = dihedral_angles(pieces[0]) + dihedral_angles(pieces[1])
    out = []
    for name in CLASS_ORDER:
        vals = th[classes[name]]
        if vals.max() - vals.min() > spread_tol:
            raise GeometryError(f"{name} class spread {vals.max() - vals.min():.3g} breaks symmetry")
        out.append(float(vals.mean()))
    return np.array(out)


def cone_angle_triple(i, t, a, b, spread_tol=1e-8):
    """Cone angles of the base, convex-lateral and reflex-lateral classes."""
    pieces = family_pieces(i, t, a, b)
    return _triple_from(pieces, schonhardt_edge_classes(pieces[0]), spread_tol)


def assembled_triple(i, t, a, b):
    """Same triple read off the assembled double (slower cross-check)."""
    from .conemanifold import GluingSchema, Pairing, Piece, PieceGeometry, assemble
    A, B = family_pieces(i, t, a, b)
    ga, gb = PieceGeometry(A), PieceGeometry(B)
    pairings = [Pairing(0, f, 1, f, {v: v for v in face}) for f, face in enumerate(A.faces)]
    M = assemble(GluingSchema([Piece(ga, 1), Piece(gb, -1, True)], pairings, f"family{i}"))
    cls = {k: name for name, ks in schonhardt_edge_classes(A).items() for k in ks}
    angs = {name: [] for name in CLASS_ORDER}
    for c in M.components:
        for k in c.classes:
            for p, e in M.edge_classes[k].wedges:
                if p == 0:
                    angs[cls[e]].append(c.cone_angle)
    return np.array([float(np.mean(angs[name])) for name in CLASS_ORDER])


# -- collision search -----------------------------------------------------------------

def _newton(fun, x0, lo, hi, tol, max_iter=200, damping=0.5, h=1e-6):
    x = np.clip(np.asarray(x0, float), lo, hi)
    F = fun(x)
    for _ in range(max_iter):
        if np.abs(F).max() < tol:
            return x, F
        J = np.empty((len(F), len(x)))
        for k in range(len(x)):
            e = np.zeros_like(x)
            e[k] = h
            if x[k] - h < lo[k]:
                J[:, k] = (fun(x + e) - F) / h
            else:
                J[:, k] = (fun(x + e) - fun(x - e)) / (2 * h)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
        lam = 1.0
        while lam > 1e-4:
            xn = np.clip(x + lam * step, lo, hi)
            try:
                Fn = fun(xn)
            except (GeometryError, ValidationError):
                Fn = None
            if Fn is not None and np.abs(Fn).max() < np.abs(F).max():
                x, F = xn, Fn
                break
            lam *= damping
        else:
            return x, F
    return x, F


@dataclass
class Collision:
    first: tuple
    second: tuple
    triples: tuple
    residual: float
    length_witness: float
    displacement: float

    def to_dict(self):
        return {"first": list(self.first), "second": list(self.second),
                "triples": [list(map(float, t)) for t in self.triples],
                "residual": self.residual, "length_witness": self.length_witness,
                "displacement": self.displacement}

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2)


def _displacement(i, t, a, b):
    P0 = schonhardt_in_ball(a, b).minkowski_coords()
    out = 0.0
    for Q in family_pieces(i, t, a, b):
        X = Q.minkowski_coords()
        out = max(out, max(geo.hyp_distance(X[k], P0[k]) for k in range(len(X))))
    return float(out)


def collision_search(eps, A, B, tol=1e-8, max_iter=200, anchors=None) -> Collision:
    """Find two members of different families with equal cone-angle triples.

    Each anchor ``(i, t1, a1, b1)`` fixes a target triple; for every family
    ``j != i`` a damped Newton solve over ``(t2, a2, b2)`` in
    ``[0, eps] x A x B`` starts from a 3x3x3 grid.  The first solution whose
    pieces have different edge-length spectra wins.

    Raises
    ------
    SearchError
        No collision within the budget.
    """
    if eps <= 0 or A[0] >= A[1] or B[0] >= B[1]:
        raise ValidationError("need eps > 0 and nonempty intervals")
    am, bm = 0.5 * (A[0] + A[1]), 0.5 * (B[0] + B[1])
    if anchors is None:
        anchors = [(i, s * eps, am, bm) for s in (0.5, 0.25, 0.75) for i in FAMILIES]
    lo = np.array([0.0, A[0], B[0]])
    hi = np.array([eps, A[1], B[1]])
    grid = list(itertools.product(np.linspace(0, eps, 3), np.linspace(*A, 3), np.linspace(*B, 3)))
    for i, t1, a1, b1 in anchors:
        target = cone_angle_triple(i, t1, a1, b1)
        first_pieces = family_pieces(i, t1, a1, b1)
        autos = combinatorial_automorphisms(first_pieces[0])
        for j in FAMILIES:
            if j == i:
                continue

            def fun(x, j=j):
                return cone_angle_triple(j, x[0], x[1], x[2]) - target

            for x0 in grid:
                try:
                    x, F = _newton(fun, x0, lo, hi, tol, max_iter)
                except (GeometryError, ValidationError):
                    continue
                if np.abs(F).max() >= tol:
                    continue
                second_pieces = family_pieces(j, *x)
                wit = min(length_defect(p, q, autos) for p in first_pieces for q in second_pieces)
                if wit <= 1e-6:
                    continue
                second = (j, float(x[0]), float(x[1]), float(x[2]))
                return Collision((i, float(t1), float(a1), float(b1)), second,
                                 (target, target + F), float(np.abs(F).max()), float(wit),
                                 max(_displacement(i, t1, a1, b1), _displacement(*second)))
    raise SearchError("no equal-angle collision found within the iteration budget")
