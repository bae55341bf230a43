import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coneflex import generators as gen
from coneflex import polyhedron as poly
from coneflex.errors import GeometryError, ValidationError

OCTA_DIHEDRAL = np.pi - np.arccos(1 / 3)     # = arccos(-1/3)


def test_counts():
    O = poly.regular_octahedron()
    assert len(O.edges) == 12 and O.euler_characteristic == 2
    T = poly.tetrahedron()
    assert len(T.edges) == 6 and T.euler_characteristic == 2


def test_orientation_conflict_rejected():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]])
    faces = [(0, 1, 2), (0, 1, 3), (0, 3, 2), (1, 2, 3)]
    with pytest.raises(ValidationError):
        poly.build_polyhedron(v, faces)


def test_orient_faces_fixes_directions():
    faces = [(0, 1, 2), (0, 1, 3), (0, 3, 2), (1, 2, 3)]
    fixed = poly.orient_faces(faces)
    P = poly.build_polyhedron(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]]), fixed)
    assert P.euler_characteristic == 2


@pytest.mark.parametrize("faces,msg", [
    ([(0, 1, 9)], "range"),
    ([(0, 1, 2), (0, 1, 2)], "duplicate"),
])
def test_bad_faces(faces, msg):
    v = np.eye(3)
    with pytest.raises(ValidationError, match=msg):
        poly.build_polyhedron(v, faces)


def test_degenerate_face_rejected():
    v = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 0, 1.0]])
    with pytest.raises((GeometryError, ValidationError)):
        poly.build_polyhedron(v, poly.orient_faces([(0, 1, 2), (0, 1, 3), (0, 3, 2), (1, 2, 3)]))


def test_regular_octahedron_angle():
    th = poly.dihedral_angles(poly.regular_octahedron())
    np.testing.assert_allclose(th, OCTA_DIHEDRAL, atol=1e-12)
    assert abs(OCTA_DIHEDRAL - 1.91063) < 1e-5


def test_flat_pair_is_pi():
    # square pyramid with a flat (split) base: the diagonal edge is flat
    v = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0.5, 0.5, 1.0]])
    faces = poly.orient_faces([(0, 1, 2), (0, 2, 3), (0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)])
    P = poly.build_polyhedron(v, faces)
    assert abs(poly.dihedral_angle(P, (0, 2)) - np.pi) < 1e-12


def test_reflex_edges(schon):
    th = poly.dihedral_angles(schon)
    for i, j in gen.REFLEX_EDGES:
        assert th[schon.edge_index(i, j)] > np.pi
    others = [k for k, e in enumerate(schon.edges)
              if tuple(sorted(e)) not in {tuple(sorted(r)) for r in gen.REFLEX_EDGES}]
    assert np.all(th[others] < np.pi)


def test_face_plane(schon):
    v = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1.0], [0, 0, 0]])
    T = poly.build_polyhedron(v, poly.orient_faces([(0, 1, 2), (0, 1, 3), (1, 2, 3), (0, 2, 3)]))
    pl = poly.face_plane(T, T.faces[T.face_index((0, 1, 2))])
    np.testing.assert_allclose(np.abs(pl.normal), np.ones(3) / np.sqrt(3), atol=1e-14)
    assert abs(abs(pl.offset) - 1 / np.sqrt(3)) < 1e-14
    T2 = T.with_vertices(T.vertices + [0.3, 0, 0])
    pl2 = poly.face_plane(T2, T2.faces[T2.face_index((0, 1, 2))])
    np.testing.assert_allclose(pl2.normal, pl.normal, atol=1e-14)
    # Schonhardt: plane A B C' passes through the centre of A' B' C'
    lab = {n: k for k, n in enumerate(schon.labels)}
    f = schon.faces[schon.face_index((lab["A"], lab["B"], lab["C'"]))]
    centre = schon.vertices[[lab["A'"], lab["B'"], lab["C'"]]].mean(0)
    assert abs(poly.face_plane(schon, f).residual(centre)) < 1e-12


@given(st.integers(0, 2 ** 32 - 1))
def test_angles_invariant_under_rotation(seed):
    rng = np.random.default_rng(seed)
    P = gen.schonhardt(1.0, 1.3)
    Q = P.with_vertices(P.vertices @ gen.random_rotation(rng).T + rng.normal(size=3))
    np.testing.assert_allclose(poly.dihedral_angles(P), poly.dihedral_angles(Q), atol=1e-10)


def test_convex_angles_below_pi():
    assert np.all(poly.dihedral_angles(gen.twisted_antiprism(3, twist=0.0)) < np.pi)
    # fan diagonals of the pentagon caps are flat
    assert np.all(poly.dihedral_angles(gen.twisted_antiprism(5, twist=0.0)) < np.pi + 1e-12)


def test_euclidean_and_minkowski_routes_agree_at_small_scale():
    # a tiny hyperbolic polyhedron is nearly Euclidean
    P = gen.schonhardt(1e-4, 1e-4)
    H = P.with_vertices(P.vertices, "klein")
    np.testing.assert_allclose(poly.dihedral_angles(P), poly.dihedral_angles(H), atol=1e-6)


def test_automorphism_counts(schon):
    assert len(poly.combinatorial_automorphisms(poly.regular_octahedron())) == 48
    assert len(poly.combinatorial_automorphisms(poly.tetrahedron())) == 24
    assert len(poly.realized_symmetries(schon)) == 6


def test_io_round_trip(tmp_path, schon):
    path = tmp_path / "s.json"
    poly.save(schon, path)
    Q = poly.load(path)
    np.testing.assert_array_equal(Q.vertices, schon.vertices)
    assert Q.faces == schon.faces and Q.labels == schon.labels and Q.coloring == schon.coloring
    assert poly.loads(poly.dumps(Q)).faces == Q.faces


def test_parse_diagnostics():
    d = {"space": "euclidean", "vertices": [[0, 0, 0]], "faces": [[0, 1, 2], [0, 1]]}
    with pytest.raises(ValidationError, match=r"faces\[1\]"):
        poly.from_dict(d)
    with pytest.raises(ValidationError, match="space"):
        poly.from_dict({"vertices": [], "faces": []})
    with pytest.raises(ValueError):
        poly.loads("{not json")


def test_halfspace_input_converted():
    P = poly.regular_octahedron(0.3, model="klein")
    X = P.minkowski_coords()
    from coneflex.geometry import hyperboloid_to_halfspace
    U = np.array([hyperboloid_to_halfspace(x) for x in X])
    Q = poly.build_polyhedron(U, P.faces, "halfspace")
    np.testing.assert_allclose(poly.dihedral_angles(Q), poly.dihedral_angles(P), atol=1e-10)
    json.dumps(poly.to_dict(Q))
