import numpy as np
import pytest
from hypothesis import given, strategies as st

from coneflex import generators as gen
from coneflex import polyhedron as poly
from coneflex import rigidity as rig
from coneflex.errors import FlexError, GeometryError


def test_matrix_shapes():
    O = poly.regular_octahedron()
    assert rig.rigidity_matrix(O).shape == (12, 18)
    H = poly.regular_octahedron(0.5, model="klein")
    assert rig.rigidity_matrix(H, "hyperbolic").shape == (12, 18)


def test_translation_in_kernel(schon):
    R = rig.rigidity_matrix(schon)
    q = np.tile([0.3, -1.0, 2.0], 6)
    assert np.abs(R @ q).max() < 1e-14


@pytest.mark.parametrize("P,kernel", [
    (poly.regular_octahedron(), 6),
    (poly.tetrahedron(), 6),
    (gen.schonhardt(1.0, 1.0), 7),
    (gen.schonhardt(0.6, 1.7), 7),
    (gen.schonhardt(1.0, 1.0, np.pi / 3), 6),
    (gen.schonhardt(1.0, 1.0, np.pi / 2 + 0.1), 6),
])
def test_kernel_dimensions(P, kernel):
    rep = rig.flex_analysis(P)
    assert rep.kernel_dim == kernel and rep.trivial_dim == 6
    assert rep.flexible == (kernel > 6)
    assert len(rep.flexes) == kernel - 6


def test_flexes_normalized_and_nontrivial(schon):
    f = rig.flex_analysis(schon).flexes[0]
    assert abs(f.max_speed - 1) < 1e-12
    assert rig.flex_residual(schon, f) < 1e-10
    assert rig.killing_complement_norm(schon, f) > 0.1


@pytest.mark.parametrize("ambient", ["euclidean", "hyperbolic"])
def test_killing_fields_in_kernel(ambient):
    P = gen.schonhardt(0.5, 0.5, model="klein" if ambient != "euclidean" else "euclidean")
    for k in rig.killing_fields(P, ambient):
        assert rig.flex_residual(P, k) < 1e-10


def test_desitter_killing_in_kernel(hyper_schon):
    for k in rig.killing_fields(hyper_schon, "desitter"):
        assert rig.flex_residual(hyper_schon, k) < 1e-10


@given(st.floats(0.2, 5.0))
def test_kernel_invariant_under_scaling(s):
    rep = rig.flex_analysis(gen.schonhardt(s, s))
    assert rep.kernel_dim == 7


def test_pogorelov_velocity_values():
    np.testing.assert_allclose(rig.pogorelov_velocity([0, 0, 0], [1, 2, 3]), [1, 2, 3])
    np.testing.assert_allclose(rig.pogorelov_velocity([0.5, 0, 0], [0, 1, 0]), [0, 1, 0])
    np.testing.assert_allclose(rig.pogorelov_velocity([0.5, 0, 0], [1, 0, 0]), [0.75, 0, 0])
    with pytest.raises(GeometryError):
        rig.pogorelov_velocity([1.0, 0, 0], [1, 0, 0])


def test_pogorelov_transfer_of_flex(rng):
    P = gen.placed_in_ball(gen.schonhardt(), rng)
    E = P.with_vertices(P.vertices, "euclidean")
    for f in rig.flex_analysis(E).flexes + rig.killing_fields(E):
        g = rig.pogorelov_transfer(P, f)
        assert rig.flex_residual(P, g) < 1e-10


def test_klein_velocity_lift_matches_difference():
    p = np.array([0.3, -0.2, 0.4])
    v = np.array([0.1, 0.5, -0.3])
    h = 1e-6
    from coneflex.geometry import klein_lift
    fd = (klein_lift(p + h * v) - klein_lift(p - h * v)) / (2 * h)
    np.testing.assert_allclose(rig.lift_klein_velocity(p, v), fd, atol=1e-8)


def test_angle_variation(schon):
    f = rig.flex_analysis(schon).flexes[0]
    dv = rig.angle_variation(schon, f)
    assert np.abs(dv).max() > 1e-3
    np.testing.assert_array_equal(dv, -rig.angle_variation(schon, -f))
    for k in rig.killing_fields(schon):
        assert np.abs(rig.angle_variation(schon, k.normalized())).max() < 1e-7
    bad = rig.FlexField(np.eye(6, 3), "euclidean")
    with pytest.raises(FlexError):
        rig.angle_variation(schon, bad)


def test_flex_report_round_trip(schon):
    rep = rig.flex_analysis(schon)
    back = rig.FlexReport.from_dict(rep.to_dict())
    assert back.kernel_dim == rep.kernel_dim and back.verdict == rep.verdict
    np.testing.assert_allclose(back.flexes[0].vectors, rep.flexes[0].vectors)


def test_blaschke_liebmann_examples():
    bl = rig.blaschke_liebmann(gen.schonhardt())
    assert abs(bl.det_black) < 1e-8 and abs(bl.det_white) < 1e-8 and bl.flexible
    bl = rig.blaschke_liebmann(gen.schonhardt(1, 1, np.pi / 2 + 0.1))
    assert abs(bl.det_black) > 1e-3 and not bl.flexible
    P, W = gen.gluck_octahedron()
    assert rig.blaschke_liebmann(P).flexible and rig.flex_analysis(P).flexible
    P2, _ = gen.gluck_octahedron(d_offset=0.1)
    assert not rig.blaschke_liebmann(P2).flexible and not rig.flex_analysis(P2).flexible


def test_blaschke_liebmann_needs_octahedron():
    with pytest.raises(Exception):
        rig.blaschke_liebmann(poly.tetrahedron())


def test_coloring_derived_when_missing(schon):
    bare = poly.build_polyhedron(schon.vertices, schon.faces)
    col = rig.octahedral_coloring(bare)
    for e in bare.edges:
        f1, f2 = bare.edge_faces[e]
        assert col[f1] != col[f2]
