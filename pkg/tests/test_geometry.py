import numpy as np
import pytest
from hypothesis import given, strategies as st

from coneflex import geometry as geo
from coneflex.errors import GeometryError

coord = st.floats(-0.55, 0.55)
inside = st.tuples(coord, coord, coord).map(np.array)
far = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)).map(np.array).filter(
    lambda p: np.dot(p, p) > 1.05)


def test_minkowski_dot_values():
    assert geo.minkowski_dot([1, 0, 0, 0], [1, 0, 0, 0]) == -1
    assert geo.minkowski_dot([0, 1, 0, 0], [0, 1, 0, 0]) == 1
    assert geo.minkowski_dot([2, 1, 0, 0], [1, 2, 0, 0]) == 0


def test_klein_lifts():
    np.testing.assert_allclose(geo.klein_to_hyperboloid([0, 0, 0]), [1, 0, 0, 0])
    np.testing.assert_allclose(geo.klein_to_hyperboloid([0.6, 0, 0]), [1.25, 0.75, 0, 0])
    np.testing.assert_allclose(geo.klein_to_desitter([2, 0, 0]), [1 / np.sqrt(3), 2 / np.sqrt(3), 0, 0])
    with pytest.raises(GeometryError):
        geo.klein_lift([1.0, 0, 0])


@given(inside)
def test_model_round_trips(p):
    k = geo.ModelPoint("klein", p)
    h = geo.convert_model(k, "hyperboloid")
    assert abs(geo.minkowski_norm2(h.coords) + 1) < 1e-12
    back = geo.convert_model(h, "klein")
    np.testing.assert_allclose(back.coords, p, atol=1e-12)
    u = geo.convert_model(h, "halfspace")
    np.testing.assert_allclose(geo.convert_model(u, "hyperboloid").coords, h.coords, atol=1e-10)


@given(far)
def test_desitter_round_trip(p):
    d = geo.convert_model(geo.ModelPoint("klein", p), "desitter")
    assert abs(geo.minkowski_norm2(d.coords) - 1) < 1e-12
    np.testing.assert_allclose(geo.convert_model(d, "klein").coords, p, atol=1e-12)


def test_unsupported_conversion_rejected():
    with pytest.raises(GeometryError):
        geo.convert_model(geo.ModelPoint("euclidean", [0, 0, 0]), "hyperboloid")


def test_hyp_distance_values():
    p = np.array([1.0, 0, 0, 0])
    assert geo.hyp_distance(p, p) == 0
    assert abs(geo.hyp_distance(p, [np.cosh(1), np.sinh(1), 0, 0]) - 1) < 1e-12
    d = geo.hyp_distance(geo.klein_lift([0, 0, 0]), geo.klein_lift([0.5, 0, 0]))
    assert abs(d - np.arctanh(0.5)) < 1e-12


@given(inside, inside, inside)
def test_distance_is_a_metric(a, b, c):
    a, b, c = (geo.klein_lift(x) for x in (a, b, c))
    dab, dbc, dac = geo.hyp_distance(a, b), geo.hyp_distance(b, c), geo.hyp_distance(a, c)
    assert abs(dab - geo.hyp_distance(b, a)) < 1e-12
    assert dac <= dab + dbc + 1e-9


@given(inside, st.tuples(coord, coord, coord), st.floats(0, 2))
def test_geodesic_point_distance(p, w, t):
    x = geo.klein_lift(p)
    w = np.concatenate([[0.0], w])
    v = w + geo.minkowski_dot(x, w) * x          # project to the tangent space
    y = geo.geodesic_point(x, v, t)
    assert abs(geo.minkowski_norm2(y) + 1) < 1e-10
    speed = np.sqrt(max(geo.minkowski_norm2(v), 0))
    assert abs(geo.hyp_distance(x, y) - t * speed) < 1e-8


def test_geodesic_point_rejects_non_tangent():
    with pytest.raises(GeometryError):
        geo.geodesic_point([1, 0, 0, 0], [1, 0, 0, 0], 1.0)
    np.testing.assert_allclose(geo.geodesic_point([1, 0, 0, 0], [0, 0, 0, 0], 3.0), [1, 0, 0, 0])


def test_polar_plane_and_dual_distance():
    pl = geo.polar_plane([2.0, 0, 0])
    np.testing.assert_allclose(pl.normal, [1, 0, 0])
    assert abs(pl.offset - 0.5) < 1e-15
    a, b = geo.klein_to_desitter([2, 0, 0]), geo.klein_to_desitter([-2, 0, 0])
    assert abs(geo.dual_plane_distance(a, b) - np.arccosh(5 / 3)) < 1e-12
    assert geo.dual_plane_distance(a, a) == 0
    with pytest.raises(GeometryError):
        geo.dual_plane_distance(a, geo.klein_to_desitter([0, 2, 0]))


@given(far, far)
def test_dual_distance_matches_feet(p, q):
    a, b = geo.klein_to_desitter(p), geo.klein_to_desitter(q)
    if geo.minkowski_dot(a, b) > -1 - 1e-6:
        return
    fa, fb = geo.dual_plane_feet(a, b)
    assert abs(geo.minkowski_dot(fa, a)) < 1e-9 and abs(geo.minkowski_dot(fb, b)) < 1e-9
    assert abs(geo.dual_plane_distance(a, b) - geo.hyp_distance(fa, fb)) < 1e-9


def test_line_distance_intersecting_and_constructed():
    L = [geo.klein_lift(p) for p in ([0.5, 0, 0], [-0.5, 0, 0], [0, 0.5, 0], [0, -0.5, 0])]
    assert geo.line_line_distance(*L) < 1e-9
    # two lines perpendicular to the x-axis at distance ell, in orthogonal directions
    for ell in (0.3, 1.0, 2.5):
        p1 = geo.klein_lift([0, 0, 0])
        p2 = geo.geodesic_point(p1, [0, 1, 0, 0], ell)
        e2 = np.array([0, 0, 1.0, 0])
        e3 = np.array([0, 0, 0, 1.0])
        a1, b1 = p1, geo.geodesic_point(p1, e2, 1.0)
        a2, b2 = p2, geo.geodesic_point(p2, e3, 1.0)
        assert abs(geo.line_line_distance(a1, b1, a2, b2) - ell) < 1e-9


def test_line_rejects_degenerate():
    p = geo.klein_lift([0.1, 0, 0])
    with pytest.raises(GeometryError):
        geo.line_line_distance(p, p, geo.klein_lift([0, 0.1, 0]), geo.klein_lift([0, 0.2, 0]))


@given(inside, inside, inside, inside)
def test_segment_distance_oracle(a1, b1, a2, b2):
    pts = [geo.klein_lift(x) for x in (a1, b1, a2, b2)]
    if min(geo.hyp_distance(pts[0], pts[1]), geo.hyp_distance(pts[2], pts[3])) < 1e-3:
        return
    d, s, t = geo.segment_distance(*pts)
    exact = geo.segment_distance_exact(*pts)[0]
    assert abs(d - exact) < 1e-7
    # arccosh near 1 amplifies roundoff to ~sqrt(eps)
    assert geo.line_line_distance(*pts) <= d + 1e-7


def test_killing_basis_rank_and_errors(schon):
    K = geo.killing_basis(schon.vertices, "euclidean")
    assert np.linalg.matrix_rank(K.reshape(6, -1)) == 6
    with pytest.raises(GeometryError):
        geo.killing_basis(np.array([[0, 0, 0], [0, 0, 1.0], [0, 0, 2.0]]), "euclidean")
    X = geo.klein_lift(0.4 * schon.vertices / np.abs(schon.vertices).max())
    Km = geo.killing_basis(X, "minkowski")
    assert np.linalg.matrix_rank(Km.reshape(6, -1)) == 6
    assert np.abs(geo.minkowski_dot(X[None], Km)).max() < 1e-12


def test_killing_generators_skew():
    for A in geo.MINKOWSKI_KILLING:
        # x -> A x preserves the form: J A is antisymmetric
        S = geo.MINKOWSKI @ A
        np.testing.assert_allclose(S, -S.T, atol=1e-15)
