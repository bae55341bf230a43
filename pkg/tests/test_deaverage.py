import json

import numpy as np
import pytest

from coneflex import deaverage as dav
from coneflex import generators as gen
from coneflex import polyhedron as poly
from coneflex import rigidity as rig
from coneflex.errors import FlexError, GeometryError, ValidationError


@pytest.fixture(scope="module")
def base():
    P = dav.schonhardt_in_ball(1.0, 1.0)
    return P, gen.canonical_hyperbolic_flex(P).normalized()


@pytest.mark.parametrize("t", [0.001, 0.005, 0.01, 0.02])
def test_lengths_even_in_t(base, t):
    P, f = base
    pair = dav.deaverage(P, f, t)
    assert pair.length_gap() < 1e-12


def test_zero_time_is_identity(base):
    P, f = base
    pair = dav.deaverage(P, f, 0.0)
    np.testing.assert_allclose(pair.P_plus.vertices, P.minkowski_coords(), atol=1e-15)
    np.testing.assert_allclose(pair.P_minus.vertices, P.minkowski_coords(), atol=1e-15)


def test_congruence(base):
    P, f = base
    pair = dav.deaverage(P, f, 0.01)
    assert not dav.congruence_test(pair.P_plus, pair.P_minus)
    diff = np.abs(poly.dihedral_angles(pair.P_plus) - poly.dihedral_angles(pair.P_minus)).max()
    assert diff > 1e-5
    k = rig.killing_fields(P, "hyperbolic")[5].normalized()
    kp = dav.deaverage(P, k, 0.05)
    assert dav.congruence_test(kp.P_plus, kp.P_minus)
    assert dav.congruence_test(P, P)
    assert dav.congruence_defect(pair.P_plus, pair.P_minus) == dav.congruence_defect(pair.P_minus, pair.P_plus)


def test_congruence_combinatorics_mismatch(base):
    P, _ = base
    with pytest.raises(ValidationError):
        dav.congruence_test(P, gen.twisted_antiprism(4))


def test_rejections(base):
    P, f = base
    with pytest.raises(FlexError):
        dav.deaverage(P, rig.FlexField(np.ones((6, 3)) * [1, 0, 0] + np.eye(6, 3), "klein"), 0.01)
    with pytest.raises(GeometryError):
        dav.deaverage(P, f, 50.0)
    with pytest.raises(ValidationError):
        dav.deaverage(gen.schonhardt(), rig.flex_analysis(gen.schonhardt()).flexes[0], 0.01)


def test_triples_at_zero_coincide():
    t = [dav.cone_angle_triple(i, 0.0, 1.0, 1.1) for i in (1, 2, 3)]
    assert np.abs(t[0] - t[1]).max() < 1e-12 and np.abs(t[0] - t[2]).max() < 1e-12


def test_family_reversal(base):
    P, f = base
    fwd = dav.deaverage(P, f, 0.02)
    rev = dav.deaverage(P, -f, 0.02)
    np.testing.assert_allclose(poly.dihedral_angles(fwd.P_plus), poly.dihedral_angles(rev.P_minus), atol=1e-13)


def test_first_order_behaviour():
    h = 1e-4
    d = {i: (dav.cone_angle_triple(i, h, 1, 1) - dav.cone_angle_triple(i, 0, 1, 1)) / h for i in (1, 2, 3)}
    assert np.abs(d[2]).max() < 1e-3      # O(h) remainder of an even function
    assert np.abs(d[1]).max() > 1e-2 and np.abs(d[3]).max() > 1e-2
    c = (dav.cone_angle_triple(2, h, 1, 1) - dav.cone_angle_triple(2, 0, 1, 1)) / h
    c2 = (dav.cone_angle_triple(2, h / 2, 1, 1) - dav.cone_angle_triple(2, 0, 1, 1)) / (h / 2)
    assert abs(c2).max() < abs(c).max()   # shrinks linearly: zero derivative


def test_reflex_class_above_two_pi():
    for t in (0.0, 0.01, 0.05):
        for i in (1, 2, 3):
            assert dav.cone_angle_triple(i, t, 1.0, 1.0)[2] > 2 * np.pi


def test_assembled_triple_matches():
    for i in (1, 2, 3):
        np.testing.assert_allclose(dav.cone_angle_triple(i, 0.02, 0.9, 1.1),
                                   dav.assembled_triple(i, 0.02, 0.9, 1.1), atol=1e-12)


def test_family_validation():
    with pytest.raises(ValidationError):
        dav.cone_angle_triple(4, 0.0, 1, 1)
    with pytest.raises(ValidationError):
        dav.cone_angle_triple(1, -0.1, 1, 1)
    with pytest.raises(ValidationError):
        dav.schonhardt_in_ball(3.0, 3.0)


def test_collision_single_anchor():
    c = dav.collision_search(0.05, (0.8, 1.2), (0.8, 1.2), anchors=[(2, 0.025, 1.0, 1.0)])
    assert c.first[0] != c.second[0]
    assert c.residual < 1e-8 and c.length_witness > 1e-6
    assert 0 <= c.second[1] <= 0.05
    json.loads(c.dumps())


def test_collision_validation():
    with pytest.raises(ValidationError):
        dav.collision_search(0.0, (0.8, 1.2), (0.8, 1.2))
    with pytest.raises(ValidationError):
        dav.collision_search(0.05, (1.2, 0.8), (0.8, 1.2))
