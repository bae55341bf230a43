"""Acceptance checks, one per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``; both print one PASS/FAIL line each.
"""
import time

import numpy as np
import pytest

from coneflex import deaverage as dav
from coneflex import generators as gen
from coneflex import hyperideal as hyp
from coneflex.conemanifold import (assemble, builtin_schema, lift_cone_angles, manifold_flex_check,
                                   meridian_cover_search, prism_meridian_system)
from coneflex.rigidity import (FlexField, blaschke_liebmann, flex_analysis, flex_residual,
                               killing_complement_norm, killing_fields, pogorelov_transfer,
                               rigidity_matrix)

TWO_PI = 2 * np.pi


def c01_schonhardt_flexibility():
    bad = []
    for a in np.linspace(0.5, 2, 5):
        for b in np.linspace(0.5, 2, 5):
            rep = flex_analysis(gen.schonhardt(a, b, np.pi / 2), "euclidean")
            if (rep.kernel_dim, rep.trivial_dim, rep.verdict) != (7, 6, "flexible"):
                bad.append((a, b, rep.kernel_dim))
    ctrl = flex_analysis(gen.schonhardt(1.0, 1.0, np.pi / 3), "euclidean")
    ok = not bad and ctrl.kernel_dim == 6 and ctrl.verdict == "rigid"
    return ok, f"grid failures {bad}, control kernel {ctrl.kernel_dim} {ctrl.verdict}"


def c02_explicit_flex():
    P = gen.schonhardt(1.0, 1.0)
    f = gen.schonhardt_flex(P)
    res, comp = flex_residual(P, f), killing_complement_norm(P, f)
    return res < 1e-10 and comp > 0.1, f"residual {res:.2e}, complement norm {comp:.4f}"


def _kernel_basis(P):
    R = rigidity_matrix(P, "euclidean")
    _, s, vt = np.linalg.svd(R)
    rank = int(np.sum(s >= 1e-9 * s[0]))
    return vt[rank:]


def _rank(vectors):
    s = np.linalg.svd(np.array([v.reshape(-1) for v in vectors]), compute_uv=False)
    return int(np.sum(s >= 1e-9 * s[0]))


def c03_pogorelov_equivalence():
    rng = np.random.default_rng(2024)
    worst_res, mismatches, ranks = 0.0, 0, set()
    for _ in range(20):
        flexible = gen.placed_in_ball(gen.schonhardt(), rng)
        v = flexible.vertices + rng.normal(scale=0.02, size=flexible.vertices.shape)
        for P in (flexible, flexible.with_vertices(v, "klein")):
            if (flex_analysis(P, "euclidean").kernel_dim
                    != flex_analysis(P, "hyperbolic").kernel_dim):
                mismatches += 1
            for k in _kernel_basis(P):
                g = pogorelov_transfer(P, FlexField(k.reshape(-1, 3)))
                worst_res = max(worst_res, flex_residual(P, g))
            imgs = [pogorelov_transfer(P, K).vectors for K in killing_fields(P, "euclidean")]
            mink = [K.vectors for K in killing_fields(P, "hyperbolic")]
            ranks.add((_rank(imgs), _rank(imgs + mink)))
    ok = mismatches == 0 and worst_res < 1e-10 and ranks == {(6, 6)}
    return ok, f"dimension mismatches {mismatches}, max residual {worst_res:.2e}, ranks {sorted(ranks)}"


def c04_blaschke_liebmann():
    rng = np.random.default_rng(7)
    agree = equiv = 0
    for concurrent in (True, False):
        for _ in range(100):
            P = gen.random_gluck_octahedron(rng, concurrent)
            bl = blaschke_liebmann(P)
            black = abs(bl.det_black) < 1e-8
            agree += black == flex_analysis(P, "euclidean").flexible
            equiv += black == (abs(bl.det_white) < 1e-8)
    return agree == 200 and equiv == 200, f"verdict agreement {agree}/200, black-white {equiv}/200"


def c05_truncation_validity():
    T = hyp.truncate(gen.hyperideal_schonhardt())
    m = hyp.truncated_metrics(T)
    ok = (m["new_dihedral_max_dev"] < 1e-9 and m["length_agreement"] < 1e-9
          and tuple(T.counts) == (24, 36, 14))
    return ok, (f"new dihedral dev {m['new_dihedral_max_dev']:.2e}, length agreement "
                f"{m['length_agreement']:.2e}, counts {tuple(T.counts)}")


def c06_truncated_flexibility():
    a = hyp.truncated_flex_analysis(hyp.truncate(gen.hyperideal_schonhardt()))
    b = hyp.truncated_flex_analysis(hyp.truncate(gen.hyperideal_regular_octahedron()))
    ok = a.flexible and a.kernel_dim == 7 and not b.flexible
    return ok, f"schonhardt {a.verdict} kernel {a.kernel_dim}, octahedron {b.verdict} kernel {b.kernel_dim}"


def c07_gluing_schemas():
    T = hyp.truncate(gen.hyperideal_schonhardt())
    old = hyp.old_edge_dihedrals(T)
    S = builtin_schema("double_of_double", T)
    M = assemble(S)
    dev = 0.0
    for c in M.components:
        p, k = M.edge_classes[c.classes[0]].wedges[0]
        g = S.pieces[p].geometry
        i, j = g._source_edge_of(g.edges[k])
        dev = max(dev, abs(c.cone_angle - 2 * old[T.source.edge_index(i, j)]))
    dd_ok = len(M.components) == 12 and all(c.is_circle for c in M.components) and dev < 1e-12
    details = [f"double_of_double {len(M.components)} circles, dev {dev:.1e}"]
    ok = dd_ok
    for name, n, orientable in (("three_comp", 3, False), ("four_comp", 4, True)):
        N = assemble(builtin_schema(name, T))
        big = sum(c.cone_angle > TWO_PI for c in N.components)
        ok &= len(N.components) == n and N.orientable == orientable and big == 1
        details.append(f"{name} {len(N.components)} comps orientable={N.orientable} above 2pi {big}")
    return ok, "; ".join(details)


def c08_cone_manifold_flexibility():
    closed = dav.schonhardt_in_ball(1.0, 1.0)
    hyper = gen.hyperideal_schonhardt()
    T = hyp.truncate(hyper)
    cases = [("double(closed)", builtin_schema("double", closed), gen.canonical_hyperbolic_flex(closed))]
    f = gen.canonical_hyperbolic_flex(hyper)
    for name in ("double", "double_of_double", "three_comp", "four_comp"):
        cases.append((name, builtin_schema(name, T), f))
    ok, details = True, []
    for name, S, flex in cases:
        r = manifold_flex_check(S, flex)
        passed = r["max_variation"] < 1e-6 and r["witness"] > 1e-3
        signs = [pc.flex_sign for pc in S.pieces]
        flips = []
        for k in range(len(signs)):
            s = list(signs)
            s[k] = -s[k]
            flips.append(manifold_flex_check(S.with_signs(s), flex)["max_variation"])
        ok &= passed and min(flips) > 1e-3
        details.append(f"{name} var {r['max_variation']:.1e} wit {r['witness']:.2f} flip min {min(flips):.2f}")
    return ok, "; ".join(details)


def c09_ideal_angles():
    res = gen.ideal_twisted_octahedron_angles(1e3)
    target = np.array([np.pi / 6, np.pi / 3, np.pi / 3, 7 * np.pi / 6])
    dev = float(np.abs(np.array(res["sorted"]) - target).max())
    r, at = gen.ratio_with_min_angle_above(np.pi / 7)
    lo = min(at["sorted"])
    return dev < 1e-2 and lo > np.pi / 7, f"deviation {dev:.2e}; at r={r:.3f} min angle {lo:.4f} > pi/7"


def c10_branched_cover():
    system = prism_meridian_system()
    t0 = time.perf_counter()
    hits = meridian_cover_search(system, 7)
    elapsed = time.perf_counter() - t0
    a = (1, 1, 2, 1)
    img = system.images(a, 7)
    T = hyp.truncate(gen.hyperideal_from_ratio(30.0, 0.99))
    M = assemble(builtin_schema("double", T))
    angles = [c.cone_angle for c in M.components]
    branched = [k for k, x in enumerate(angles) if x < TWO_PI]
    L = lift_cone_angles(M, branched, 7, img)
    ok = (a in hits and len(img) == 9 and set(img) <= set(range(1, 7)) and elapsed < 1.0
          and min(angles) > TWO_PI / 7 and min(L.angles) > TWO_PI)
    return ok, (f"images {img}, {len(hits)} assignments in {elapsed:.3f}s, "
                f"min angle of D {min(angles):.4f}, lifted min {min(L.angles):.4f}")


def c11_deaveraging():
    P = dav.schonhardt_in_ball(1.0, 1.0)
    f = gen.canonical_hyperbolic_flex(P)
    K = killing_fields(P, "hyperbolic")
    kill = FlexField(sum(k.vectors for k in K), "minkowski")
    ok, details = True, []
    for t in (0.001, 0.01):
        pair = dav.deaverage(P, f, t)
        gap, cd = pair.length_gap(), dav.congruence_defect(pair.P_plus, pair.P_minus)
        kp = dav.deaverage(P, kill, t)
        kd = dav.congruence_defect(kp.P_plus, kp.P_minus)
        ok &= gap < 1e-12 and cd > 1e-5 and kd < 1e-8
        details.append(f"t={t}: gap {gap:.1e}, defect {cd:.2e}, killing defect {kd:.1e}")
    return ok, "; ".join(details)


def c12_collision():
    t0 = time.perf_counter()
    c = dav.collision_search(0.05, (0.8, 1.2), (0.8, 1.2))
    elapsed = time.perf_counter() - t0
    ok = c.first[0] != c.second[0] and c.residual < 1e-8 and c.length_witness > 1e-6 and elapsed < 300
    return ok, (f"{c.first} vs {c.second}, residual {c.residual:.1e}, "
                f"length witness {c.length_witness:.2e}, {elapsed:.1f}s")


def c13_tube_distance():
    r = hyp.min_tube_distance(hyp.truncate(gen.hyperideal_schonhardt()))
    bound = np.arctanh(1 / np.sqrt(3))
    return r["min_distance"] <= bound + 1e-9, (f"min {r['min_distance']:.9f} at {r['edge_pair']}, "
                                               f"bound {bound:.6f}")


CRITERIA = [c01_schonhardt_flexibility, c02_explicit_flex, c03_pogorelov_equivalence,
            c04_blaschke_liebmann, c05_truncation_validity, c06_truncated_flexibility,
            c07_gluing_schemas, c08_cone_manifold_flexibility, c09_ideal_angles,
            c10_branched_cover, c11_deaveraging, c12_collision, c13_tube_distance]


def _line(fn, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} {fn.__name__}: {detail}"


@pytest.mark.parametrize("fn", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(fn, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for fn in CRITERIA:
        print(_line(fn, *fn()), flush=True)
