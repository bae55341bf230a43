"""Command-line front end.

Exit codes: 0 success (or rigid for ``analyze``), 10 flexible, 1 bad input,
2 computation failure, 3 a reproduction check failed.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import deaverage as dav
from . import generators as gen
from . import hyperideal as hyp
from . import polyhedron as poly
from .conemanifold import (assemble, builtin_schema, lift_cone_angles, manifold_flex_check,
                           meridian_cover_search, prism_meridian_system, schema_from_dict)
from .errors import ConeflexError, ValidationError
from .rigidity import blaschke_liebmann, flex_analysis

EXIT_FLEXIBLE = 10
EXIT_INPUT = 1
EXIT_COMPUTE = 2
EXIT_CHECK = 3

LIFT_RATIO = 30.0
LIFT_SHRINK = 0.99
Z7_ASSIGNMENT = (1, 1, 2, 1)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _emit(args, payload, text=None):
    payload = _jsonable(payload)
    body = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body + "\n")
    if args.text and text is not None:
        print(text)
    elif not args.out:
        print(body)


def _load_poly(path):
    with open(path, encoding="utf-8") as fh:
        return poly.loads(fh.read())


def _load_truncated(path):
    """Accept either a truncation file or a hyperideal polyhedron file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    d = json.loads(text)
    if "source" in d and "points" in d:
        return hyp.loads(text)
    return hyp.truncate(poly.from_dict(d))


def _piece_flex(T):
    """Flex used to deform a piece: the symmetric one for labeled Schonhardt data."""
    src = T.source if isinstance(T, hyp.TruncatedHyperidealPolyhedron) else T
    if src.labels == gen.SCHONHARDT_LABELS:
        return gen.canonical_hyperbolic_flex(src)
    rep = flex_analysis(src, "hyperbolic")
    if not rep.flexes:
        raise ValidationError("piece has no nontrivial flex")
    return rep.flexes[0]


# -- subcommands ---------------------------------------------------------------

def cmd_analyze(args):
    P = _load_poly(args.input)
    rep = flex_analysis(P, args.ambient, args.tol or 1e-9)
    _emit(args, rep.to_dict(), f"{rep.verdict}: kernel {rep.kernel_dim}, trivial {rep.trivial_dim}")
    return EXIT_FLEXIBLE if rep.flexible else 0


def cmd_bl(args):
    rep = blaschke_liebmann(_load_poly(args.input), args.tol or 1e-8)
    _emit(args, rep.to_dict(), f"{rep.verdict}: det_black {rep.det_black:.3e}, det_white {rep.det_white:.3e}")
    return 0


def cmd_generate(args):
    p = args.params or []
    if args.kind == "schonhardt":
        P = gen.schonhardt(*(p or [1.0, 1.0]), model=args.model)
    elif args.kind == "octahedron":
        P = poly.regular_octahedron(*(p or [1.0]), model=args.model)
    elif args.kind == "gluck":
        P, _ = gen.gluck_octahedron(d_offset=p[0] if p else 0.0)
    elif args.kind == "antiprism":
        P = gen.twisted_antiprism(int(p[0]) if p else 3)
    elif args.kind == "hyperideal-schonhardt":
        P = gen.hyperideal_schonhardt(*(p or [1.0, 1.0, 0.95]))
    elif args.kind == "hyperideal-octahedron":
        P = gen.hyperideal_regular_octahedron(*(p or [0.95]))
    elif args.kind == "ideal":
        P = gen.ideal_schonhardt(p[0] if p else 1e3)
    else:
        raise ValidationError(f"unknown generator {args.kind}")
    _emit(args, poly.to_dict(P), f"{args.kind}: {P.n_vertices} vertices, {len(P.faces)} faces")
    return 0


def cmd_truncate(args):
    T = hyp.truncate(_load_poly(args.input))
    v, e, f = T.counts
    _emit(args, json.loads(hyp.dumps(T)), f"truncated: {v} V, {e} E, {f} F")
    return 0


def cmd_metrics(args):
    m = hyp.truncated_metrics(_load_truncated(args.input), args.tol or 1e-9)
    _emit(args, m, f"length agreement {m['length_agreement']:.3e}, new dihedral dev {m['new_dihedral_max_dev']:.3e}")
    return 0


def cmd_tube(args):
    r = hyp.min_tube_distance(_load_truncated(args.input))
    r = {k: v for k, v in r.items() if k not in ("distances", "pairs")}
    _emit(args, r, f"min tube distance {r['min_distance']:.9f} at {r['edge_pair']} (bound {r['bound']:.6f})")
    return 0


def _schema(args):
    if args.schema:
        import os
        with open(args.schema, encoding="utf-8") as fh:
            return schema_from_dict(json.load(fh), os.path.dirname(os.path.abspath(args.schema)))
    if not (args.builtin and args.piece):
        raise ValidationError("give --schema FILE or --builtin NAME --piece FILE")
    with open(args.piece, encoding="utf-8") as fh:
        d = json.load(fh)
    base = hyp.loads(json.dumps(d)) if "points" in d else poly.from_dict(d)
    if args.builtin != "double" and not isinstance(base, hyp.TruncatedHyperidealPolyhedron):
        base = hyp.truncate(base)
    elif args.builtin == "double" and isinstance(base, poly.TriangulatedPolyhedron) and _exterior(base):
        base = hyp.truncate(base)
    return builtin_schema(args.builtin, base), base


def _exterior(P):
    return P.model == "desitter" or (P.model == "klein" and np.linalg.norm(P.vertices, axis=1).min() > 1)


def cmd_glue(args):
    out = _schema(args)
    S = out[0] if isinstance(out, tuple) else out
    M = assemble(S)
    _emit(args, M.to_dict(), f"{S.name}: {len(M.components)} components, "
          f"{'orientable' if M.orientable else 'non-orientable'}, angles "
          + ", ".join(f"{c.cone_angle:.6f}" for c in M.components))
    return 0


def cmd_flexcheck(args):
    out = _schema(args)
    if not isinstance(out, tuple):
        raise ValidationError("flexcheck needs --builtin and --piece")
    S, base = out
    r = manifold_flex_check(S, _piece_flex(base), h=args.h)
    _emit(args, r, f"{S.name}: max variation {r['max_variation']:.3e}, witness {r['witness']:.3e}, "
          f"{'PASS' if r['passed'] else 'FAIL'}")
    return 0 if r["passed"] else EXIT_CHECK


def cmd_cover(args):
    system = prism_meridian_system()
    hits = meridian_cover_search(system, args.n)
    payload = {"n": args.n, "count": len(hits), "words": system.word_strings()}
    if args.assignment:
        a = tuple(int(x) for x in args.assignment.split(","))
        payload["assignment"] = a
        payload["images"] = system.images(a, args.n)
        payload["valid"] = a in hits
    else:
        payload["first"] = hits[:10]
    _emit(args, payload, f"{len(hits)} valid assignments mod {args.n}")
    return 0


def cmd_lift(args):
    T = hyp.truncate(gen.hyperideal_from_ratio(args.ratio, args.shrink))
    M = assemble(builtin_schema("double", T))
    branched = [k for k, c in enumerate(M.components) if c.cone_angle < 2 * np.pi]
    L = lift_cone_angles(M, branched, args.k)
    d = L.to_dict()
    d["all_above_2pi"] = bool(min(L.angles) > 2 * np.pi)
    _emit(args, d, f"{args.k}-fold lift: min angle {min(L.angles):.6f} (2pi = {2 * np.pi:.6f})")
    return 0


def cmd_deaverage(args):
    P = _load_poly(args.input) if args.input else dav.schonhardt_in_ball(1.0, 1.0)
    flex = _piece_flex(P)
    pair = dav.deaverage(P, flex, args.t)
    d = {"t": args.t, "length_gap": pair.length_gap(),
         "congruence_defect": dav.congruence_defect(pair.P_plus, pair.P_minus),
         "P_plus": poly.to_dict(pair.P_plus), "P_minus": poly.to_dict(pair.P_minus)}
    _emit(args, d, f"t={args.t}: length gap {d['length_gap']:.3e}, congruence defect {d['congruence_defect']:.3e}")
    return 0


def cmd_collide(args):
    c = dav.collision_search(args.eps, tuple(args.A), tuple(args.B), args.tol or 1e-8)
    _emit(args, c.to_dict(), f"family {c.first} ~ family {c.second}: residual {c.residual:.2e}, "
          f"length witness {c.length_witness:.3e}")
    return 0


# -- reproduction pipelines ---------------------------------------------------------

def _check(name, ok, detail):
    return {"check": name, "passed": bool(ok), "detail": detail}


def _rep_closed_double():
    P = dav.schonhardt_in_ball(1.0, 1.0)
    rep = flex_analysis(P, "hyperbolic")
    S = builtin_schema("double", P)
    M = assemble(S)
    r = manifold_flex_check(S, gen.canonical_hyperbolic_flex(P))
    return [_check("polyhedron flexible", rep.flexible, f"kernel {rep.kernel_dim}"),
            _check("singular locus is the skeleton", len(M.components) == len(P.edges), f"{len(M.components)} components"),
            _check("cone angles preserved", r["passed"], f"max variation {r['max_variation']:.2e}, witness {r['witness']:.3f}")]


def _rep_glued(name, n_comp, orientable):
    P = gen.hyperideal_schonhardt()
    T = hyp.truncate(P)
    S = builtin_schema(name, T)
    M = assemble(S)
    big = sum(c.cone_angle > 2 * np.pi for c in M.components)
    r = manifold_flex_check(S, gen.canonical_hyperbolic_flex(P))
    return [_check("component count", len(M.components) == n_comp, f"{len(M.components)}"),
            _check("orientability", M.orientable == orientable, f"orientable={M.orientable}"),
            _check("one component above 2pi", big == 1, f"{big}"),
            _check("cone angles preserved", r["passed"], f"max variation {r['max_variation']:.2e}, witness {r['witness']:.3f}")]


def _rep_branched_lift():
    T = hyp.truncate(gen.hyperideal_from_ratio(LIFT_RATIO, LIFT_SHRINK))
    M = assemble(builtin_schema("double", T))
    angles = [c.cone_angle for c in M.components]
    system = prism_meridian_system()
    branched = [k for k, a in enumerate(angles) if a < 2 * np.pi]
    images = system.images(Z7_ASSIGNMENT, 7)
    L = lift_cone_angles(M, branched, 7, images if len(branched) == len(images) else None)
    return [_check("angles of D exceed 2pi/7", min(angles) > 2 * np.pi / 7, f"min {min(angles):.6f}"),
            _check("nine branched components", len(branched) == 9, f"{len(branched)}"),
            _check("lifted angles exceed 2pi", min(L.angles) > 2 * np.pi, f"min {min(L.angles):.6f}")]


def _rep_collision():
    c = dav.collision_search(0.05, (0.8, 1.2), (0.8, 1.2))
    return [_check("equal cone angles", c.residual < 1e-8, f"residual {c.residual:.2e}"),
            _check("different families", c.first[0] != c.second[0], f"{c.first[0]} vs {c.second[0]}"),
            _check("non-isometric pieces", c.length_witness > 1e-6, f"{c.length_witness:.3e}")]


def _rep_angles():
    res = gen.ideal_twisted_octahedron_angles(gen.IdealOctahedronParams(1e3))
    target = np.array([np.pi / 6, np.pi / 3, np.pi / 3, 7 * np.pi / 6])
    dev = float(np.abs(np.array(res["sorted"]) - target).max())
    r, _ = gen.ratio_with_min_angle_above(np.pi / 7)
    return [_check("limit angles", dev < 1e-2, f"max deviation {dev:.3e}"),
            _check("ratio with angles above pi/7", True, f"r = {r:.4f}")]


def _rep_tube():
    r = hyp.min_tube_distance(hyp.truncate(gen.hyperideal_schonhardt()))
    return [_check("tube distance below bound", r["min_distance"] <= r["bound"] + 1e-9,
                   f"{r['min_distance']:.9f} at {r['edge_pair']}, bound {r['bound']:.6f}")]


def _rep_cover():
    system = prism_meridian_system()
    hits = meridian_cover_search(system, 7)
    img = system.images(Z7_ASSIGNMENT, 7)
    return [_check("assignment valid", Z7_ASSIGNMENT in hits, f"images {img}"),
            _check("images in {1,2,3}", set(img) <= {1, 2, 3}, f"{sorted(set(img))}")]


REPRODUCE = {
    "thm1": _rep_closed_double,
    "thm2-3comp": lambda: _rep_glued("three_comp", 3, False),
    "thm2-4comp": lambda: _rep_glued("four_comp", 4, True),
    "thm3": _rep_branched_lift,
    "thm4": _rep_collision,
    "angles-ideal": _rep_angles,
    "tube": _rep_tube,
    "cover": _rep_cover,
}


def cmd_reproduce(args):
    try:
        checks = REPRODUCE[args.id]()
    except ConeflexError as exc:
        raise ConeflexError(f"{args.id}: {exc}") from exc
    ok = all(c["passed"] for c in checks)
    text = "\n".join(f"{'PASS' if c['passed'] else 'FAIL'} {c['check']}: {c['detail']}" for c in checks)
    _emit(args, {"id": args.id, "passed": ok, "checks": checks}, text)
    return 0 if ok else EXIT_CHECK


# -- parser ----------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="override the default tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON report here")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="text", action="store_false", help="JSON output (default)")
    fmt.add_argument("--text", dest="text", action="store_true", help="one-line summary")
    common.set_defaults(text=False)

    p = argparse.ArgumentParser(prog="coneflex", description="Flexible polyhedra and cone-manifolds.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", parents=[common], help="infinitesimal flexibility of a polyhedron")
    s.add_argument("input")
    s.add_argument("--ambient", default="euclidean", choices=["euclidean", "hyperbolic", "desitter", "minkowski"])
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("bl", parents=[common], help="black/white determinant test for octahedra")
    s.add_argument("input")
    s.set_defaults(func=cmd_bl)

    s = sub.add_parser("generate", parents=[common], help="write a standard polyhedron")
    s.add_argument("kind", choices=["schonhardt", "octahedron", "gluck", "antiprism", "hyperideal-schonhardt",
                                    "hyperideal-octahedron", "ideal"])
    s.add_argument("params", nargs="*", type=float)
    s.add_argument("--model", default="euclidean", choices=["euclidean", "klein"])
    s.set_defaults(func=cmd_generate)

    for name, func, helptext in (("truncate", cmd_truncate, "truncate a hyperideal polyhedron"),
                                 ("metrics", cmd_metrics, "lengths and angles of a truncation"),
                                 ("tube", cmd_tube, "smallest distance between disjoint edges")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("input")
        s.set_defaults(func=func)

    for name, func, helptext in (("glue", cmd_glue, "assemble a cone-manifold"),
                                 ("flexcheck", cmd_flexcheck, "first-order cone-angle variation")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--schema")
        s.add_argument("--builtin", choices=["double", "double_of_double", "three_comp", "four_comp"])
        s.add_argument("--piece")
        s.add_argument("--h", type=float, default=1e-4)
        s.set_defaults(func=func)

    s = sub.add_parser("cover", parents=[common], help="cyclic covers of the prism complement")
    s.add_argument("--n", type=int, default=7)
    s.add_argument("--assignment", help="comma-separated generator images to validate")
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("lift", parents=[common], help="cone angles after a branched cover")
    s.add_argument("--k", type=int, default=7)
    s.add_argument("--ratio", type=float, default=LIFT_RATIO)
    s.add_argument("--shrink", type=float, default=LIFT_SHRINK)
    s.set_defaults(func=cmd_lift)

    s = sub.add_parser("deaverage", parents=[common], help="polyhedra P_t and P_-t")
    s.add_argument("input", nargs="?")
    s.add_argument("--t", type=float, default=0.01)
    s.set_defaults(func=cmd_deaverage)

    s = sub.add_parser("collide", parents=[common], help="equal cone angles across families")
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--A", type=float, nargs=2, default=[0.8, 1.2])
    s.add_argument("--B", type=float, nargs=2, default=[0.8, 1.2])
    s.set_defaults(func=cmd_collide)

    s = sub.add_parser("reproduce", parents=[common], help="run a named reproduction pipeline")
    s.add_argument("id", choices=sorted(REPRODUCE))
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.tol is not None and args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConeflexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
