import json

import pytest

from coneflex import cli
from coneflex import hyperideal as hyp
from coneflex import polyhedron as poly
from coneflex.rigidity import FlexReport


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path, capsys):
    paths = {}
    for kind, name in (("schonhardt", "s"), ("octahedron", "o"), ("hyperideal-schonhardt", "h")):
        paths[name] = str(tmp_path / f"{name}.json")
        assert run(["generate", kind, "--out", paths[name]], capsys)[0] == 0
    return paths


def test_analyze_exit_codes(files, capsys, tmp_path):
    code, out, _ = run(["analyze", files["s"], "--ambient", "euclidean"], capsys)
    rep = json.loads(out)
    assert code == cli.EXIT_FLEXIBLE and rep["kernel_dim"] == 7
    report = tmp_path / "r.json"
    assert run(["analyze", files["o"], "--out", str(report)], capsys)[0] == 0
    assert FlexReport.from_dict(json.loads(report.read_text())).kernel_dim == 6


def test_bad_input_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"space": "euclidean", "vertices": [[0, 0, 0]], "faces": [[0, 1, 2], [1, 2]]}))
    code, _, err = run(["analyze", str(bad)], capsys)
    assert code == cli.EXIT_INPUT and "faces[1]" in err
    code, _, err = run(["analyze", str(tmp_path / "missing.json")], capsys)
    assert code == cli.EXIT_INPUT
    assert run(["analyze", str(bad), "--tol", "-1"], capsys)[0] == cli.EXIT_INPUT


def test_generated_files_round_trip(files):
    P = poly.load(files["s"])
    assert poly.loads(poly.dumps(P)).faces == P.faces


def test_truncation_pipeline(files, capsys, tmp_path):
    t = str(tmp_path / "t.json")
    assert run(["truncate", files["h"], "--out", t], capsys)[0] == 0
    T = hyp.loads(open(t).read())
    assert T.counts == (24, 36, 14)
    code, out, _ = run(["metrics", t], capsys)
    assert code == 0 and json.loads(out)["new_dihedral_max_dev"] < 1e-9
    code, out, _ = run(["tube", files["h"]], capsys)
    assert json.loads(out)["min_distance"] < 0.658479
    code, out, _ = run(["glue", "--builtin", "three_comp", "--piece", t], capsys)
    d = json.loads(out)
    assert d["n_components"] == 3 and not d["orientable"]
    assert run(["flexcheck", "--builtin", "four_comp", "--piece", t], capsys)[0] == 0


def test_bl_and_text(files, capsys):
    code, out, _ = run(["bl", files["s"], "--text"], capsys)
    assert code == 0 and out.startswith("flexible")


def test_cover_and_lift(capsys):
    code, out, _ = run(["cover", "--n", "7", "--assignment", "1,1,2,1"], capsys)
    d = json.loads(out)
    assert d["valid"] and set(d["images"]) <= {1, 2, 3}
    code, out, _ = run(["lift", "--k", "7"], capsys)
    assert json.loads(out)["all_above_2pi"]


def test_deaverage_command(capsys):
    code, out, _ = run(["deaverage", "--t", "0.01"], capsys)
    d = json.loads(out)
    assert d["length_gap"] < 1e-12 and d["congruence_defect"] > 1e-5


def test_glue_requires_input(capsys):
    assert run(["glue"], capsys)[0] == cli.EXIT_INPUT


@pytest.mark.parametrize("rid", ["thm1", "thm2-3comp", "thm2-4comp", "thm3", "angles-ideal", "tube", "cover"])
def test_reproduce(rid, capsys):
    code, out, _ = run(["reproduce", rid], capsys)
    d = json.loads(out)
    assert code == 0 and d["passed"], d


def test_reproduce_deterministic(capsys):
    a = run(["reproduce", "tube"], capsys)[1]
    b = run(["reproduce", "tube"], capsys)[1]
    assert a == b
