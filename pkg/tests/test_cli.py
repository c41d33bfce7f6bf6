import json

import pytest

from chainhodge import fileformat
from chainhodge.cli import main
from chainhodge.errors import MissingScalar, ParseError


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


# --- file format ------------------------------------------------------------

@pytest.mark.parametrize("name", fileformat.bundled_names())
def test_bundled_round_trip(name):
    cf = fileformat.load_bundled(name)
    again = fileformat.loads(fileformat.dumps(cf))
    assert again.complex == cf.complex
    assert fileformat.to_document(again) == fileformat.to_document(cf)


def test_bundled_corpus_is_complete():
    names = set(fileformat.bundled_names())
    assert {"two_vertex_edge", "theta_graph", "circle", "k4", "torus", "moore_mod2"} <= names
    assert sum(n.startswith("random3") for n in names) == 2


def _doc(**over):
    doc = {
        "cells": [["v0", "v1"], ["e"]],
        "boundary": {"1": [["e", [["v0", "-1"], ["v1", "1"]]]]},
    }
    doc.update(over)
    return doc


def test_parse_minimal_and_big_coefficients():
    cf = fileformat.from_document(_doc(boundary={"1": [["e", [["v0", str(-10**40)]]]]}))
    assert cf.complex.boundary(1)[0, 0] == -10**40
    assert cf.degree == 1


@pytest.mark.parametrize("bad", [
    {"cells": "nope"},
    {"boundary": {"1": [["zz", [["v0", "1"]]]]}},
    {"boundary": {"1": [["e", [["vx", "1"]]]]}},
    {"boundary": {"1": [["e", [["v0", 1.5]]]]}},
    {"boundary": {"1": [["e", [["v0", "1"], ["v0", "1"]]]]}},
    {"boundary": {"2": []}},
    {"degree": 3},
    {"scalars": {"E": {"nope": "1"}}},
    {"cycles": {"c": {"v0": "x"}}},
])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        fileformat.from_document(_doc(**bad))


def test_parse_rejects_non_complex():
    doc = {"cells": [["p"], ["a"], ["f"]],
           "boundary": {"1": [["a", [["p", "1"]]]], "2": [["f", [["a", "1"]]]]}}
    with pytest.raises(ParseError):
        fileformat.from_document(doc)


def test_scalar_naming_and_legacy_swap():
    cf = fileformat.from_document(_doc(scalars={"beta": "2", "E": {"v0": "1", "v1": "0"},
                                                "W": {"e": "0.5"}}))
    s = cf.scalars()
    assert s.beta == 2.0 and list(s.values(cf.complex, 0)) == [1.0, 0.0]
    with pytest.raises(MissingScalar):
        # under the legacy naming the E map (on vertices) is read on edges
        cf.scalars(legacy_naming=True).values(cf.complex, 1)
    cf2 = fileformat.from_document(_doc(scalars={"W": {"v0": "1", "v1": "0"}, "E": {"e": "0.5"}}))
    assert list(cf2.scalars(legacy_naming=True).values(cf2.complex, 0)) == [1.0, 0.0]


def test_invalid_json():
    with pytest.raises(ParseError):
        fileformat.loads("{not json")


# --- commands ---------------------------------------------------------------

def test_trees_theta(capsys):
    code, out = run(capsys, "trees", "--example", "theta_graph", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["count"] == 3
    assert [r[1] for r in doc["rows"]] == [1, 1, 1]


def test_cotrees_graph_one_row_per_vertex(capsys):
    code, out = run(capsys, "cotrees", "--example", "k4", "--csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "cotree,a,weight,probability"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["v0", "v1", "v2", "v3"]


def test_trees_moore(capsys):
    code, out = run(capsys, "trees", "--example", "moore_mod2", "--json")
    assert json.loads(out)["rows"] == [["e", 2, 4, 1]]


def test_boltzmann_graph_with_energy_flags(capsys):
    code, out = run(capsys, "boltzmann", "--example", "two_vertex_edge", "--json",
                    "--energy", "0", "v1=0.6931471805599453", "--beta", "1")
    doc = json.loads(out)
    assert code == 0
    rho = [r[2] for r in doc["rows"]]
    assert rho == pytest.approx([2 / 3, 1 / 3], rel=1e-12)


def test_boltzmann_torus_exact(capsys):
    code, out = run(capsys, "boltzmann", "--example", "torus", "--json", "--certificate")
    doc = json.loads(out)
    assert doc["exact"] is True
    assert [r[2] for r in doc["rows"]] == [0, 0, 0, 0, "1/2", "1/2", "1/2", "1/2"]
    assert len(doc["certificate"]) == 32


def test_boltzmann_boundary_cycle_is_zero(capsys):
    code, out = run(capsys, "boltzmann", "--example", "theta_graph", "--json",
                    "--chain", "v0=1", "v1=-1")
    assert [r[2] for r in json.loads(out)["rows"]] == [0, 0]


@pytest.mark.parametrize("name", ["theta_graph", "moore_mod2", "torus", "two_vertex_edge"])
def test_verify_passes(capsys, name):
    code, out = run(capsys, "verify", "--example", name, "--json")
    assert code == 0
    statuses = {r[0]: r[1] for r in json.loads(out)["rows"]}
    assert statuses["matrix-tree"] == "pass"


def test_verify_detail_values(capsys):
    _, out = run(capsys, "verify", "--example", "moore_mod2", "--json", "--checks", "matrix-tree")
    detail = json.loads(json.loads(out)["rows"][0][2])
    assert (detail["det"], detail["forest_side"], detail["theta_x"]) == (4, 4, 2)


def test_verify_all_skips_inapplicable_checks(capsys):
    code, out = run(capsys, "verify", "--example", "moore_mod2", "--checks", "all", "--json")
    statuses = {r[0]: r[1] for r in json.loads(out)["rows"]}
    assert code == 0
    assert statuses["stationary"] == "skip" and statuses["lemma"] == "pass"


def test_verify_fault_injection_fails(capsys):
    code, out = run(capsys, "verify", "--example", "theta_graph", "--inject-fault")
    doc = json.loads(out)
    assert code == 1
    assert doc["status"] == "fail" and "matrix-tree" in doc["failed"]


def test_verify_stationary_on_graph(capsys):
    code, out = run(capsys, "verify", "--example", "k4", "--checks", "stationary,oracle", "--json")
    assert code == 0


def test_explore_torus_cap(capsys, tmp_path):
    path = tmp_path / "g.json"
    code, out = run(capsys, "explore", "--example", "torus", "--max-vertices", "50",
                    "--output", str(path), "--json")
    doc = json.loads(out)
    assert code == 0 and doc["vertices"] == 50 and doc["truncated"] == "max_vertices"
    g = json.loads(path.read_text())
    assert len(g["vertices"]) == 50
    cycles = [r[2] for r in doc["rows"]]
    assert "+1y00 +1y01" in cycles


def test_explore_graph_reports_stationarity(capsys):
    code, out = run(capsys, "explore", "--example", "k4", "--json")
    doc = json.loads(out)
    assert doc["edges"] == 12 and doc["stationary_rel_error"] < 1e-10


def test_explore_not_pseudo_regular(capsys):
    code, out = run(capsys, "explore", "--example", "moore_mod2")
    assert code == 3 and json.loads(out)["error"] == "NotPseudoRegular"


def test_input_errors(capsys, tmp_path):
    code, out = run(capsys, "trees", str(tmp_path / "missing.json"))
    assert code == 2 and json.loads(out)["error"] == "ParseError"
    code, out = run(capsys, "trees")
    assert code == 2
    code, out = run(capsys, "trees", "--example", "theta_graph", "--energy", "0", "zz=1")
    assert code == 2
    code, out = run(capsys, "trees", "--example", "k4", "--mode", "exact")
    assert code == 2


def test_file_input(capsys, tmp_path):
    path = tmp_path / "x.json"
    path.write_text(fileformat.dumps(fileformat.load_bundled("theta_graph")))
    code, out = run(capsys, "trees", str(path), "--mode", "float", "--json")
    assert code == 0
    assert json.loads(out)["rows"][0][3] == pytest.approx(1 / 3)


def test_budget_flag(capsys):
    code, out = run(capsys, "trees", "--example", "torus", "--budget", "3")
    assert code == 3 and json.loads(out)["error"] == "BudgetExceeded"
