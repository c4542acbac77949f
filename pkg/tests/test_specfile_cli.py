import json
import os

import pytest

from courantcoh.catalog import (catalog, CATALOG_NAMES, broken_t4,
                                default_catalog_specs)
from courantcoh.specfile import (load_spec, save_spec, emit_spec,
                                 parse_spec_dict, SpecFileError, AxiomError)
from courantcoh import cli

SPEC_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "specs")


def test_catalog_names_resolve():
    for name in CATALOG_NAMES:
        base = name.split("(")[0]
        sample = {"t2-kronecker(nu)": "t2-kronecker(nu)",
                  "t2-kronecker(p/q)": "t2-kronecker(2/3)",
                  "t3-exact(c)": "t3-exact(1)",
                  "t4-twisted(n)": "t4-twisted(2)",
                  "so3-circle(n)": "so3-circle(1)"}.get(name, name)
        spec = catalog(sample)
        assert spec.name.startswith(base)
    with pytest.raises(KeyError):
        catalog("does-not-exist")


def test_round_trip_all_catalog(tmp_path):
    for spec in default_catalog_specs():
        path = tmp_path / "spec.json"
        save_spec(spec, path)
        back = load_spec(path)
        assert emit_spec(back) == emit_spec(spec), spec.name


def test_schema_violations():
    with pytest.raises(SpecFileError) as err:
        parse_spec_dict({"name": "x"})
    assert "base" in str(err.value)
    with pytest.raises(SpecFileError) as err:
        parse_spec_dict({"base": {"lattice_rank": 1,
                                  "leaf_directions": [{"slope": ["1", "2"]}]}})
    assert "slope" in str(err.value)
    with pytest.raises(SpecFileError) as err:
        parse_spec_dict({"base": {"lattice_rank": 0},
                         "fiber": {"rank": 1, "metric": [["1"]],
                                   "brackets": {"1,1,1": {}}}})
    assert "brackets" in str(err.value)
    with pytest.raises(SpecFileError) as err:
        parse_spec_dict({"base": {"lattice_rank": 1,
                                  "leaf_directions": [{"slope": ["nu"]}]}})
    assert "slope" in str(err.value)  # undeclared symbol


def test_axiom_failure_on_load(tmp_path):
    # schema-valid file with non-antisymmetric bracket constants
    data = {
        "name": "bad",
        "base": {"lattice_rank": 0, "leaf_directions": [],
                 "transverse_directions": []},
        "fiber": {"rank": 2, "metric": [["1", "0"], ["0", "1"]],
                  "brackets": {"1,2": {"1": [{"w": [], "c": "1"}]},
                               "2,1": {"1": [{"w": [], "c": "1"}]}}},
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(AxiomError) as err:
        load_spec(path)
    assert "antisymmetry" in str(err.value)
    # lenient load works
    spec = load_spec(path, validate=False)
    assert spec.g_rank == 2


def test_shipped_spec_files():
    for fname in ("so3.json", "t4-twisted-1.json", "t2-kronecker-nu.json",
                  "so3-circle-1.json"):
        spec = load_spec(os.path.join(SPEC_DIR, fname))
        assert spec.name
    spec = load_spec(os.path.join(SPEC_DIR, "broken-t4.json"), validate=False)
    assert spec.name == "broken-t4"


def test_cli_validate_ok(capsys):
    rc = cli.main(["validate", "--catalog", "so3"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "RESULT: pass" in out


def test_cli_unknown_catalog(capsys):
    rc = cli.main(["validate", "--catalog", "nope"])
    assert rc == 2


def test_cli_master_broken(capsys):
    path = os.path.join(SPEC_DIR, "broken-t4.json")
    rc = cli.main(["master", "--spec", path])
    out = capsys.readouterr().out
    assert rc == 1
    assert "residual" in out
    assert "xi1" in out and "xi4" in out


def test_cli_betti_so3(capsys):
    rc = cli.main(["betti", "--catalog", "so3"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "1  0  0  1  0  0  0" in out


def test_cli_pages_t4(capsys):
    rc = cli.main(["pages", "--catalog", "t4-twisted(1)", "--max-degree", "5"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "d1 nonzero: True" in out
    assert "E2 totals equal brute-force standard cohomology" in out


def test_cli_json_deterministic(capsys):
    rc1 = cli.main(["betti", "--catalog", "so3", "--format", "json"])
    out1 = capsys.readouterr().out
    rc2 = cli.main(["betti", "--catalog", "so3", "--format", "json"])
    out2 = capsys.readouterr().out
    assert rc1 == rc2 == 0
    assert out1 == out2
    payload = json.loads(out1)
    assert payload["ok"] is True
    # machine-readable numbers match the text table
    cli.main(["betti", "--catalog", "so3"])
    text = capsys.readouterr().out
    table = next(r for sec in payload["sections"] if "brute" in sec["name"]
                 for r in sec["rows"] if r["kind"] == "table")
    dims = table["rows"][0][1:]
    assert dims == [1, 0, 0, 1, 0, 0, 0]
    assert "1  0  0  1  0  0  0" in text


def test_cli_kronecker_annotation(capsys):
    rc = cli.main(["betti", "--catalog", "t2-kronecker(nu)"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "dim H^1_CE(F) = 1" in out
    assert "irrational slope the smooth-foliation value is 0" in out


def test_cli_all_so3(capsys):
    rc = cli.main(["all", "--catalog", "so3", "--n-random", "20"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "RESULT: pass" in out
