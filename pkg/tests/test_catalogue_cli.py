import json

import jsonschema
import pytest

from artifact.catalogue import ROWS, catalogue, evaluate, load_catalogue, parameters
from artifact.cli import EXIT_CONFIG, EXIT_FAILURES, EXIT_INFEASIBLE, EXIT_OK, OUTPUT_ENV, main
from artifact.core import RULE_BY_SPEC
from artifact.scenarios import DATA


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------- catalogue

def test_catalogue_has_sixteen_rows_with_matching_rules():
    rows = catalogue()
    assert [r["spec_id"] for r in rows] == list(range(1, 17))
    assert len(ROWS) == 16
    for r in rows:
        assert r["verdict"]["rule"] == RULE_BY_SPEC[r["spec_id"]].value


def test_catalogue_rejects_unknown_parameters():
    with pytest.raises(ValueError):
        evaluate(2, width=3)
    assert set(parameters(2)) >= {"L", "d"}


def test_catalogue_cli_row_two(capsys):
    code, out, _ = run_cli(capsys, "catalogue", "--spec", 2, "--L", 32, "--d", 4096, "--json")
    assert code == EXIT_OK
    rows = json.loads(out)
    assert len(rows) == 1
    assert rows[0]["verdict"]["boundary_value"] == pytest.approx(27.4, abs=0.05)
    assert rows[0]["parameters"]["L"] == 32


def test_catalogue_table_prints_sixteen_rows(capsys):
    code, out, _ = run_cli(capsys, "catalogue")
    assert code == EXIT_OK
    assert len(out.strip().splitlines()) == 17


def test_catalogue_json_matches_schema_and_round_trips(capsys):
    code, out, _ = run_cli(capsys, "catalogue", "--json")
    assert code == EXIT_OK
    schema = json.loads((DATA / "catalogue.schema.json").read_text())
    rows = json.loads(out)
    jsonschema.validate(rows, schema)
    assert len(rows) == 16
    again = json.dumps(load_catalogue(out), indent=2, sort_keys=True) + "\n"
    assert again == out


def test_load_catalogue_rejects_tampered_rule(capsys):
    _, out, _ = run_cli(capsys, "catalogue", "--json")
    rows = json.loads(out)
    rows[0]["verdict"]["rule"] = rows[1]["verdict"]["rule"]
    with pytest.raises(ValueError):
        load_catalogue(json.dumps(rows))


def test_catalogue_bad_arguments(capsys):
    assert run_cli(capsys, "catalogue", "--L", 32)[0] == EXIT_CONFIG
    assert run_cli(capsys, "catalogue", "--spec", 17)[0] == EXIT_CONFIG
    assert run_cli(capsys, "catalogue", "--spec", 2, "--width", 3)[0] == EXIT_CONFIG


# ---------------------------------------------------------- scenarios

def test_worked_example_config(capsys, tmp_path):
    cfg = DATA / "configs" / "worked_example.yaml"
    code, _, _ = run_cli(capsys, "run", cfg, "--out", tmp_path)
    assert code == EXIT_OK
    plan = json.loads((tmp_path / "design_plan.json").read_text())
    assert plan["k_star"] == 3
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "horizon" and "design_plan.json" in manifest["outputs"]


def test_missing_config_names_path(capsys, tmp_path):
    missing = tmp_path / "nope.yaml"
    code, _, err = run_cli(capsys, "run", missing)
    assert code == EXIT_CONFIG and str(missing) in err


def test_unknown_keys_rejected(capsys, tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("command: chain\ncolour: blue\n")
    assert run_cli(capsys, "run", cfg)[0] == EXIT_CONFIG
    cfg.write_text("command: chain\nparams: {trails: 10}\n")
    assert run_cli(capsys, "run", cfg)[0] == EXIT_CONFIG
    assert run_cli(capsys, "chain", "--set", "eps=[0.7]", "--out", tmp_path)[0] == EXIT_CONFIG


def test_infeasible_exit_code(capsys, tmp_path):
    code, _, err = run_cli(capsys, "trust", "--set", "sigma_pi=0.01", "--out", tmp_path)
    assert code == EXIT_INFEASIBLE and "GuardTripped" in err


def test_output_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert run_cli(capsys, "compose")[0] == EXIT_OK
    data = json.loads((tmp_path / "env" / "compose.json").read_text())
    assert data["joint_reliability"] == pytest.approx(0.311, abs=1e-3)


SMALL_RUNS = {
    "chain": ["n=[5, 10]", "eps=[0.05]", "trials=20000"],
    "stop": ["chains=2", "trials=2000"],
    "adapt": ["runs=4", "generations=20"],
    "ground": ["horizon=[200]", "seeds=4"],
    "trust": ["trials=5000", "eps1=0.1"],
}


@pytest.mark.parametrize("command", sorted(SMALL_RUNS))
def test_manifest_replay_is_byte_identical(capsys, tmp_path, command):
    sets = [x for s in SMALL_RUNS[command] for x in ("--set", s)]
    first = tmp_path / "first"
    assert run_cli(capsys, command, *sets, "--seed", 11, "--workers", 2, "--out", first)[0] == 0
    replay = tmp_path / "replay"
    assert run_cli(capsys, "run", first / "manifest.json", "--workers", 3, "--out", replay)[0] == 0
    csvs = sorted(p.name for p in first.glob("*.csv"))
    assert csvs
    for name in csvs:
        assert (first / name).read_bytes() == (replay / name).read_bytes()


# ------------------------------------------------------------- report

def test_report_missing_and_empty(capsys, tmp_path):
    assert run_cli(capsys, "report", tmp_path / "absent")[0] == EXIT_CONFIG
    assert run_cli(capsys, "report", tmp_path)[0] == EXIT_CONFIG


def test_report_passes_on_real_results(capsys, tmp_path):
    run_cli(capsys, "chain", "--set", "n=[5, 10]", "--set", "eps=[0.05]", "--out", tmp_path / "c")
    code, out, _ = run_cli(capsys, "report", tmp_path)
    assert code == EXIT_OK and "2/2 passed" in out


def test_report_mixed_results(capsys, tmp_path):
    header = "n,eps,k,trials,exact,upper_bound,estimate,ci_low,ci_high,rel_err,in_scope\n"
    good = "5,0.05,0,100000,0.226,0.226,0.227,0.224,0.23,0.004,True\n"
    bad = "10,0.05,0,100000,0.401,0.401,0.5,0.49,0.51,0.247,True\n"
    skipped = "20,0.1,0,100000,0.878,0.878,0.5,0.49,0.51,0.43,False\n"
    (tmp_path / "chain_sim.csv").write_text(header + good + bad + skipped)
    code, out, _ = run_cli(capsys, "report", tmp_path)
    assert code == EXIT_FAILURES
    assert "FAIL  chain n=10" in out and "PASS  chain n=5" in out and "1/2 passed" in out


def test_catalogue_default_boundaries():
    from artifact.chain import chain_error_bound
    v = {r["spec_id"]: r["verdict"] for r in catalogue()}
    assert v[2]["boundary_value"] == pytest.approx(27.4, abs=0.05)
    assert v[3]["boundary_value"] == pytest.approx(chain_error_bound(15, 0.05))
    assert not v[3]["satisfied"]
    assert v[4]["boundary_value"] == pytest.approx(6.7, abs=0.05)
    assert v[5]["boundary_value"] == pytest.approx(32)
    assert v[6]["boundary_value"] == pytest.approx(1.6e-5)
    assert v[8]["boundary_value"] == pytest.approx(12.8, abs=0.1)
    assert v[12]["boundary_value"] == pytest.approx(1 - 0.9**5)
    assert v[13]["boundary_value"] == 1
    assert v[15]["boundary_value"] == 128 and v[15]["violation_cost"] == pytest.approx(147, abs=2)
    assert v[16]["satisfied"] and v[16]["violation_cost"] == pytest.approx(0.16)


def test_joint_deployment_row_flags_missing_layer():
    assert not evaluate(16, verification=False).satisfied
    assert not evaluate(16, mechanism=False).satisfied
