from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from spaceform.cli import MATRIX_FILE, main
from spaceform.commands import execute
from spaceform.reports import ConfigError, Report, RunConfig, read_config_file


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SPACEFORM_OUTPUT_DIR", raising=False)
    return tmp_path


# ---------------------------------------------------------------- groups


def test_groups_check(capsys):
    code, rep = run_json(capsys, "groups", "check", "7", "9", "2")
    assert code == 0
    assert rep["payload"]["spherical"]["verdict"] is True
    assert rep["payload"]["center"]["index"] == 21
    code, rep = run_json(capsys, "groups", "check", "7", "3", "2")
    assert code == 0 and rep["payload"]["spherical"]["verdict"] is False


def test_groups_harness_and_enumerate(capsys):
    code, rep = run_json(capsys, "groups", "harness", "--max-order", "200")
    assert code == 0 and rep["passed"] is True and rep["payload"]["counterexamples"] == []
    code, out, _ = run(capsys, "groups", "enumerate", "--max-order", "63", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and list(rows[0]) == ["m", "n", "r", "order", "cyclic", "spherical", "witness"]
    assert any(r["m"] == "7" and r["n"] == "9" and r["spherical"] == "True" for r in rows)


@pytest.mark.parametrize("argv", [
    ["groups", "check", "7", "3", "3"],
    ["groups", "check", "x", "3", "3"],
    ["groups", "harness", "--max-order", "0"],
    ["groups", "harness", "--max-order", "20000"],
    ["extent", "optimize", "--n", "6", "--k", "2", "--q", "3"],
    ["extent", "bound", "--n", "61", "--q", "1"],
    ["torus", "analyze", "--weights", "1,2"],
    ["torus", "analyze", "--weights", "1,1,1", "--cyclic-order", "5"],
    ["rep", "verify", "--m", "7", "--n", "9", "--r", "3"],
    ["groups", "check", "7", "9", "2", "--seed", "-4"],
    ["groups", "check", "7", "9", "2", "--config", "missing.cfg"],
    ["replay", "missing.json"],
    ["nonsense"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and "error" in err


# ---------------------------------------------------------------- extent


def test_extent_bound(capsys):
    code, rep = run_json(capsys, "extent", "bound", "--n", "61", "--q", "5")
    p = rep["payload"]
    assert code == 0 and p["bound"] < math.pi / 3 and p["margin_to_pi_over_3"] == pytest.approx(1.6122e-3, abs=1e-6)


def test_extent_scan_csv(capsys):
    code, out, _ = run(capsys, "extent", "scan", "--q", "5", "--from", "61", "--to", "10000", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and list(rows[0]) == ["n", "bound", "verdict", "margin"]
    assert len(rows) == 9940 and all(r["verdict"] == "True" for r in rows)


def test_extent_scan_below_threshold_fails(capsys):
    code, _, _ = run(capsys, "extent", "scan", "--q", "5", "--from", "50", "--to", "70")
    assert code == 0  # n < 61 is outside the claim
    code, rep = run_json(capsys, "extent", "scan", "--q", "5", "--from", "50", "--to", "70")
    assert rep["payload"]["all_true"] is False and rep["payload"]["holds_from_61"] is True


def test_extent_optimize_rp3(capsys):
    code, rep = run_json(capsys, "extent", "optimize", "--n", "2", "--k", "1", "--l", "1", "--q", "2",
                         "--seed", "7")
    assert code == 0 and rep["payload"]["lower_bound"] >= 1.5697
    assert rep["config"]["seed"] == 7


# ----------------------------------------------------------- torus / rep


def test_torus_analyze(capsys):
    code, rep = run_json(capsys, "torus", "analyze", "--weights", "1,1,-2;1,-2,1")
    p = rep["payload"]
    assert code == 0 and p["flags"]["pseudo_free"] and p["orbit_sum"]["total"] == 6
    assert p["principal_isotropy"]["finite_part"] == [3]
    code, rep = run_json(capsys, "torus", "analyze", "--weights", "1,1,1")
    assert code == 0 and rep["payload"]["flags"]["free"]


def test_torus_cyclic_membership(capsys):
    code, rep = run_json(capsys, "torus", "analyze", "--weights", "1,1,-2;1,-2,1",
                         "--cyclic-order", "3", "--angles", "1,1,1")
    assert code == 0 and rep["payload"]["cyclic"]["member"] is True
    code, rep = run_json(capsys, "torus", "analyze", "--weights", "1,1,1", "--cyclic-order", "5",
                         "--angles", "1,3,4")
    assert rep["payload"]["cyclic"]["angles_mod_2N"] == [2, 6, 8]


def test_non_effective_weights_exit_1_with_witness(capsys):
    code, rep = run_json(capsys, "torus", "analyze", "--weights", "1,2,3;2,4,6")
    assert code == 1 and rep["payload"]["kernel_witness"] in ([2, -1], [-2, 1])


def test_rep_verify(capsys):
    code, rep = run_json(capsys, "rep", "verify", "--m", "7", "--n", "9", "--r", "2", "--c", "3",
                         "--restarts", "8", "--max-iters", "1500")
    p = rep["payload"]
    assert code == 0 and p["free"] and p["relations_verified"]
    # the max-injrad ratio of this group sits near 1, far below pi^2
    assert p["collapse_ratio_at_least_pi2"] is False and p["collapse_ratio"] < math.pi ** 2


def test_rep_relation_failure_exit_1(capsys):
    code, rep = run_json(capsys, "rep", "verify", "--m", "7", "--n", "9", "--r", "2", "--c", "1")
    assert code == 1 and "order 27" in rep["payload"]["error"]


def test_rep_invariance(capsys):
    base = ["rep", "invariance", "--m", "7", "--n", "9", "--r", "2", "--weights", "1,1,-2;1,-2,1"]
    code, _, _ = run(capsys, *base)
    assert code == 1
    code, _, _ = run(capsys, *base, "--rho-b", "0,-1;1,-1")
    assert code == 0


# ------------------------------------------------------- config / output


def test_config_file_precedence(capsys, isolated):
    cfg = isolated / "run.cfg"
    cfg.write_text("# defaults\nseed = 11\nrestarts=2\nmax-iters = 300\nformat=json\n")
    code, out, _ = run(capsys, "extent", "optimize", "--n", "5", "--q", "3", "--config", str(cfg),
                       "--seed", "12")
    rep = json.loads(out)
    assert code == 0 and rep["config"]["seed"] == 12 and rep["config"]["restarts"] == 2
    assert rep["config"]["max_iters"] == 300 and rep["config"]["output_format"] == "json"


def test_bad_config_file(isolated):
    cfg = isolated / "bad.cfg"
    cfg.write_text("seed 3\n")
    with pytest.raises(ConfigError):
        read_config_file(cfg)
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"colour": "red"})
    with pytest.raises(ConfigError):
        RunConfig(output_format="xml")


def test_output_dir_env_and_replay(capsys, isolated, monkeypatch):
    monkeypatch.setenv("SPACEFORM_OUTPUT_DIR", str(isolated / "reports"))
    code, _, _ = run(capsys, "extent", "optimize", "--n", "7", "--k", "1", "--l", "2", "--q", "4",
                     "--restarts", "3", "--max-iters", "500")
    path = isolated / "reports" / "extent-optimize.json"
    assert code == 0 and path.exists()
    code, out, _ = run(capsys, "replay", str(path))
    assert code == 0 and json.loads(out) == {"command": "extent.optimize", "identical": True}
    tampered = json.loads(path.read_text())
    tampered["payload"]["lower_bound"] += 1e-12
    path.write_text(json.dumps(tampered))
    code, out, _ = run(capsys, "replay", str(path))
    assert code == 1 and json.loads(out)["identical"] is False


def test_explicit_output_path(capsys, isolated):
    target = isolated / "deep" / "check.json"
    code, _, _ = run(capsys, "groups", "check", "7", "9", "4", "--output", str(target))
    rep = Report.from_json(target.read_text())
    assert code == 0 and rep.arguments == {"m": 7, "n": 9, "r": 4}


@pytest.mark.parametrize("name,args", [
    ("groups.check", {"m": 13, "n": 9, "r": 3}),
    ("extent.bound", {"n": 100, "q": 4}),
    ("torus.analyze", {"weights": [[1, 0, 0], [0, 1, 1]], "N": 4, "angles": [1, 0, 3]}),
    ("rep.invariance", {"m": 7, "n": 9, "r": 2, "c": 3, "weights": [[1, 1, 1]]}),
])
def test_json_round_trip(name, args):
    rep = execute(name, args, RunConfig(seed=5))
    assert Report.from_json(rep.to_json()) == rep
    assert execute(rep.command, rep.arguments, rep.config).payload_json() == rep.payload_json()


def test_table_output_is_readable(capsys):
    code, out, _ = run(capsys, "groups", "check", "7", "9", "2")
    assert code == 0 and out.startswith("# groups.check") and "spherical.verdict: True" in out


# ------------------------------------------------------------- verify-all


def test_verify_all_negative_control(capsys, isolated):
    code, rep = run_json(capsys, "verify-all", "--a1-margin", "0.1", "--order-cap", "63",
                         "--restarts", "4", "--max-iters", "800")
    p = rep["payload"]
    assert code == 1 and "A1" in p["failed"]
    verdicts = {row["id"]: row["passed"] for row in p["rows"]}
    # the smaller scope still runs every criterion; the harness subset passes
    assert len(verdicts) == 10 and verdicts["A5"] and verdicts["A4"]
    assert p["details"]["A5"]["order_cap"] == 63
    matrix = json.loads((isolated / MATRIX_FILE).read_text())
    assert matrix["failed"] == p["failed"] and len(matrix["criteria"]) == 10


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "spaceform.cli", "extent", "bound", "--n", "61"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "below_pi_over_3: True" in out.stdout
