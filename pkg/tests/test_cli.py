import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from sshdoubling.schema import SCHEMA_VERSION, document_schema

QR = ["--q", "0.5", "--alpha", "0.1", "--beta", "0.2", "--qr-delta", "-2.0"]


def valid(doc):
    jsonschema.validate(doc, document_schema(doc["command"]))
    return doc


def test_krawtchouk_spectrum_json(run_cli):
    # [PAPER] spectrum 0, +-sqrt(k+1)
    r = run_cli("spectrum", "--model", "krawtchouk", "--N", 3, "--p", 0.5, "--format", "json")
    assert r.code == 0
    doc = valid(r.json())
    assert doc["schema_version"] == SCHEMA_VERSION and doc["command"] == "spectrum"
    want = [-math.sqrt(3), -math.sqrt(2), -1, 0, 1, math.sqrt(2), math.sqrt(3)]
    assert doc["payload"]["eigenvalues"] == pytest.approx(want, abs=1e-15)


def test_small_ssh_spectrum_with_oracle(run_cli):
    r = run_cli("spectrum", "--model", "ssh", "--N", 1, "--delta", 0, "--oracle")
    pay = valid(r.json())["payload"]
    assert pay["eigenvalues"] == pytest.approx([-0.7071067811865476, 0.0, 0.7071067811865476], abs=1e-16)
    assert pay["max_abs_deviation"] < 1e-14


def test_degenerate_delta_exits_2(run_cli):
    r = run_cli("spectrum", "--model", "ssh", "--delta", 1.0)
    assert r.code == 2
    assert r.out == ""
    assert r.err.strip() == "error: delta must satisfy |delta| < 1"


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["spectrum", "--model", "nope"],
    ["spectrum", "--N", "ten"],
    ["spectrum", "--model", "krawtchouk", "--p", "1.2"],
    ["spectrum", "--model", "qracah1", "--q", "0.5", "--alpha", "0.5", "--beta", "0.5", "--qr-delta", "0.5"],
    ["eigvecs", "--which", "99"],
    ["eigvecs", "--model", "qracah2", *QR, "--which", "zero"],
    ["verify", "--tol", "1e-3"],
    ["verify", "--perturb", "t_plus:3"],
    ["verify", "--perturb", "t_plus:30:1e-4"],
    ["verify", "--sweep", "p=0.1,0.2"],
    ["couplings", "--config", "/nonexistent/file"],
])
def test_usage_errors_exit_2(run_cli, argv):
    r = run_cli(*argv)
    assert r.code == 2
    assert r.err.startswith("error:") and r.err.count("\n") == 1


def test_zero_mode_has_vanishing_odd_components(run_cli):
    # [PAPER] Q_{2n+1}(0) = 0 for the Krawtchouk chain
    r = run_cli("eigvecs", "--model", "krawtchouk", "--N", 4, "--p", 0.3, "--which", "zero")
    vec = valid(r.json())["payload"]["vectors"][0]
    assert vec["eigenvalue"] == 0.0
    assert all(c == 0.0 for c in vec["components"][1::2])
    assert vec["norm_sq"] == pytest.approx(sum(c * c for c in vec["components"]), rel=1e-12)


def test_eigvecs_csv_table(run_cli):
    N = 3
    r = run_cli("eigvecs", "--model", "ssh", "--N", N, "--delta", 0.2, "--which", "all", "--format", "csv")
    rows = list(csv.reader(io.StringIO(r.out)))
    assert rows[0] == ["site"] + [f"λ_{i}" for i in range(2 * N + 1)]
    assert len(rows) == 2 * N + 2 and all(len(row) == 2 * N + 2 for row in rows)


def test_eigvecs_selected_indices(run_cli):
    r = run_cli("eigvecs", "--model", "krawtchouk", "--N", 4, "--p", 0.3, "--which", "1,5")
    vecs = valid(r.json())["payload"]["vectors"]
    assert [v["index"] for v in vecs] == [1, 5]
    assert all(v["residual"] < 1e-14 for v in vecs)


def test_couplings_ssh_columns(run_cli):
    # [PAPER] t+- = (1 +- delta)/2
    r = run_cli("couplings", "--model", "ssh", "--N", 4, "--delta", 0.3)
    rows = valid(r.json())["payload"]["rows"]
    assert [row["t_plus"] for row in rows] == pytest.approx([0.65] * 4)
    assert [row["t_minus"] for row in rows] == pytest.approx([0.35] * 4)


def test_couplings_krawtchouk_small(run_cli):
    r = run_cli("couplings", "--model", "krawtchouk", "--N", 2, "--p", 0.5, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(r.out)))
    got = [(int(x["n"]), float(x["t_plus"]), float(x["t_minus"])) for x in rows]
    assert got == pytest.approx([(0, 1.0, math.sqrt(0.5)), (1, math.sqrt(0.5), 1.0)])


def test_couplings_truncated_row_flagged(run_cli):
    r = run_cli("couplings", "--model", "qracah2", "--N", 4, *QR)
    rows = valid(r.json())["payload"]["rows"]
    assert rows[-1]["t_minus"] == 0.0 and rows[-1]["flag"] == "truncated"
    # only the top site 2N is dropped, so the last odd diagonal entry survives
    assert rows[-1]["mu"][1] is not None
    assert all(row["flag"] == "" for row in rows[:-1])


def test_verify_passes_and_validates(run_cli):
    r = run_cli("verify", "--model", "ssh", "--N", 50, "--delta", 0.5)
    assert r.code == 0
    pay = valid(r.json())["payload"]
    assert pay["overall"] is True and pay["model"] == "ssh"


def test_verify_fault_flag_exits_1(run_cli):
    r = run_cli("verify", "--model", "krawtchouk", "--N", 5, "--p", 0.4, "--perturb", "t-:2:1e-4")
    assert r.code == 1
    doc = valid(r.json())
    assert doc["parameters"]["perturb"] == "t-:2:1e-4"
    assert "FAIL" in r.err and "eigen_residual" in r.err


def test_verify_sweep_and_csv(run_cli):
    r = run_cli("verify", "--model", "krawtchouk", "--sweep", "N=2,4;p=0.2,0.8", "--format", "csv")
    assert r.code == 0
    rows = list(csv.DictReader(io.StringIO(r.out)))
    assert {(row["N"], row["p"]) for row in rows} == {("2", "0.2"), ("2", "0.8"), ("4", "0.2"), ("4", "0.8")}
    assert all(row["passed"] == "True" for row in rows)


def test_verify_scan_with_skips(run_cli, tmp_path):
    out = tmp_path / "scan.json"
    cfg = tmp_path / "flags.cfg"
    cfg.write_text("# scan at q = 0.5 only\nq = 0.5\n")
    r = run_cli("verify", "--model", "qracah1", "--sweep", "N=3,10;alpha=0.1,0.5;qr-delta=-2,2", "--config", cfg,
                "--out", out)
    assert r.code == 0 and r.out == ""
    pay = valid(json.loads(out.read_text()))["payload"]
    assert pay["skipped"] > 0 and pay["failed"] == 0 and pay["passed"] > 0
    assert all(rep["parameters"]["q"] == 0.5 for rep in pay["reports"])


def test_config_is_overridden_by_flags(run_cli, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("model = krawtchouk\nN = 3\np = 0.9\n")
    doc = run_cli("couplings", "--config", cfg, "--p", 0.5).json()
    assert doc["parameters"] == {"model": "krawtchouk", "N": 3, "p": 0.5}
    cfg.write_text("colour = blue\n")
    assert run_cli("couplings", "--config", cfg).code == 2


def test_schemas_reject_bad_documents(run_cli):
    doc = run_cli("spectrum", "--model", "ssh", "--N", 2).json()
    doc["payload"]["eigenvalues"].append("x")
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(doc, document_schema("spectrum"))


def test_json_round_trips_floats(run_cli):
    r = run_cli("spectrum", "--model", "krawtchouk", "--N", 7, "--p", 0.3)
    doc = r.json()
    assert json.dumps(doc, indent=2) + "\n" == r.out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sshdoubling", "spectrum", "--model", "ssh", "--N", "1",
                           "--delta", "0", "--format", "csv"], capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "index,eigenvalue"
    assert len(proc.stdout.splitlines()) == 4
