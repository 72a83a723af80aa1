import csv
import json
import shutil
import subprocess
from pathlib import Path

import pytest

from dimlab.cli import EXIT_CLAIMS, EXIT_INPUT, EXIT_OK, EXIT_RUNTIME, main

DOCS = Path(__file__).resolve().parent.parent / "docs" / "examples"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_exact_from_document(capsys):
    code, out, _ = run(capsys, "exact", "--measure", DOCS / "cantor_natural.json", "--format", "json")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["tool"] == "dimlab" and report["command"] == "exact"
    assert report["result"]["table"]["H_U"]["value"] == pytest.approx(0.63092975357145730)
    assert report["result"]["violations"] == []


def test_exact_from_example_index(capsys):
    code, out, _ = run(capsys, "exact", "--example", "ex6", "--n", "4", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["mapping", "status", "value"]
    table = {r[0]: r[2] for r in rows[1:]}
    assert float(table["B_U"]) == 1.0 and float(table["B_L"]) == 0.0


def test_estimate_writes_files(tmp_path, capsys):
    code, _, _ = run(capsys, "estimate", "--measure", DOCS / "uniform01.json", "--method", "gp",
                     "--samples", 4000, "--out", tmp_path)
    assert code == EXIT_OK
    report = json.loads((tmp_path / "estimate-gp.json").read_text())
    assert report["result"]["slope"] == pytest.approx(1.0, abs=0.05)
    header = (tmp_path / "estimate-gp.csv").read_text().splitlines()[0]
    assert header == "log10_r,log10_value"
    assert not list(tmp_path.glob(".tmp-*"))


@pytest.mark.parametrize("method,target", [("box", 0.5), ("mc", 0.0)])
def test_estimate_methods_on_inverse_squares(capsys, method, target):
    code, out, _ = run(capsys, "estimate", "--measure", DOCS / "inverse_squares.json", "--method", method,
                       "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["slope"] == pytest.approx(target, abs=0.1)


def test_tv_command(capsys):
    code, out, _ = run(capsys, "tv", "--a", DOCS / "ex6_n10.json", "--b", DOCS / "dirac.json", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["tv_distance"] == pytest.approx(0.1, abs=1e-15)


def test_converge_command(capsys):
    code, out, _ = run(capsys, "converge", "--example", "ex1", "--mode", "setwise", "--format", "json")
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    assert result["status"] == "Refuted" and result["witness"]
    code, out, _ = run(capsys, "converge", "--example", "ex7", "--a", 0.5, "--mode", "tv", "--format", "json")
    assert json.loads(out)["result"]["status"] == "Certified"


def test_verify_summary(capsys):
    code, out, _ = run(capsys, "verify", "ex5", "ex6")
    assert code == EXIT_OK
    assert "ex5   PASS" in out and "2 examples, all claims pass" in out


def test_verify_exit_code_on_failed_claims(capsys):
    # too few samples for the numeric estimates to meet the tolerance
    code, out, _ = run(capsys, "verify", "ex3", "--samples", 20, "--tol", 0.001)
    assert code == EXIT_CLAIMS
    assert "failed:" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["exact", "--example", "nope"],
        ["exact"],
        ["exact", "--example", "ex7", "--a", "2"],
        ["verify", "ex9"],
    ],
)
def test_input_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_INPUT
    assert err.startswith("dimlab:")


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "mixture",\n "components": [}')
    code, _, err = run(capsys, "exact", "--measure", bad)
    assert code == EXIT_INPUT
    assert "line 2" in err


def test_missing_file_exit_code(tmp_path, capsys):
    code, _, _ = run(capsys, "exact", "--measure", tmp_path / "absent.json")
    assert code == EXIT_INPUT


def test_estimator_failure_exit_code(capsys):
    # seed 0 draws one sample on each atom, 0.5 apart: no pair within any scale
    code, _, err = run(capsys, "estimate", "--measure", DOCS / "two_atoms.json", "--method", "gp",
                       "--samples", 2, "--seed", 0, "--rmax", 0.1, "--rmin", 0.01)
    assert code == EXIT_RUNTIME
    assert "EmptyCorrelation" in err
    code, _, err = run(capsys, "estimate", "--measure", DOCS / "cantor_natural.json", "--method", "box",
                       "--delta", 0)
    assert code == EXIT_RUNTIME
    assert "estimator error" in err


def test_outputs_identical_across_runs(tmp_path):
    exe = shutil.which("dimlab")
    if exe is None:
        pytest.skip("console script not installed")
    outs = []
    for threads in ("1", "4"):
        d = tmp_path / threads
        subprocess.run([exe, "estimate", "--measure", str(DOCS / "cantor_natural.json"), "--method", "gp",
                        "--samples", "3000", "--seed", "7", "--out", str(d)], check=True,
                       env={"DIMLAB_THREADS": threads, "PATH": str(Path(exe).parent)})
        outs.append((d / "estimate-gp.json").read_bytes() + (d / "estimate-gp.csv").read_bytes())
    assert outs[0] == outs[1]
