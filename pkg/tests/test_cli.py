import json
import subprocess
import sys

import pytest

from xxz.cli import UsageError, parse_grid, render, run


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gap_example(capsys):
    code, out, _ = _run(capsys, "gap", "--spin", "0.5", "--length", "8", "--delta", "2", "--sector", "4")
    assert code == 0
    header, row = out.strip().split("\n")
    assert header.split(",")[-1] == "gap"
    assert abs(float(row.split(",")[-1]) - (1 - 0.5 * 0.9238795325112867)) < 1e-10


def test_output_is_deterministic(capsys):
    argv = ("spectrum", "--length", "5", "--grid", "0:1:0.5", "--sector", "2")
    a = _run(capsys, *argv)[1]
    b = _run(capsys, *argv)[1]
    assert a == b and "\r" not in a


def test_usage_errors(capsys):
    assert _run(capsys, "gap", "--length", "6")[0] == 1
    assert _run(capsys, "gap", "--length", "6", "--delta", "2", "--q", "0.3")[0] == 1
    assert _run(capsys, "nonsense")[0] == 1
    assert _run(capsys, "lowerbound", "--grid", "0:0.5:0.25")[0] == 1
    code, _, err = _run(capsys, "gap", "--length", "6", "--delta", "0.5")
    assert code == 1 and err


def test_delta_infinity_and_q_zero(capsys):
    a = _run(capsys, "gap", "--length", "6", "--delta", "inf", "--sector", "3")
    b = _run(capsys, "gap", "--length", "6", "--q", "0", "--sector", "3")
    assert a[0] == b[0] == 0
    assert a[1].split("\n")[1].split(",")[-1] == b[1].split("\n")[1].split(",")[-1]


def test_perturb_json_rationals(capsys):
    code, out, _ = _run(capsys, "perturb", "--spin", "1", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["E2"] == "-1/3" and rows[1]["E2"] == "**"
    assert rows[0]["E2_tabulated"] == "-1/6"


def test_lowerbound_ising_limit(capsys):
    code, out, _ = _run(capsys, "lowerbound", "--spin", "1", "--length", "6", "--sector", "6", "--grid", "0:0:1",
                        "--format", "json")
    assert code == 0
    assert abs(json.loads(out)[0]["one_minus_delta"] - 0.5) < 1e-12


def test_ensemble_certificates(capsys):
    code, out, _ = _run(capsys, "ensemble", "--length", "2", "--q", "0.6", "--sticks", "6", "--sector", "7")
    assert code == 0
    certs = json.loads(out)
    assert {c["formula_id"] for c in certs} >= {"stick.activity_ratio"}


def test_negative_grid_needs_equals_form(capsys):
    code, out, _ = _run(capsys, "ensemble", "--length", "4", "--q", "0.5", "--grid=-1:1:1")
    assert code == 0 and len(out.strip().split("\n")) == 4


def test_output_file(tmp_path, capsys):
    p = tmp_path / "o.csv"
    assert _run(capsys, "profile", "--delta", "2", "--grid", "0:1:1", "--out", str(p))[0] == 0
    assert p.read_text().startswith("x,quantum_s3,classical_s3\n")


def test_parse_grid_and_render():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(UsageError):
        parse_grid("1:0")
    assert render([{"a": 1, "b": 0.1}], "csv") == "a,b\n1,0.1\n"


def test_console_script_verify():
    r = subprocess.run([sys.executable, "-m", "xxz.cli", "verify", "--suite", "small"], capture_output=True,
                       text=True, timeout=600)
    assert r.returncode == 0, r.stdout + r.stderr
    assert r.stdout.count("PASS") == 11
