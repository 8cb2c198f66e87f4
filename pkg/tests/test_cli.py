import csv
import io
import json
import math
import subprocess
import sys

import pytest

from chshnoise.cli import SCAN_HEADER, main, read_experiment_csv, CLIError
from chshnoise.fit import REFERENCE_TABLE
from chshnoise.optimize import beta_max

TSIRELSON = 2 * math.sqrt(2)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_state_json(capsys):
    code, out, _ = run(capsys, "state", "--p", "1", "--r", "0", "--basis", "phi-plus")
    assert code == 0
    rec = json.loads(out)
    entries = rec["entries"]
    for i, j in [(0, 0), (0, 3), (3, 0), (3, 3)]:
        assert entries[i][j] == [0.5, 0.0]
    assert rec["valid"] is True
    assert rec["trace_defect"] <= 1e-12

    code, out, _ = run(capsys, "state", "--p", "0", "--r", "0")
    entries = json.loads(out)["entries"]
    assert [entries[i][i][0] for i in range(4)] == [0.25] * 4


def test_state_csv(capsys):
    code, out, _ = run(capsys, "state", "--p", "0.3", "--r", "0.3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "row,col,re,im"
    assert len([l for l in lines[1:] if not l.startswith("#")]) == 16
    assert "valid=true" in lines[-1]


def test_state_rejects_outside_simplex(capsys):
    code, out, err = run(capsys, "state", "--p", "0.6", "--r", "0.5")
    assert code != 0
    assert out == ""
    assert "p + r exceeds 1" in err


def test_beta(capsys):
    code, out, _ = run(capsys, "beta", "--p", "0.5", "--r", "0.5", "--theta", "1.0", "--phi", "0.264547")
    rec = json.loads(out)
    assert rec["beta_trace"] == pytest.approx(2.21989, abs=5e-6)
    assert rec["beta_trace"] == pytest.approx(rec["beta_closed"], abs=1e-12)
    _, out, _ = run(capsys, "beta", "--p", "0.5", "--r", "0.5", "--basis", "phi-plus")
    rec = json.loads(out)
    assert rec["beta_trace"] == pytest.approx(-rec["beta_closed"], abs=1e-12)


def test_maximize(capsys):
    _, out, _ = run(capsys, "maximize", "--p", "1", "--r", "0")
    rec = json.loads(out)
    assert rec["beta_max"] == pytest.approx(2.828427, abs=1e-6)
    assert rec["theta_star"] == pytest.approx(1.570796, abs=1e-6)
    assert rec["phi_star"] == pytest.approx(0.785398, abs=1e-6)
    assert rec["tol"] == 1e-12  # defaults echoed

    _, out, _ = run(capsys, "maximize", "--p", "0", "--r", "1")
    rec = json.loads(out)
    assert rec["beta_max"] == 2.0 and rec["degenerate"] is True

    _, out, _ = run(capsys, "maximize", "--p", "0.5", "--r", "0.5", "--degrees")
    rec = json.loads(out)
    assert rec["beta_max"] == pytest.approx(2.2221, abs=5e-4)
    assert rec["theta_star"] == pytest.approx(math.degrees(1.0737474), abs=1e-4)


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "--p-steps", "3", "--r-steps", "3")
    assert code == 0
    assert out.splitlines()[0] == ",".join(SCAN_HEADER)
    rows = rows_of(out)
    assert len(rows) == 6
    assert [(float(r["p"]), float(r["r"])) for r in rows] == [
        (0, 0), (0, 0.5), (0, 1), (0.5, 0), (0.5, 0.5), (1, 0)
    ]
    corner = rows[-1]
    assert float(corner["beta_max"]) == pytest.approx(2.828427, abs=1e-6)
    assert rows[2]["degenerate"] == "true"
    assert all(float(r["beta_max"]) <= TSIRELSON + 1e-9 for r in rows)
    assert out.endswith("\n")


def test_scan_deterministic_and_json(capsys):
    _, a, _ = run(capsys, "scan", "--p-steps", "11", "--r-steps", "11")
    _, b, _ = run(capsys, "scan", "--p-steps", "11", "--r-steps", "11")
    assert a == b
    _, out, _ = run(capsys, "scan", "--p-steps", "3", "--r-steps", "3", "--format", "json")
    recs = json.loads(out)
    assert len(recs) == 6 and set(recs[0]) == set(SCAN_HEADER)


def test_scan_rejects_small_steps(capsys):
    code, _, err = run(capsys, "scan", "--p-steps", "1")
    assert code == 1 and "at least 2" in err


def test_scan_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, "scan", "--p-steps", "2", "--r-steps", "2",
                       "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 1 and "cannot write" in err


def test_curve_families(capsys, tmp_path):
    out_file = tmp_path / "nc.csv"
    code, _, _ = run(capsys, "curve", "--family", "no-colored", "--p-steps", "11", "--out", str(out_file))
    assert code == 0
    rows = rows_of(out_file.read_text())
    assert list(rows[0]) == ["p", "beta_max", "theta_star", "phi_star"]
    for row in rows:
        assert float(row["beta_max"]) == pytest.approx(TSIRELSON * float(row["p"]), abs=1e-9)

    _, out, _ = run(capsys, "curve", "--family", "no-white", "--p-steps", "1001")
    rows = rows_of(out)
    assert float(rows[1]["p"]) == pytest.approx(0.001)
    assert float(rows[1]["beta_max"]) > 2.0

    _, out, _ = run(capsys, "curve", "--family", "fixed-white", "--white-frac", "0.035", "--p-steps", "5")
    assert float(rows_of(out)[-1]["beta_max"]) == pytest.approx(2.828427, abs=1e-6)


def test_curve_unknown_family(capsys):
    with pytest.raises(SystemExit) as info:
        main(["curve", "--family", "pink"])
    assert info.value.code == 2


def test_threshold(capsys):
    code, out, _ = run(capsys, "threshold", "--family", "no-colored")
    assert code == 0
    assert json.loads(out)["threshold_p"] == pytest.approx(1 / math.sqrt(2), abs=1e-6)
    code, _, err = run(capsys, "threshold", "--family", "no-white", "--p-lo", "0.01", "--p-hi", "1")
    assert code == 1 and "does not change sign" in err


def _table_input(tmp_path, extra=""):
    lines = ["# synthetic points from the reference table", "p,beta_exp,sigma"]
    for row in REFERENCE_TABLE:
        if row.p + row.r <= 1.0:
            lines.append(f"{row.p!r},{beta_max(row.p, row.r)!r},0.01")
    path = tmp_path / "points.csv"
    path.write_text("\n".join(lines) + "\n" + extra)
    return path


def test_fit_table_input(capsys, tmp_path):
    path = _table_input(tmp_path)
    code, out, _ = run(capsys, "fit", str(path))
    assert code == 0
    rows = rows_of(out)
    expected = [row for row in REFERENCE_TABLE if row.p + row.r <= 1.0]
    assert len(rows) == len(expected)
    for row, rec in zip(expected, rows):
        assert rec["status"] == "ok"
        assert float(rec["r"]) == pytest.approx(row.r, abs=0.01)
        assert rec["sigma"] == "0.01"


def test_fit_out_of_range_row(capsys, tmp_path):
    path = _table_input(tmp_path, extra="0.5,3.0,\n")
    code, out, err = run(capsys, "fit", str(path), "--format", "json")
    recs = json.loads(out)
    assert recs[-1]["status"] == "out_of_range"
    assert recs[-1]["r"] is None
    assert code == 1
    assert "skipped" in err


def test_fit_empty_data(capsys, tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("# nothing yet\np,beta_exp\n")
    code, out, _ = run(capsys, "fit", str(path))
    assert code == 0
    assert len(out.splitlines()) == 1
    code, out, _ = run(capsys, "fit", str(path), "--format", "json")
    assert code == 0 and json.loads(out) == []


@pytest.mark.parametrize(
    "body, lineno",
    [("p,beta_exp\n0.5,2.1\n0.4,abc\n", 3), ("p,beta_exp\n0.5\n", 2), ("x,y\n0.5,2.1\n", 1),
     ("# c\np,beta_exp\n1.5,2.0\n", 3)],
)
def test_fit_malformed(capsys, tmp_path, body, lineno):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    code, out, err = run(capsys, "fit", str(path))
    assert code == 1
    assert f"line {lineno}" in err


def test_fit_output_round_trips(capsys, tmp_path):
    path = _table_input(tmp_path)
    _, first, _ = run(capsys, "fit", str(path))
    again = tmp_path / "again.csv"
    again.write_text(first)
    _, second, _ = run(capsys, "fit", str(again))
    assert second == first
    points = read_experiment_csv(first)
    original = read_experiment_csv(path.read_text())
    assert points == original


def test_read_experiment_csv_requires_header():
    with pytest.raises(CLIError):
        read_experiment_csv("# only comments\n")


def test_table(capsys):
    code, out, _ = run(capsys, "table", "--format", "json")
    assert code == 0
    recs = {rec["nr"]: rec for rec in json.loads(out)}
    assert recs[6]["r"] == pytest.approx(0.551, abs=1e-12)
    assert recs[1]["r"] == pytest.approx(0.9604, abs=1e-12)
    assert recs[2]["one_minus_p"] == pytest.approx(0.94, abs=1e-12)
    assert recs[2]["printed_one_minus_p"] == 0.97
    assert "one_minus_p_mismatch" in recs[2]["flags"]

    code, out, _ = run(capsys, "table")
    assert code == 0 and "one_minus_p_mismatch" in out
    _, out, _ = run(capsys, "table", "--format", "csv")
    assert len(rows_of(out)) == 10


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "chshnoise", "maximize", "--p", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["beta_max"] == pytest.approx(TSIRELSON, abs=1e-12)
