import csv
import io
import json
import subprocess
import sys

import pytest

from kloosbox import moments
from kloosbox.cli import MOMENT_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_moment2_json(capsys):
    code, out, _ = run(capsys, "moment2", "--q", "7", "--c", "1", "--L", "3", "--method", "spectral", "--format", "json")
    assert code == 0
    data = json.loads(out)
    for key in ("q", "c", "L", "method", "S", "main_term_kind", "bound", "ratio"):
        assert key in data
    assert data["S"] == pytest.approx(100 / 7, rel=1e-9)
    assert data["method"] == "spectral"


def test_moment2_exact_fraction(capsys):
    code, out, _ = run(capsys, "moment2", "--q", "12", "--c", "5", "--L1", "3", "--L2", "7",
                       "--method", "pairs", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["L1"] == 3 and data["L2"] == 7
    rep = moments.second_moment_prefix(12, 5, 3, 7)
    assert data["S_exact"] == str(rep.exact)


def test_validation_exit_code(capsys):
    code, out, err = run(capsys, "moment2", "--q", "6", "--c", "3", "--L", "2")
    assert code == 2
    assert out == ""
    assert "c must be coprime to q" in err
    assert err.count("\n") == 1


def test_budget_exit_code(capsys):
    code, _, err = run(capsys, "moment2", "--q", "500", "--c", "1", "--L", "5", "--budget", "grid=1000")
    assert code == 3
    assert "budget" in err


def test_unknown_budget_name(capsys):
    code, _, err = run(capsys, "moment2", "--q", "5", "--c", "1", "--L", "2", "--budget", "nope=3")
    assert code == 2


def test_kloosterman_and_hyper(capsys):
    code, out, _ = run(capsys, "kloosterman", "--a", "1", "--b", "1", "--q", "5", "--format", "json")
    assert code == 0 and json.loads(out)["re"] == pytest.approx(0.38196601125, abs=1e-10)
    code, out, _ = run(capsys, "hyperkloosterman", "--ks", "1", "2", "3", "--c", "1", "--q", "7", "--format", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["within_bound"] == "True"
    code, _, _ = run(capsys, "hyperkloosterman", "--ks", "1", "2", "3", "--c", "7", "--q", "7")
    assert code == 2


def test_momentk_momentt_badboxes_covering(capsys):
    code, out, _ = run(capsys, "momentk", "--q", "101", "--c", "1", "--L", "11", "--k", "4", "--format", "json")
    assert code == 0 and json.loads(out)["bound_kind"] == "conj1"
    code, out, _ = run(capsys, "momentt", "--q", "5", "--c", "1", "--L", "2", "--method", "spectral", "--format", "json")
    assert code == 0 and json.loads(out)["S"] == pytest.approx(68.928)
    code, out, _ = run(capsys, "badboxes", "--q", "5", "--c", "1", "--L", "5", "--format", "json")
    assert code == 0 and json.loads(out)["bad_count"] == 0
    code, out, _ = run(capsys, "covering", "--q", "53", "--divisions", "256", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["r_tilde"] <= data["r_max"] and data["curve"][-1][1] == 1.0
    code, _, _ = run(capsys, "covering", "--q", "7", "--grid-step", "0.3")
    assert code == 2


def test_sweep_csv_round_trip(capsys):
    code, out, _ = run(capsys, "sweep", "moment", "--q-min", "50", "--q-max", "80", "--primes-only",
                       "--L-exp", "0.6", "--k", "4", "2", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0].keys()) == MOMENT_COLUMNS
    keys = [(int(r["q"]), int(r["k"])) for r in rows]
    assert keys == sorted(keys)
    for r in rows:
        int(r["q"]), int(r["c"]), int(r["t"]), int(r["L1"]), int(r["L2"]), int(r["k"])
        float(r["S"]), float(r["bound"]), float(r["ratio"])
        assert r["main_kind"] in ("thm1", "thm3") and r["method"] == "prefix"
        assert r["elapsed_ms"] == ""


def test_sweep_badboxes(capsys):
    code, out, _ = run(capsys, "sweep", "badboxes", "--q-min", "50", "--q-max", "150", "--primes-only", "--L-exp", "0.6")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 20  # primes in [50, 150]
    for r in rows:
        assert 0 <= float(r["fraction"]) <= 1
        assert int(r["bad_count"]) <= int(r["total"])


def test_sweep_empty_range(capsys):
    code, out, _ = run(capsys, "sweep", "moment", "--q-min", "10", "--q-max", "5", "--L", "3")
    assert code == 0
    assert out == ",".join(MOMENT_COLUMNS) + "\n"


def test_sweep_timing_column(capsys):
    code, out, _ = run(capsys, "sweep", "moment", "--q-min", "7", "--q-max", "8", "--L", "3", "--timing")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(float(r["elapsed_ms"]) >= 0 for r in rows)


def test_sweep_determinism_across_threads(capsys):
    argv = ["sweep", "moment", "--q-min", "20", "--q-max", "60", "--c", "1", "2", "--L-exp", "0.6",
            "--k", "2", "3", "--method", "pairs"]
    _, one, _ = run(capsys, *argv, "--threads", "1")
    _, eight, _ = run(capsys, *argv, "--threads", "8")
    assert one == eight


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, out, _ = run(capsys, "sweep", "moment", "--q-min", "7", "--q-max", "9", "--L", "2", "--output", str(path))
    assert code == 0 and out == ""
    data = path.read_bytes()
    assert b"\r" not in data
    assert data.decode("utf-8").startswith("q,c,t,")


def test_verify_small(capsys):
    code, out, _ = run(capsys, "verify", "--max-q", "12", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["status"] for r in rows} == {"pass"}
    assert len(rows) == 9


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "kloosbox", "kloosterman", "--a", "0", "--b", "0", "--q", "12"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "4" in res.stdout
