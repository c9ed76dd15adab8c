import io
import json
import math
import os
import subprocess
import sys

import pytest

from fracap import cli


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_constants_json():
    code, out, _ = run("constants", "--n", "2", "--alpha", "0.5")
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["omega"] == math.pi
    for key in ("value", "error", "method", "samples", "seed"):
        assert key in rec


def test_perimeter_round_trips_floats():
    code, out, _ = run("perimeter", "--shape", "interval:a=0,b=1", "--alpha-grid", "0.1:0.9:9")
    assert code == 0
    recs = json.loads(out)
    assert len(recs) == 9
    for r in recs:
        a = r["alpha"]
        assert r["value"] == pytest.approx(2 / (a * (1 - a)), rel=1e-12)
    # 17 significant digits survive the trip bit-for-bit
    assert recs[4]["value"] == 8.0


def test_csv_output_and_out_file(tmp_path):
    path = tmp_path / "r.csv"
    code, out, _ = run("perimeter", "--shape", "ball:n=2,r=1", "--alpha", "0.5", "--output",
                       "csv", "--out", str(path))
    assert code == 0 and out == ""
    header, row = path.read_text().splitlines()
    assert header.split(",")[:3] == ["shape", "n", "alpha"]
    assert "62.130638777780554" in row


def test_monte_carlo_record_carries_provenance():
    code, out, _ = run("perimeter", "--shape", "box:lo=0,0;hi=1,1", "--alpha", "0.5",
                       "--method", "mc", "--samples", "20000", "--seed", "11")
    (rec,) = json.loads(out)
    assert code == 0
    assert (rec["method"], rec["samples"], rec["seed"]) == ("monte-carlo", 20000, 11)


def test_workers_do_not_change_output():
    args = ("perimeter", "--shape", "ball:n=3,r=1", "--alpha", "0.3", "--method", "mc",
            "--samples", "40000")
    outs = {run(*args, "--workers", str(w))[1] for w in (1, 2, 8)}
    assert len(outs) == 1


def test_besov_both_routes():
    code, out, _ = run("besov", "--function", "tent:n=1,h=0.001953125", "--alpha", "0.5")
    assert code == 0
    recs = json.loads(out)
    assert [r["route"] for r in recs] == ["seminorm", "coarea"]
    assert recs[1]["agree"] is True


def test_capacity_record():
    code, out, _ = run("capacity", "--shape", "interval:a=-1,b=1", "--alpha", "0.5")
    (rec,) = json.loads(out)
    assert code == 0
    assert rec["lower"] == pytest.approx(16 * math.sqrt(2))
    assert rec["witness"] == "dilates(s=0)"


def test_verify_function_and_shape():
    code, out, _ = run("verify", "--function", "tent:n=1,h=0.0078125", "--alpha", "0.5")
    assert code == 0
    assert [r["id"] for r in json.loads(out)] == ["eq1", "eq3", "sobolev"]
    code, out, _ = run("verify", "--shape", "boxunion:lo=0,0;hi=2,1|lo=0,1;hi=1,2",
                       "--ineq", "eq4", "--family", "neighborhoods")
    assert code == 0
    assert json.loads(out)[0]["status"] == "pass"


def test_verify_needs_input():
    assert run("verify")[0] == 2
    assert run("verify", "--shape", "interval:a=0,b=1", "--ineq", "eq1")[0] == 2


def test_limits_pass_and_fail():
    code, out, _ = run("limits", "--shape", "interval:a=0,b=1", "--end", "1")
    assert code == 0
    assert {r["kind"] for r in json.loads(out)} == {"perimeter", "capacity"}
    code, out, _ = run("limits", "--shape", "interval:a=0,b=1", "--end", "0",
                       "--limit-tol", "1e-9")
    assert code == 1
    assert all(r["status"] == "fail" for r in json.loads(out))


def test_parse_error_exit_code():
    code, out, err = run("perimeter", "--shape", "box:lo=0;hi=x")
    assert code == 2 and out == ""
    assert "column 12" in err and err.rstrip().endswith("^")


def test_dimension_mismatch_exit_code():
    assert run("perimeter", "--shape", "interval:a=0,b=1", "--n", "2")[0] == 2
    assert run("perimeter", "--shape", "interval:a=0,b=1", "--alpha", "1.5")[0] == 2


def test_convergence_failure_exit_code(monkeypatch):
    import fracap.capacity as cap
    monkeypatch.setattr(cap, "sharp_kappa", lambda ctx: 1e-9)
    code, out, err = run("capacity", "--shape", "interval:a=-1,b=1", "--alpha", "0.5")
    assert code == 3
    assert "convergence" in err
    (rec,) = json.loads(out)
    assert rec["status"] == "convergence-failure"
    assert rec["value"] == pytest.approx(16 * math.sqrt(2))


def test_non_finite_floats_are_strings():
    text = cli.dumps([{"a": math.inf, "b": math.nan, "c": 0.1}])
    rec = json.loads(text)[0]
    assert rec == {"a": "Infinity", "b": "NaN", "c": 0.1}
    assert "0.10000000000000001" in text
    assert "Infinity" in cli.to_csv([{"a": math.inf}])


def test_bad_alpha_grid():
    with pytest.raises(SystemExit):
        run("perimeter", "--shape", "interval:a=0,b=1", "--alpha-grid", "0.1:0.2")


def test_seed_from_environment():
    env = dict(os.environ, FRACAP_SEED="42")
    out = subprocess.run([sys.executable, "-m", "fracap", "perimeter", "--shape",
                          "ball:n=2,r=1", "--alpha", "0.5", "--method", "mc", "--samples",
                          "1000"], env=env, capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)[0]["seed"] == 42


def test_csv_and_json_carry_identical_numbers():
    args = ("verify", "--function", "tent:n=1,h=0.0078125", "--alpha", "0.5")
    _, js, _ = run(*args)
    _, cs, _ = run(*args, "--csv")
    import csv
    rows = list(csv.DictReader(io.StringIO(cs)))
    for rec, row in zip(json.loads(js), rows):
        for key in ("lhs", "rhs", "ratio", "slack", "value", "error"):
            assert float(row[key]) == rec[key]
        assert row["status"] == rec["status"] and row["id"] == rec["id"]


def test_documented_invocations():
    code, out, _ = run("perimeter", "--shape", "interval:a=0,b=1", "--n", "1", "--alpha", "0.5")
    assert code == 0 and abs(json.loads(out)[0]["value"] - 8.0) <= 1e-8
    code, out, _ = run("verify", "--ineq", "eq1", "--function", "tent:n=1", "--alpha", "0.5")
    assert code == 0 and json.loads(out)[0]["ratio"] == pytest.approx(1.0, abs=1e-6)
    code, out, _ = run("limits", "--shape", "ball:n=2,r=1", "--end", "0")
    per = [r for r in json.loads(out) if r["kind"] == "perimeter"][0]
    assert code == 0 and per["extrapolated"] == pytest.approx(2 * math.pi ** 2, rel=0.02)
