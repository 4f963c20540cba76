import json
import subprocess
import sys

import pytest

from qsf.cli import SCHEMA, main


def run(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    out = capsys.readouterr()
    return exc.value.code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)
    return write


def test_eval_theta_three_points(files, capsys):
    pts = files("pts.json", [0.5, [0.3, 0.2], {"modulus": 2.0, "argument": 1.0}])
    code, out, _ = run(["eval", "theta", "--q", "0.5", "--points", pts], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["schema"] == SCHEMA and len(rep["records"]) == 3
    re, im = rep["records"][1]["values"][0]
    assert isinstance(re, float) and isinstance(im, float)


def test_eval_nf_outside_domain_is_a_per_point_error(files, capsys):
    params = files("p.json", {"a": [0.5, 0.7], "b": [], "lambda": 1.3})
    pts = files("pts.json", [0.001, 5.0])
    code, out, _ = run(["eval", "nf", "--params", params, "--points", pts], capsys)
    rep = json.loads(out)
    assert code == 2
    assert "OutsideRadius" in rep["records"][0]["error"]
    assert rep["records"][1]["pass"]


def test_eval_q_gamma_on_schedule_has_limit_column(files, capsys):
    pts = files("pts.json", [0.5, [1.3, 0.4]])
    code, out, _ = run(["eval", "q_gamma", "--points", pts, "--schedule", "0.9,0.99,0.999"], capsys)
    rep = json.loads(out)
    assert code == 0
    rec = rep["records"][0]
    assert rec["columns"][-1] == "limit" and len(rec["values"]) == 4
    assert abs(rec["values"][-1][0] - 3.141592653589793**0.5) < 1e-13


def test_unknown_function_and_empty_suite_are_usage_errors(files, capsys):
    pts = files("pts.json", [0.5])
    assert run(["eval", "nope", "--points", pts], capsys)[0] == 64
    assert run(["verify"], capsys)[0] == 64
    assert run(["verify", "nope"], capsys)[0] == 64
    assert run(["verify", "thomae", "--schedule", "0.9,2"], capsys)[0] == 64


def test_verify_writes_deterministic_report(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["verify", "stokes-matrix", "--seed", "3", "--out", str(p)], capsys)[0] == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra.pop("wall_time_ms") >= 0 and rb.pop("wall_time_ms") >= 0
    assert ra == rb
    assert ra["config"]["seed"] == 3 and ra["config"]["schedule"] == [0.9, 0.99, 0.999]
    assert all(r["pass"] == (r["residual"] <= r["tolerance"]) for r in ra["records"])


def test_verify_domain_error_exit_code(capsys):
    assert run(["verify", "thomae", "--q", "1.5"], capsys)[0] == 2


def test_qlimit_csv(tmp_path, capsys):
    code, _, _ = run(["verify", "qlimit", "--out", str(tmp_path / "r.json"),
                      "--csv", str(tmp_path / "csv")], capsys)
    assert code == 0
    lines = (tmp_path / "csv" / "qlimit_trends.csv").read_text().splitlines()
    assert lines[0] == "check,quantity,q,error" and len(lines) > 20


def test_merge(tmp_path, capsys):
    good = {"schema": SCHEMA, "config": {}, "seed": 0,
            "records": [{"name": "x", "residual": 0.0, "tolerance": 1.0, "pass": True}]}
    bad = dict(good, records=[{"name": "y", "residual": 2.0, "tolerance": 1.0, "pass": False}])
    old = dict(good, schema="qsf-report/0")
    paths = {}
    for name, rep in (("g", good), ("b", bad), ("o", old)):
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(json.dumps(rep))
    code, out, _ = run(["merge", str(paths["g"]), str(paths["g"])], capsys)
    assert code == 0 and len(json.loads(out)["records"]) == 2
    assert run(["merge", str(paths["g"]), str(paths["b"])], capsys)[0] == 1
    assert run(["merge", str(paths["g"]), str(paths["o"])], capsys)[0] == 2


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "qsf.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "qsf" in out.stdout
