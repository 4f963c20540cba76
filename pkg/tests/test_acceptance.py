"""Acceptance criteria, one test each, run on the default seed.

Every test prints one line with the worst residual, the tolerance it is held
to and the runtime against its budget, then asserts both.
"""

import json
import subprocess
import sys
import time

import pytest

from qsf.suites import SuiteConfig, run_suite

CFG = SuiteConfig()


def check(capsys, label, suites, budget_s, select=None):
    t0 = time.perf_counter()
    records = [r for s in suites for r in run_suite(s, CFG)]
    elapsed = time.perf_counter() - t0
    if select:
        records = [r for r in records if select(r)]
    assert records, "no records selected"
    failing = [r for r in records if not r.passed]
    worst = max(records, key=lambda r: r.residual / r.tolerance)
    ok = not failing and elapsed < budget_s
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {len(records)} checks, "
              f"worst {worst.name!r} {worst.residual:.2e} <= {worst.tolerance:.0e}, "
              f"{elapsed:.1f}s of {budget_s}s")
        for r in failing:
            print(f"       failing: {r.name} residual {r.residual:.3e} > {r.tolerance:.0e}")
    assert not failing
    assert elapsed < budget_s
    return records


def test_ac01_q_special_function_identities(capsys):
    recs = check(capsys, "q-special-function identities", ["qcore-identities"], 5)
    assert {r.name.split(" q=")[1] for r in recs} == {"0.3", "0.5", "0.7"}
    assert all(len(r.values) == 100 and r.tolerance == 1e-10 for r in recs)


def test_ac02_resummation(capsys):
    recs = check(capsys, "resummation sanity", ["resummation"], 10)
    lb = [r for r in recs if r.name.startswith("laplace-borel")]
    assert all(len(r.values) == 20 and r.tolerance == 1e-8 for r in lb)


def test_ac03_thomae(capsys):
    recs = check(capsys, "Thomae connection", ["thomae"], 10)
    assert {r.name.split()[1] for r in recs} == {"n=2", "n=3"}
    assert all(len(r.values) == 20 and r.tolerance == 1e-8 for r in recs)


def test_ac04_main_connection(capsys):
    recs = check(capsys, "main connection formula", ["main-connection"], 30)
    main = [r for r in recs if r.name.startswith("main connection")]
    assert len(main) == 4 and all(len(r.values) >= 20 and r.tolerance == 1e-6 for r in main)
    assert all(r.tolerance == 1e-9 for r in recs if "pseudo-constancy" in r.name)
    assert any("2phi1(a,0;b)" in r.name for r in recs)


def test_ac05_corollary(capsys):
    check(capsys, "corollary at infinity", ["corollary"], 10)


def test_ac06_system_solutions(capsys):
    recs = check(capsys, "system solutions", ["system-solutions"], 20)
    res = [r for r in recs if "residual" in r.name]
    assert all(len(r.values) >= 20 and r.tolerance == 1e-8 for r in res)


def test_ac07_connection_matrix(capsys):
    check(capsys, "connection matrix", ["connection-matrix"], 20)


def test_ac08_stokes_matrix(capsys):
    check(capsys, "q-Stokes matrix", ["stokes-matrix", "full-system"], 30)


def test_ac09_classical(capsys):
    check(capsys, "classical consistency", ["classical"], 10)


def test_ac10_q_to_one(capsys):
    recs = check(capsys, "q -> 1 recovery", ["qlimit"], 60)
    names = " ".join(r.name for r in recs)
    for needle in ("basic limits", "connection n=2", "connection n=3", "stokes n=2", "stokes n=3"):
        assert needle in names
    assert all(r.tolerance == 5e-2 for r in recs if r.name.endswith("final"))
    assert all(r.tolerance < 0.8 for r in recs if r.name.endswith("ratio"))


def test_full_sweep_runtime(tmp_path, capsys):
    out = tmp_path / "all.json"
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "qsf.cli", "verify", "all", "--out", str(out)],
                          capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    rep = json.loads(out.read_text())
    ok = proc.returncode == 0 and rep["pass"] and elapsed < 180
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] full verify sweep: {len(rep['records'])} checks, "
              f"exit {proc.returncode}, {elapsed:.1f}s of 180s")
    assert ok
