"""Command line driver: ``qsf eval``, ``qsf verify`` and ``qsf merge``.

Reports are JSON documents tagged with SCHEMA.  Complex numbers are written as
[re, im], branched points as {modulus, argument}, floats with 17 significant
digits.  Apart from wall_time_ms a report depends only on its inputs and seed.
"""

from __future__ import annotations

import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import classical as cl
from .errors import DomainError, QSFError, SchemaMismatch, UnknownFunction
from .qcore import BranchedPoint, QContext, log_q_gamma, pochhammer_infinite, q_exponential, q_gamma, theta
from .qseries import ConfluentEquationSpec, HypergeometricParams, basic_phi, classical_F, f0_basis
from .resummation import f_infinity_basis, nf
from .suites import SUITES, Record, SuiteConfig, run_suite, trend_records, trend_reports

SCHEMA = "qsf-report/1"

EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2, 64


# ------------------------------------------------------------ serialization


def _float(x: float):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.17g}")


def to_json(obj):
    """Map results onto plain JSON values."""
    if isinstance(obj, BranchedPoint):
        return {"modulus": _float(obj.modulus), "argument": _float(obj.argument)}
    if isinstance(obj, Record):
        return {"name": obj.name, "values": to_json(obj.values),
                "residual": _float(obj.residual), "tolerance": _float(obj.tolerance),
                "pass": obj.passed}
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, np.ndarray):
        return [to_json(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json(x) for x in obj]
    return obj


def _dump(report: dict) -> str:
    # repr of a float already round-trips, the 17-digit rounding happened in to_json
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def parse_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    raise DomainError(f"cannot read a complex number from {v!r}")


def parse_point(v) -> BranchedPoint:
    if isinstance(v, dict):
        return BranchedPoint(float(v["modulus"]), float(v["argument"]))
    return BranchedPoint.from_complex(parse_complex(v))


def _report(command: str, config: dict, records: list, seed, t0: float, **extra) -> dict:
    rep = {
        "schema": SCHEMA,
        "command": command,
        "library_version": __version__,
        "seed": seed,
        "config": to_json(config),
        "records": [to_json(r) if isinstance(r, Record) else r for r in records],
        "pass": all((r.passed if isinstance(r, Record) else r["pass"]) for r in records),
    }
    rep.update(extra)
    rep["wall_time_ms"] = _float(round((time.perf_counter() - t0) * 1000, 3))
    return rep


def _write(report: dict, out: str | None):
    text = _dump(report)
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


# --------------------------------------------------------------- evaluation


def _hyper(p, kind):
    return HypergeometricParams([parse_complex(x) for x in p.get("upper", [])],
                                [parse_complex(x) for x in p.get("lower", [])], kind)


def _confluent(p):
    a = [parse_complex(x) for x in p["a"]]
    return ConfluentEquationSpec(len(a) + 1, a, [parse_complex(x) for x in p["b"]])


# name -> (needs a branched point, evaluator(params, point, ctx))
REGISTRY = {
    "theta": (False, lambda p, z, ctx: theta(z, ctx)),
    "q_exponential": (False, lambda p, z, ctx: q_exponential(z, ctx)),
    "q_gamma": (False, lambda p, z, ctx: q_gamma(z, ctx)),
    "log_q_gamma": (False, lambda p, z, ctx: log_q_gamma(z, ctx)),
    "pochhammer": (False, lambda p, z, ctx: pochhammer_infinite(z, ctx)),
    "basic_phi": (False, lambda p, z, ctx: basic_phi(_hyper(p, "q"), z, ctx)),
    "classical_F": (False, lambda p, z, ctx: classical_F(_hyper(p, "classical"), z, ctx)),
    "nf": (False, lambda p, z, ctx: nf([parse_complex(x) for x in p["a"]],
                                       [parse_complex(x) for x in p["b"]],
                                       parse_complex(p["lambda"]), z, ctx)),
    "f0_basis": (True, lambda p, z, ctx: f0_basis(_confluent(p), int(p["index"]), z, ctx)),
    "f_infinity_basis": (True, lambda p, z, ctx: f_infinity_basis(
        _confluent(p), parse_complex(p["lambda"]), int(p["index"]), z, ctx)),
    "gamma": (False, lambda p, z, ctx: cl.gamma(z)),
}

# q -> 1 limits offered as an extra column when --schedule is given
LIMITS = {
    "q_gamma": lambda p, z: cl.gamma(z),
    "log_q_gamma": lambda p, z: cl.log_gamma(z),
}


def evaluate_points(fn: str, params: dict, points: list, ctx: QContext,
                    schedule: tuple | None = None) -> tuple[list, bool]:
    """Records for each point and whether any point hit a domain error."""
    try:
        needs_branch, f = REGISTRY[fn]
    except KeyError:
        raise UnknownFunction(f"unknown function {fn!r}; choose from {', '.join(REGISTRY)}") from None
    records, domain_error = [], False
    for raw in points:
        try:
            if needs_branch:
                z = parse_point(raw)
            else:
                z = parse_point(raw).to_complex() if isinstance(raw, dict) else parse_complex(raw)
            label = f"{fn}({json.dumps(to_json(z))})"
            if schedule and fn in LIMITS:
                vals = [complex(f(params, z, ctx.with_q(q))) for q in schedule]
                exact = complex(LIMITS[fn](params, z))
                errs = [abs(v - exact) / max(1.0, abs(exact)) for v in vals]
                records.append({"name": label, "values": to_json(vals + [exact]),
                                "columns": [f"q={q}" for q in schedule] + ["limit"],
                                "residual": _float(errs[-1]),
                                "tolerance": _float(cl.TREND_FINAL),
                                "pass": errs[-1] <= cl.TREND_FINAL})
            else:
                v = complex(f(params, z, ctx))
                records.append({"name": label, "values": to_json([v]), "residual": 0.0,
                                "tolerance": _float(ctx.tol), "pass": True})
        except (QSFError, ValueError, KeyError, TypeError) as exc:
            domain_error = True
            records.append({"name": f"{fn}({json.dumps(raw)})", "values": [],
                            "error": f"{type(exc).__name__}: {exc}",
                            "residual": "inf", "tolerance": _float(ctx.tol), "pass": False})
    return records, domain_error


# -------------------------------------------------------------- verification


def verify_records(names: list, cfg: SuiteConfig, csv_dir: str | None = None) -> list:
    """Run suites concurrently; records come back in declaration order."""
    def one(name):
        if name == "qlimit":
            reports = trend_reports(cfg)
            if csv_dir:
                _write_trends(reports, Path(csv_dir))
            return [r for label, rep in reports for r in trend_records(rep, label)]
        return run_suite(name, cfg)

    with ThreadPoolExecutor(max_workers=min(4, len(names))) as pool:
        chunks = list(pool.map(one, names))
    return [r for chunk in chunks for r in chunk]


def _write_trends(reports, folder: Path):
    folder.mkdir(parents=True, exist_ok=True)
    with open(folder / "qlimit_trends.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["check", "quantity", "q", "error"])
        for label, rep in reports:
            for key, q, e in rep.rows():
                w.writerow([label, key, repr(q), f"{e:.17g}"])


# ------------------------------------------------------------------ click


def _schedule(text: str) -> tuple:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise click.BadParameter(f"not a comma separated list of numbers: {text!r}")
    if not vals or not all(0 < v < 1 for v in vals):
        raise click.BadParameter("schedule values must lie in (0, 1)")
    return vals


def _load_json(path: str | None, default):
    if path is None:
        return default
    return json.loads(Path(path).read_text())


@click.group()
@click.version_option(__version__, prog_name="qsf")
def cli():
    """q-special functions and q-Stokes verification."""


@cli.command("eval")
@click.argument("fn")
@click.option("--q", "q", type=float, default=0.5, show_default=True)
@click.option("--tol", type=float, default=1e-16, show_default=True)
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--points", "points_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON list of points: numbers, [re, im] pairs or {modulus, argument}.")
@click.option("--schedule", default=None, help="Comma separated q values for limit columns.")
@click.option("--out", type=click.Path(dir_okay=False))
def eval_cmd(fn, q, tol, params_path, points_path, schedule, out):
    """Evaluate FN at every point of a JSON list."""
    t0 = time.perf_counter()
    sched = _schedule(schedule) if schedule else None
    try:
        params = _load_json(params_path, {})
        points = _load_json(points_path, [])
        if not isinstance(points, list):
            raise DomainError("the points file must hold a JSON list")
        ctx = QContext(q, tol=tol)
        records, bad = evaluate_points(fn, params, points, ctx, sched)
    except UnknownFunction as exc:
        click.echo(f"error: {exc.args[0]}", err=True)
        sys.exit(EXIT_USAGE)
    except (QSFError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DOMAIN)
    config = {"function": fn, "q": q, "tol": tol, "params": params, "points": points,
              "schedule": list(sched) if sched else None}
    rep = _report("eval", config, records, None, t0)
    _write(rep, out)
    if bad:
        sys.exit(EXIT_DOMAIN)
    sys.exit(EXIT_OK if rep["pass"] else EXIT_FAIL)


@cli.command("verify")
@click.argument("suite", required=False, default=None)
@click.option("--q", "q", type=float, default=None, help="Run at this q instead of the suite's own set.")
@click.option("--tol", type=float, default=1e-16, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--schedule", default="0.9,0.99,0.999", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--csv", "csv_dir", type=click.Path(file_okay=False),
              help="Also write the q -> 1 trend table as CSV into this folder.")
def verify_cmd(suite, q, tol, seed, schedule, out, csv_dir):
    """Run SUITE (or `all`) and report every check."""
    t0 = time.perf_counter()
    if not suite:
        click.echo(f"usage: qsf verify <suite>; suites: {', '.join(SUITES)}, all", err=True)
        sys.exit(EXIT_USAGE)
    names = list(SUITES) if suite == "all" else [suite]
    if names[0] not in SUITES:
        click.echo(f"error: unknown suite {suite!r}; choose from {', '.join(SUITES)}, all", err=True)
        sys.exit(EXIT_USAGE)
    sched = _schedule(schedule)
    try:
        cfg = SuiteConfig(qs=(q,) if q is not None else None, seed=seed, schedule=sched, tol=tol)
        if q is not None:
            cfg.ctx(q)
        records = verify_records(names, cfg, csv_dir)
    except QSFError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_DOMAIN)
    config = {"suite": suite, "suites": names, "q": q, "tol": tol, "seed": seed,
              "schedule": list(sched)}
    rep = _report("verify", config, records, seed, t0)
    _write(rep, out)
    sys.exit(EXIT_OK if rep["pass"] else EXIT_FAIL)


def merge_reports(reports: list) -> dict:
    t0 = time.perf_counter()
    versions = {r.get("schema") for r in reports}
    if versions != {SCHEMA}:
        raise SchemaMismatch(f"cannot merge schema versions {sorted(map(str, versions))}")
    records = [rec for r in reports for rec in r["records"]]
    config = {"merged": [r.get("config") for r in reports]}
    return _report("merge", config, records, [r.get("seed") for r in reports], t0)


@cli.command("merge")
@click.argument("files", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
def merge_cmd(files, out):
    """Concatenate the records of several reports."""
    if not files:
        click.echo("usage: qsf merge <files...> --out <file.json>", err=True)
        sys.exit(EXIT_USAGE)
    try:
        rep = merge_reports([json.loads(Path(f).read_text()) for f in files])
    except (SchemaMismatch, json.JSONDecodeError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DOMAIN)
    _write(rep, out)
    sys.exit(EXIT_OK if rep["pass"] else EXIT_FAIL)


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="qsf", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.Abort:
        sys.exit(EXIT_USAGE)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
