"""Seeded verification campaigns behind ``qsf verify``.

Each suite returns a list of Records in a fixed order.  A record passes iff
its residual is at most its tolerance; trend checks are split into a
"final" record and a "ratio" record so that rule holds for them too.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import classical as cl
from .connection import (
    corollary_fn_check,
    main_connection_coeffs,
    overlap_annulus,
    thomae_overlap,
    thomae_residual,
    verify_main_connection,
)
from .errors import DomainError, QSFError
from .qcore import (
    BranchedPoint,
    QContext,
    log_pochhammer,
    log_theta,
    pochhammer_finite,
    q_exponential,
    q_exponential_taylor,
    theta,
)
from .qseries import ConfluentEquationSpec, FormalPowerSeries, f0_basis, q_difference_residual
from .qsystem import (
    F0_handle,
    Finf_handle,
    Sq_closed,
    Sq_numeric,
    SystemSpec,
    Uq_closed,
    Uq_inverse_closed,
    Uq_numeric,
    build_diagonalized,
    full_stokes_b,
    overlap_moduli,
    system_residual,
    transport_to_full,
)
from .resummation import (
    exponential_solution_value,
    nf,
    nf_operator,
    q_borel,
    q_laplace,
)


@dataclass
class Record:
    name: str
    values: list = field(default_factory=list)
    residual: float = math.nan
    tolerance: float = math.nan

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


@dataclass(frozen=True)
class SuiteConfig:
    qs: tuple | None = None          # None: the suite's own default set
    seed: int = 0
    schedule: tuple = cl.DEFAULT_SCHEDULE
    tol: float = 1e-16

    def ctx(self, q: float) -> QContext:
        return QContext(q, tol=self.tol)

    def q_values(self, default: Sequence[float]) -> tuple:
        return tuple(self.qs) if self.qs else tuple(default)


def _max(rec: Record, value: float):
    rec.values.append(value)
    rec.residual = value if math.isnan(rec.residual) else max(rec.residual, value)


# ------------------------------------------------------------ seeded draws


def spiral_distance(base: complex, w: complex, q: float, n_range=None) -> float:
    """min over n of |w / (base q^n) - 1|, n optionally clipped to (lo, hi)."""
    r = complex(w) / complex(base)
    n0 = round(math.log(abs(r)) / math.log(q))
    lo, hi = (None, None) if n_range is None else n_range
    best = math.inf
    for n in range(n0 - 2, n0 + 3):
        if (lo is not None and n < lo) or (hi is not None and n > hi):
            continue
        best = min(best, abs(r * q ** (-n) - 1))
    return best


SEPARATION = 0.3


def _unit(rng, lo=0.5, hi=1.5):
    return cmath.rect(rng.uniform(lo, hi), rng.uniform(-math.pi, math.pi))


def draw_confluent(rng, n: int, q: float, sep: float = SEPARATION) -> ConfluentEquationSpec:
    """Parameters a, b at least ``sep`` (relative) away from every degenerate spiral."""
    while True:
        a = [_unit(rng) for _ in range(n - 1)]
        b = [_unit(rng) for _ in range(n - 1)]
        ok = all(spiral_distance(a[j], a[i], q) > sep for i in range(n - 1) for j in range(i))
        ok &= all(spiral_distance(1.0, x, q, (None, 0)) > sep for x in b)
        if ok:
            return ConfluentEquationSpec(n, a, b)


def _admissible_lambda(rng, spec: ConfluentEquationSpec, q: float, sep=SEPARATION) -> complex:
    pa, pb = complex(np.prod(spec.a)), complex(np.prod(spec.b))
    while True:
        lam = _unit(rng)
        if all(spiral_distance(-1.0, lam * pb / (ai * pa), q) > sep for ai in spec.a):
            return lam


def _admissible_z(rng, spec, lam, q, lo, hi, sep=SEPARATION) -> BranchedPoint:
    pa, pb = complex(np.prod(spec.a)), complex(np.prod(spec.b))
    while True:
        z = BranchedPoint(lo * (hi / lo) ** rng.uniform(0.1, 0.9), rng.uniform(-3.0, 3.0))
        zc = z.to_complex()
        if (spiral_distance(1.0, zc, q) > sep and spiral_distance(-1.0, zc, q) > sep
                and spiral_distance(-1.0, lam * zc, q) > sep
                and spiral_distance(-1.0, lam * zc * pb / pa, q) > sep):
            return z


def draw_system(rng, n: int, q: float, gap: float = 0.2) -> SystemSpec:
    """Random A with separated eigenvalues and 1 - (1-q) lambda bounded away from 0."""
    while True:
        A = 0.7 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        try:
            s = SystemSpec(A, q)
        except QSFError:
            continue
        if _separated(s.eig_n, s.eig_n1, s.eig_n2, gap) and all(
                abs(1 - (1 - q) * x) >= gap for x in s.eig_n + s.eig_n1):
            return s


def _separated(eig_n, eig_n1, eig_n2, gap) -> bool:
    for L in (eig_n, eig_n1, eig_n2):
        if any(abs(x - y) < gap for i, x in enumerate(L) for y in L[i + 1:]):
            return False
    return all(abs(x - y) >= gap for x in eig_n1 for y in eig_n2)


def draw_classical_system(rng, n: int, gap: float = 0.15) -> cl.ClassicalSystemSpec:
    """Eigenvalue differences kept ``gap`` away from the integers."""
    def far(x):
        return abs(x - round(x.real)) >= gap

    while True:
        A = 0.7 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        try:
            s = cl.ClassicalSystemSpec(A)
        except QSFError:
            continue
        pairs = [x - y for L in (s.eig_n, s.eig_n1) for i, x in enumerate(L) for y in L[i + 1:]]
        pairs += [x - y for x in s.eig_n1 for y in s.eig_n]
        if all(far(d) for d in pairs) and all(abs(x - y) >= gap for x in s.eig_n1 for y in s.eig_n2):
            return s


def draw_classical_equation(rng, n: int, gap: float = 0.15) -> cl.ClassicalEquationSpec:
    def far(x):
        return abs(x - round(x.real)) >= gap

    while True:
        alpha = [complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.4, 0.4)) for _ in range(n - 1)]
        beta = [complex(rng.uniform(0.3, 2.5), rng.uniform(-0.4, 0.4)) for _ in range(n - 1)]
        bf = beta + [1.0]
        diffs = [x - y for i, x in enumerate(alpha) for y in alpha[i + 1:]]
        diffs += [x - y for i, x in enumerate(bf) for y in bf[i + 1:]]
        diffs += [b - a for a in alpha for b in bf]
        if all(far(d) for d in diffs) and all(far(a) for a in alpha):
            return cl.ClassicalEquationSpec(n, alpha, beta)


# ------------------------------------------------------------------ suites


def _rel(x: complex, y: complex) -> float:
    return abs(x - y) / max(1.0, abs(y))


def suite_qcore(cfg: SuiteConfig) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5, 0.7)):
        ctx = cfg.ctx(q)
        rng = np.random.default_rng([cfg.seed, 1, round(q * 1000)])
        recs = {k: Record(f"{k} q={q}", tolerance=1e-10)
                for k in ("triple-product", "quasi-periodicity", "inversion", "e_q product-vs-taylor")}
        for _ in range(100):
            z = cmath.rect(math.exp(rng.uniform(-2.3, 2.3)), rng.uniform(-math.pi, math.pi))
            th = theta(z, ctx)
            prod = cmath.exp(log_pochhammer(q, ctx) + log_pochhammer(-z, ctx)
                             + log_pochhammer(-q / z, ctx))
            _max(recs["triple-product"], _rel(th, prod) if abs(prod) > 0 else abs(th))
            _max(recs["quasi-periodicity"], _rel(theta(q * z, ctx) * z, th))
            _max(recs["inversion"], _rel(theta(1 / z, ctx) * z, th))
            w = cmath.rect(rng.uniform(0.0, 0.9) / (1 - q), rng.uniform(-math.pi, math.pi))
            _max(recs["e_q product-vs-taylor"],
                 _rel(q_exponential(w, ctx), q_exponential_taylor(w, ctx)))
        out.extend(recs.values())
    return out


def suite_resummation(cfg: SuiteConfig) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5)):
        ctx = cfg.ctx(q)
        rng = np.random.default_rng([cfg.seed, 2, round(q * 1000)])
        lb = Record(f"laplace-borel convergent q={q}", tolerance=1e-8)
        for _ in range(20):
            x = _unit(rng, 0.5, 1.2)
            coeffs = np.array([x**k / (k + 1) for k in range(400)])
            B = q_borel(FormalPowerSeries("z", coeffs, "log-series"), q)
            z = cmath.rect(rng.uniform(0.05, 0.5) / abs(x), rng.uniform(-math.pi, math.pi))
            exact = -cmath.log(1 - x * z) / (x * z)
            lam = _unit(rng)
            _max(lb, _rel(q_laplace(lambda xi: B.log_evaluate(xi, ctx), lam, z, ctx, variable="z",
                                    log_form=True), exact))
        out.append(lb)
        rep = Record(f"nf representative independence q={q}", tolerance=1e-10)
        eqn = Record(f"nf q-difference equation q={q}", tolerance=1e-8)
        for _ in range(10):
            spec = draw_confluent(rng, 3, q)
            a = [spec.a[0], spec.a[1], _unit(rng)]
            b = [spec.b[0]]
            if spiral_distance(a[0], a[2], q) < SEPARATION or spiral_distance(a[1], a[2], q) < SEPARATION:
                continue
            lam = _unit(rng)
            op = nf_operator(a, b, ctx)
            # the residual evaluates at z q^k for k < order; keep all of them inside the radius
            shift = q ** (1 - len(op.alpha))
            base_mod = q * abs(np.prod(b) / np.prod(a)) * shift
            z = cmath.rect(base_mod * rng.uniform(1.5, 4.0), rng.uniform(-math.pi, math.pi))
            if spiral_distance(-lam, z, q) < SEPARATION or spiral_distance(-1.0, lam, q) < SEPARATION:
                continue
            base = nf(a, b, lam, z, ctx)
            k = int(rng.integers(-3, 4)) or 1
            _max(rep, _rel(nf(a, b, lam * q**k, z, ctx), base))
            zb = BranchedPoint.from_complex(z)
            _max(eqn, q_difference_residual(lambda p: nf(a, b, lam, p.to_complex(), ctx), op, zb, ctx))
        out += [rep, eqn]
    return out


def suite_thomae(cfg: SuiteConfig) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5)):
        ctx = cfg.ctx(q)
        for n in (2, 3):
            rng = np.random.default_rng([cfg.seed, 3, n, round(q * 1000)])
            rec = Record(f"thomae n={n} q={q}", tolerance=1e-8)
            got = 0
            while got < 20:
                a = [_unit(rng) for _ in range(n)]
                b = [_unit(rng) for _ in range(n - 1)]
                if not all(spiral_distance(a[j], a[i], q) > SEPARATION
                           for i in range(n) for j in range(i)):
                    continue
                if not all(spiral_distance(1.0, x, q, (None, 0)) > SEPARATION for x in b):
                    continue
                try:
                    lo, hi = thomae_overlap(a, b, ctx)
                except QSFError:
                    continue
                z = BranchedPoint(lo * (hi / lo) ** rng.uniform(0.2, 0.8), rng.uniform(-3, 3))
                if spiral_distance(1.0, z.to_complex(), q) < SEPARATION:
                    continue
                _max(rec, thomae_residual(a, b, z, ctx))
                got += 1
            out.append(rec)
    return out


def _section_form_rhs(spec: ConfluentEquationSpec, lam_s: complex, z: BranchedPoint,
                      ctx: QContext) -> complex:
    """Right side of the connection formula written without z-powers, direction lam_s."""
    q = ctx.q
    a, b = list(spec.a), list(spec.b)
    zc = z.to_complex()
    pa, pb = complex(np.prod(a)), complex(np.prod(b))

    def lp(xs):
        return sum(log_pochhammer(x, ctx) for x in xs)

    total = 0j
    for i, ai in enumerate(a):
        others = [x for k, x in enumerate(a) if k != i]
        lg = lp(others) + lp([bl / ai for bl in b]) - lp(b) - lp([x / ai for x in others])
        lg += log_theta(-ai * zc, ctx) - log_theta(-zc, ctx)
        upper = [ai] + [ai * q / bl for bl in b]
        lower = [ai * q / x for x in others]
        total += cmath.exp(lg) * nf(upper, lower, lam_s / ai, pb / (ai * zc * pa), ctx)
    lg = lp(a) - lp(b)
    lg += sum(log_theta(bl / lam_s, ctx) - log_theta(al / lam_s, ctx) for al, bl in zip(a, b))
    lg += log_theta(lam_s * zc, ctx) - log_theta(lam_s * zc * pa / pb, ctx)
    h = exponential_solution_value(spec, zc, ctx)
    return total + cmath.exp(lg - log_pochhammer(zc, ctx)) * h


def suite_main_connection(cfg: SuiteConfig, draws: int = 20) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5)):
        ctx = cfg.ctx(q)
        for n in (2, 3):
            rng = np.random.default_rng([cfg.seed, 4, n, round(q * 1000)])
            res = Record(f"main connection n={n} q={q}", tolerance=1e-6)
            pc = Record(f"coefficient pseudo-constancy n={n} q={q}", tolerance=1e-9)
            sec = Record(f"section form n={n} q={q}" + (" (2phi1(a,0;b) case)" if n == 2 else ""),
                         tolerance=1e-6)
            got = 0
            while got < draws:
                spec = draw_confluent(rng, n, q)
                try:
                    lo, hi = overlap_annulus(spec, ctx)
                except QSFError:
                    continue
                lam = _admissible_lambda(rng, spec, q)
                z = _admissible_z(rng, spec, lam, q, lo, hi)
                _max(res, verify_main_connection(spec, lam, z, ctx))
                c0 = main_connection_coeffs(spec, lam, z, ctx)
                c1 = main_connection_coeffs(spec, lam, z.qshift(q), ctx)
                v0, v1 = c0[0] + [c0[1]], c1[0] + [c1[1]]
                _max(pc, max(abs(x - y) / max(abs(x), 1e-300) for x, y in zip(v0, v1)))
                lhs = f0_basis(spec, n - 1, z, ctx)
                lam_s = lam * complex(np.prod(spec.b) / np.prod(spec.a))
                _max(sec, _rel(_section_form_rhs(spec, lam_s, z, ctx), lhs))
                got += 1
            out += [res, pc, sec]
    return out


def suite_corollary(cfg: SuiteConfig, draws: int = 10) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5)):
        ctx = cfg.ctx(q)
        for n in (2, 3):
            rng = np.random.default_rng([cfg.seed, 5, n, round(q * 1000)])
            rec = Record(f"corollary n={n} q={q}", tolerance=1e-6)
            got = 0
            while got < draws:
                spec = draw_confluent(rng, n, q)
                try:
                    lo, hi = overlap_annulus(spec, ctx)
                except QSFError:
                    continue
                z = _admissible_z(rng, spec, 1.0, q, lo, hi)
                _max(rec, corollary_fn_check(spec, z, ctx))
                got += 1
            out.append(rec)
    return out


def _system_point(rng, dsys, ctx, lams=()) -> BranchedPoint:
    lo, hi = overlap_moduli(dsys, ctx)
    q = ctx.q
    scale = hi / 0.95
    while True:
        z = BranchedPoint(lo * (hi / lo) ** rng.uniform(0.1, 0.9), rng.uniform(-3, 3))
        w = z.to_complex() / scale
        if spiral_distance(1.0, w, q) < SEPARATION:
            continue
        if any(spiral_distance(-1.0, lam * z.to_complex(), q) < SEPARATION for lam in lams):
            continue
        return z


def suite_system_solutions(cfg: SuiteConfig, systems: int = 2, points: int = 20) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5)):
        ctx = cfg.ctx(q)
        rng = np.random.default_rng([cfg.seed, 6, round(q * 1000)])
        inv = Record(f"diagonalization invariants n=3 q={q}", tolerance=1e-9)
        r0 = Record(f"origin solution residual n=3 q={q}", tolerance=1e-8)
        ri = Record(f"infinity solution residual n=3 q={q}", tolerance=1e-8)
        for _ in range(systems):
            spec = draw_system(rng, 3, q)
            dsys = build_diagonalized(spec)
            for v in dsys.invariants().values():
                _max(inv, v)
            lam = _unit(rng)
            F0 = transport_to_full(dsys, F0_handle(dsys, ctx))
            Fi = transport_to_full(dsys, Finf_handle(dsys, lam, ctx))
            lo, hi = overlap_moduli(dsys, ctx)
            for _ in range(points):
                z = _system_point(rng, dsys, ctx, [lam])
                _max(r0, system_residual(F0, z, ctx))
                _max(ri, system_residual(Fi, z, ctx, columns=range(2)))
                far = BranchedPoint(hi * rng.uniform(3, 6), rng.uniform(-3, 3))
                _max(ri, system_residual(Fi, far, ctx, columns=[2]))
        out += [inv, r0, ri]
    return out


def _matrix_draws(cfg, tag, q, n, count):
    rng = np.random.default_rng([cfg.seed, tag, n, round(q * 1000)])
    for _ in range(count):
        spec = draw_system(rng, n, q)
        dsys = build_diagonalized(spec)
        lam, mu = _unit(rng), _unit(rng)
        z = _system_point(rng, dsys, cfg.ctx(q), [lam, mu])
        yield spec, dsys, lam, mu, z


def _rel_matrix(M: np.ndarray, ref: np.ndarray) -> float:
    return float(np.abs(M - ref).max() / max(1.0, np.abs(ref).max()))


def suite_connection_matrix(cfg: SuiteConfig, draws: int = 4) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5)):
        ctx = cfg.ctx(q)
        for n in (2, 3):
            cn = Record(f"U closed vs numeric n={n} q={q}", tolerance=1e-6)
            inv = Record(f"U times closed inverse n={n} q={q}", tolerance=1e-8)
            pc = Record(f"U pseudo-constancy n={n} q={q}", tolerance=1e-8)
            for spec, dsys, lam, mu, z in _matrix_draws(cfg, 7, q, n, draws):
                U = Uq_closed(dsys, lam, z, ctx).entries
                _max(cn, _rel_matrix(U, Uq_numeric(dsys, lam, z, ctx).entries))
                V = Uq_inverse_closed(dsys, lam, z, ctx).entries
                _max(inv, float(np.abs(U @ V - np.eye(n)).max()))
                _max(pc, _rel_matrix(Uq_closed(dsys, lam, z.qshift(q), ctx).entries, U))
            out += [cn, inv, pc]
    return out


def suite_stokes_matrix(cfg: SuiteConfig, draws: int = 4) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5)):
        ctx = cfg.ctx(q)
        for n in (2, 3):
            cn = Record(f"S closed vs numeric n={n} q={q}", tolerance=1e-6)
            blk = Record(f"S block structure n={n} q={q}", tolerance=1e-8)
            inv = Record(f"S(lam,mu) S(mu,lam) = Id n={n} q={q}", tolerance=1e-8)
            full = Record(f"full-system minor formula n={n} q={q}", tolerance=1e-6)
            for spec, dsys, lam, mu, z in _matrix_draws(cfg, 8, q, n, draws):
                S = Sq_closed(dsys, lam, mu, z, ctx)
                Sn = Sq_numeric(dsys, lam, mu, z, ctx)
                _max(cn, _rel_matrix(S.entries, Sn.entries))
                _max(blk, Sn.block_defect())
                back = Sq_closed(dsys, mu, lam, z, ctx).entries
                _max(inv, float(np.abs(S.entries @ back - np.eye(n)).max()))
                Sf = transport_to_full(dsys, S).entries
                b = full_stokes_b(spec, lam, mu, z, ctx)
                _max(full, float(np.abs(Sf[-1, :-1] - b).max() / max(1.0, np.abs(b).max())))
            out += [cn, blk, inv, full]
    return out


def suite_full_system(cfg: SuiteConfig, draws: int = 3) -> list:
    out = []
    for q in cfg.q_values((0.3, 0.5)):
        ctx = cfg.ctx(q)
        for n in (2, 3, 4):
            r0 = Record(f"full origin solution n={n} q={q}", tolerance=1e-8)
            ri = Record(f"full infinity solution n={n} q={q}", tolerance=1e-8)
            for spec, dsys, lam, mu, z in _matrix_draws(cfg, 9, q, n, draws):
                _max(r0, system_residual(transport_to_full(dsys, F0_handle(dsys, ctx)), z, ctx))
                Fi = transport_to_full(dsys, Finf_handle(dsys, lam, ctx))
                _max(ri, system_residual(Fi, z, ctx, columns=range(n - 1)))
                far = BranchedPoint(overlap_moduli(dsys, ctx)[1] * 4, z.argument)
                _max(ri, system_residual(Fi, far, ctx, columns=[n - 1]))
            out += [r0, ri]
    return out


def suite_classical(cfg: SuiteConfig, draws: int = 5) -> list:
    out = []
    for n in (2, 3):
        rng = np.random.default_rng([cfg.seed, 10, n])
        conn = Record(f"classical connection n={n}", tolerance=1e-6)
        ode = Record(f"solutions at infinity solve the equation n={n}", tolerance=1e-6)
        for _ in range(draws):
            spec = draw_classical_equation(rng, n)
            for sign in (1, -1):
                arg = rng.uniform(-0.45, 1.45) * math.pi if sign > 0 else rng.uniform(-1.45, 0.45) * math.pi
                z = BranchedPoint(rng.uniform(0.5, 6.0), arg)
                _max(conn, cl.classical_connection_check(spec, z, sign))
                zr = BranchedPoint(rng.uniform(1.0, 5.0), arg)
                for i in range(n):
                    _max(ode, cl.equation_residual(
                        spec, lambda p, i=i: cl.f_infinity(spec, i, p, sign), zr))
        cons = Record(f"S_- U_- = U_+ exp(-2 pi i A_n) n={n}", tolerance=1e-8)
        uinv = Record(f"closed U_-^-1 columns vs F0^-1 F_inf n={n}", tolerance=1e-8)
        for _ in range(draws):
            s = draw_classical_system(rng, n)
            _max(cons, cl.stokes_consistency(s))
            z = BranchedPoint(rng.uniform(0.5, 2.0), rng.uniform(-1.2, 1.2))
            _max(uinv, _rel_matrix(cl.numeric_U_minus_inverse(s, z), cl.classical_U_minus_inverse(s)))
        out += [conn, ode, cons, uinv]
    return out


def trend_records(rep: cl.TrendReport, label: str) -> list:
    recs = []
    for key, errs in rep.errors.items():
        final = Record(f"{label} {key} final", list(errs), errs[-1], rep.final_limit)
        ratios = [y / x if y > cl.EXACT_FLOOR else 0.0 for x, y in zip(errs, errs[1:])]
        # strict decrease: use the largest ratio against a limit just below 0.8
        worst = max(ratios) if ratios else 0.0
        recs += [final, Record(f"{label} {key} ratio", ratios, worst,
                               math.nextafter(rep.ratio_limit, 0.0))]
    return recs


# fixed sample configurations for the q -> 1 suite
QLIMIT_EQUATIONS = {
    2: ((0.3 + 0.1j,), (1.7 - 0.2j,)),
    3: ((0.3 + 0.1j, -0.45 + 0.2j), (1.7 - 0.2j, 0.6 + 0.3j)),
}
QLIMIT_CONNECTION_POINTS = (
    (1.0, BranchedPoint(1.5, 0.8), 1),
    (cmath.exp(0.4j), BranchedPoint(2.0, -1.1), -1),
)
QLIMIT_STOKES = (cmath.exp(-0.2j * math.pi), cmath.exp(0.5j * math.pi),
                 BranchedPoint(1.5, 0.75 * math.pi))


def trend_reports(cfg: SuiteConfig) -> list:
    """(label, TrendReport) pairs of the q -> 1 suite."""
    sched = tuple(cfg.schedule)
    ctx = cfg.ctx(0.5)
    out = [("basic limits", cl.basic_limits_suite(sched, ctx))]
    for n, (alpha, beta) in QLIMIT_EQUATIONS.items():
        spec = cl.ClassicalEquationSpec(n, alpha, beta)
        for lam, z, sign in QLIMIT_CONNECTION_POINTS:
            out.append((f"connection n={n} sign={'+' if sign > 0 else '-'}",
                        cl.qlimit_connection(spec, lam, z, sign, sched, ctx)))
    rng = np.random.default_rng([cfg.seed, 11])
    lam, mu, z = QLIMIT_STOKES
    for n in (2, 3):
        s = draw_classical_system(rng, n)
        out.append((f"stokes n={n}", cl.qlimit_stokes(s, lam, mu, z, sched, ctx)))
    return out


def suite_qlimit(cfg: SuiteConfig) -> list:
    out = []
    for label, rep in trend_reports(cfg):
        out += trend_records(rep, label)
    return out


SUITES: dict[str, Callable[[SuiteConfig], list]] = {
    "qcore-identities": suite_qcore,
    "resummation": suite_resummation,
    "thomae": suite_thomae,
    "main-connection": suite_main_connection,
    "corollary": suite_corollary,
    "system-solutions": suite_system_solutions,
    "connection-matrix": suite_connection_matrix,
    "stokes-matrix": suite_stokes_matrix,
    "full-system": suite_full_system,
    "classical": suite_classical,
    "qlimit": suite_qlimit,
}


def run_suite(name: str, cfg: SuiteConfig) -> list:
    try:
        fn = SUITES[name]
    except KeyError:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return fn(cfg)
