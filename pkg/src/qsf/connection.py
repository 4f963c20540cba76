"""Connection formulas for the Fuchsian and confluent q-hypergeometric
equations, and the two confluence limits relating them.

All coefficient functions return values that are pseudo-constant in z once
the z-power carried by the matching basis element is folded in.  Every z-power
inside one identity is taken on the single BranchedPoint passed by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, GenericityViolation, OverlapDomainEmpty
from .qcore import (
    BranchedPoint,
    QContext,
    branched_power,
    guard_spiral,
    guard_theta_zero,
    log_pochhammer,
    log_q,
    log_theta,
    on_spiral,
    safe_exp,
)
from .qseries import (
    RADIUS_MARGIN,
    ConfluentEquationSpec,
    HypergeometricParams,
    basic_phi,
    f0_basis,
    fuchsian_infinity_basis,
)
from .resummation import (
    as_direction,
    f_infinity_basis,
    h_radius,
    nf,
)


@dataclass(frozen=True)
class PseudoConstant:
    evaluator: Callable[[BranchedPoint], complex]
    label: str = ""

    def __call__(self, z: BranchedPoint) -> complex:
        return self.evaluator(z)

    def defect(self, z: BranchedPoint, ctx: QContext) -> float:
        """Relative change under z -> qz."""
        v0, v1 = self.evaluator(z), self.evaluator(z.qshift(ctx.q))
        return abs(v1 - v0) / max(abs(v0), 1e-300)


def _except(seq, i):
    return [x for j, x in enumerate(seq) if j != i]


def _lp(values, ctx):
    return sum((log_pochhammer(v, ctx) for v in values), 0j)


@dataclass
class CheckReport:
    name: str
    values: list = field(default_factory=list)
    residual: float = math.nan
    tolerance: float = math.nan

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


# ------------------------------------------------------------ Thomae's formula


def _thomae_log_prefactor(a, b, i, ctx):
    ai = a[i]
    others = _except(a, i)
    num = _lp(others, ctx) + _lp([bl / ai for bl in b], ctx)
    den = _lp(b, ctx) + _lp([al / ai for al in others], ctx)
    return num - den


def _check_fuchsian(a, b, ctx):
    for i, ai in enumerate(a):
        if ai == 0:
            raise DomainError("a_i must be nonzero")
        for aj in a[i + 1 :]:
            if on_spiral(aj, ai, ctx):
                raise GenericityViolation("a_i / a_j lies in q^Z")
    for bl in b:
        if bl == 0 or on_spiral(1.0, bl, ctx, (None, 0)):
            raise DomainError(f"b = {bl!r} is zero or in q^(-N)")


def thomae_coeffs(a: Sequence, b: Sequence, z: BranchedPoint, ctx: QContext) -> list:
    """Coefficients c_i(z) with nphi_{n-1}(a; b; z) = sum c_i(z) * (i-th solution at infinity).

    The i-th solution carries z^{-log_q a_i}; c_i includes the compensating
    z^{log_q a_i} so that every coefficient is pseudo-constant.
    """
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    if len(b) != len(a) - 1:
        raise DomainError("need len(b) = len(a) - 1")
    _check_fuchsian(a, b, ctx)
    zc = z.to_complex()
    guard_theta_zero(-zc, ctx, "Thomae: z on q^Z")
    out = []
    for i, ai in enumerate(a):
        lt = log_theta(-ai * zc, ctx) - log_theta(-zc, ctx)
        c = safe_exp(_thomae_log_prefactor(a, b, i, ctx) + lt, "Thomae coefficient")
        out.append(c * branched_power(z, log_q(ai, ctx)))
    return out


def thomae_continuation(a, b, z: BranchedPoint, ctx: QContext) -> complex:
    """nphi_{n-1}(a; b; q, z) through the expansion at infinity (valid for large |z|)."""
    coeffs = thomae_coeffs(a, b, z, ctx)
    return sum(c * fuchsian_infinity_basis(a, b, i, z, ctx) for i, c in enumerate(coeffs))


def thomae_overlap(a, b, ctx: QContext):
    """Moduli of z where both sides of Thomae's formula converge."""
    lo = ctx.q * abs(complex(np.prod(b)) / complex(np.prod(a))) / RADIUS_MARGIN
    if lo >= RADIUS_MARGIN:
        raise OverlapDomainEmpty(f"Thomae: need |z| > {lo:.4g} and |z| < {RADIUS_MARGIN}")
    return lo, RADIUS_MARGIN


def thomae_residual(a, b, z: BranchedPoint, ctx: QContext) -> float:
    lhs = basic_phi(HypergeometricParams(a, b), z.to_complex(), ctx)
    rhs = thomae_continuation(a, b, z, ctx)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


# ---------------------------------------------------------- confluence limits


def confluence_limit_check(a: Sequence, b: Sequence, lam: complex, z: complex, m_max: int,
                           ctx: QContext) -> CheckReport:
    """Errors of nphi_{n-1}(a; b, -1/(lam q^m); q, -z/(lam q^m)) against nf(a; b; lam; q, z).

    For large m the series argument leaves the unit disc, so the left side is
    taken through Thomae's expansion at infinity, whose inner argument
    q prod(b)/(z prod(a)) does not depend on m.
    """
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    lam, z = complex(lam), complex(z)
    target = nf(a, b, lam, z, ctx)
    rep = CheckReport("confluence-limit")
    for m in range(m_max + 1):
        bm = b + [-1.0 / (lam * ctx.q**m)]
        w = -z / (lam * ctx.q**m)
        if abs(w) <= 0.5:
            val = basic_phi(HypergeometricParams(a, bm), w, ctx)
        else:
            val = thomae_continuation(a, bm, BranchedPoint.from_complex(w), ctx)
        rep.values.append((m, abs(val - target) / max(1.0, abs(target))))
    rep.residual = rep.values[-1][1]
    rep.tolerance = 1e-5
    return rep


def theta_ratio_limit_check(a: Sequence, b: Sequence, ms: Sequence[int], ctx: QContext,
                            balance_tol: float = 1e-12) -> CheckReport:
    """(-a q^-m; q)_inf / (-b q^-m; q)_inf -> prod theta(a) / prod theta(b) for balanced products.

    Unbalanced inputs are evaluated anyway; their ratio drifts like
    (prod a / prod b)^m and the report's ``balanced`` flag is False.
    """
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    if len(a) != len(b):
        raise DomainError("need equally many a and b")
    balanced = abs(np.prod(a) - np.prod(b)) <= balance_tol * max(1.0, abs(np.prod(b)))
    lt = sum(log_theta(x, ctx) for x in a) - sum(log_theta(x, ctx) for x in b)
    target = safe_exp(lt, "theta ratio")
    rep = CheckReport("theta-ratio-limit" if balanced else "theta-ratio-limit (unbalanced)")
    for m in ms:
        s = ctx.q ** (-m)
        lr = _lp([-x * s for x in a], ctx) - _lp([-x * s for x in b], ctx)
        try:
            val = safe_exp(lr, "Pochhammer ratio")
            err = abs(val - target) / max(1.0, abs(target))
        except ArithmeticError:
            err = math.inf
        rep.values.append((m, err))
    rep.residual = rep.values[-1][1]
    rep.tolerance = 1e-6 if balanced else -1.0
    return rep


# ------------------------------------------------------ the main connection


def _check_connection_conditions(spec: ConfluentEquationSpec, lam: complex, z: BranchedPoint,
                              ctx: QContext):
    spec.validate(ctx)
    zc = z.to_complex()
    pa, pb = complex(np.prod(spec.a)), complex(np.prod(spec.b))
    for ai in spec.a:
        # the resummation direction of the i-th solution must avoid [-1; q]
        guard_theta_zero(lam * pb / (ai * pa), ctx, "lambda on a forbidden spiral")
    guard_spiral(1.0, zc, ctx, "z on q^Z")
    guard_theta_zero(lam * zc, ctx, "z on -1/lambda q^Z")
    guard_theta_zero(zc, ctx, "z on -q^Z")


def main_connection_coeffs(spec: ConfluentEquationSpec, direction, z: BranchedPoint,
                           ctx: QContext):
    """Coefficients (C_1..C_{n-1}, C_n) of the expansion of nphi_{n-1}(a, 0; b; q, z)
    in the meromorphic basis at infinity along the spiral of ``direction``."""
    d = as_direction(direction)
    lam = d.lam
    _check_connection_conditions(spec, lam, z, ctx)
    a, b = list(spec.a), list(spec.b)
    zc = z.to_complex()
    pa, pb = complex(np.prod(a)), complex(np.prod(b))
    cs = []
    for i, ai in enumerate(a):
        lp = _thomae_log_prefactor(a, b, i, ctx)
        lt = log_theta(-ai * zc, ctx) - log_theta(-zc, ctx)
        cs.append(safe_exp(lp + lt, "C_i") * branched_power(z, log_q(ai, ctx)))
    lp = _lp(a, ctx) - _lp(b, ctx)
    lt = sum(log_theta(pa / (lam * pb / bs), ctx) for bs in b)
    lt -= sum(log_theta(a_s * pa / (lam * pb), ctx) for a_s in a)
    lt += log_theta(lam * zc * pb / pa, ctx) - log_theta(lam * zc, ctx)
    power = sum(log_q(bl, ctx) for bl in b) - sum(log_q(al, ctx) for al in a)
    cn = safe_exp(lp + lt, "C_n") * branched_power(z, power)
    return cs, cn


def main_connection_pseudoconstants(spec: ConfluentEquationSpec, direction, ctx: QContext):
    n = spec.n
    out = []
    for k in range(n):
        def ev(z, k=k):
            cs, cn = main_connection_coeffs(spec, direction, z, ctx)
            return cs[k] if k < n - 1 else cn
        out.append(PseudoConstant(ev, f"C_{k + 1}"))
    return out


def overlap_annulus(spec: ConfluentEquationSpec, ctx: QContext):
    """Moduli where the origin series, the finite nf expansions and h_n all converge."""
    lo = h_radius(spec, ctx) / 0.8
    hi = RADIUS_MARGIN
    if lo >= hi:
        raise OverlapDomainEmpty(
            f"h_n needs |z| > {lo:.4g} but the origin series needs |z| < {hi}"
        )
    return lo, hi


def _main_connection_terms(spec, direction, z, ctx):
    lo, hi = overlap_annulus(spec, ctx)
    if not lo <= z.modulus <= hi:
        raise OverlapDomainEmpty(f"|z| = {z.modulus:.4g} is outside the overlap [{lo:.4g}, {hi}]")
    cs, cn = main_connection_coeffs(spec, direction, z, ctx)
    coeffs = cs + [cn]
    terms = [c * f_infinity_basis(spec, direction, i, z, ctx) for i, c in enumerate(coeffs)]
    return f0_basis(spec, spec.n - 1, z, ctx), terms


def verify_main_connection(spec: ConfluentEquationSpec, direction, z: BranchedPoint,
                           ctx: QContext) -> float:
    lhs, terms = _main_connection_terms(spec, direction, z, ctx)
    return abs(lhs - sum(terms)) / max(1.0, abs(lhs))


def main_connection_condition(spec: ConfluentEquationSpec, direction, z: BranchedPoint,
                              ctx: QContext) -> float:
    """sum |C_k f_k| / |lhs|: how much the right-hand side cancels at this z."""
    lhs, terms = _main_connection_terms(spec, direction, z, ctx)
    return sum(abs(t) for t in terms) / max(abs(lhs), 1e-300)


# -------------------------------------------------------------- corollary


def corollary_coeffs(spec: ConfluentEquationSpec, z: BranchedPoint, ctx: QContext) -> list:
    """Coefficients D_i(z) with f_inf_n = sum D_i f0_i (b_n = q convention)."""
    spec.validate(ctx)
    q, n = ctx.q, spec.n
    a = list(spec.a)
    b = list(spec.b) + [q]
    zc = z.to_complex()
    guard_theta_zero(zc, ctx, "z on -q^Z")
    pa = complex(np.prod(a))
    s = sum(log_q(al, ctx) - log_q(bl, ctx) for al, bl in zip(spec.a, spec.b))
    out = []
    for i in range(n):
        bi = b[i]
        lp = _lp([bi / al for al in a], ctx) - _lp([bi / bl for bl in _except(b, i)], ctx)
        pbi = complex(np.prod(_except(b, i)))
        lt = log_theta(-zc * pa / pbi, ctx) - log_theta(-zc, ctx)
        power = s - (1.0 - log_q(bi, ctx))
        out.append(safe_exp(lp + lt, "corollary coefficient") * branched_power(z, power))
    return out


def corollary_fn_check(spec: ConfluentEquationSpec, z: BranchedPoint, ctx: QContext) -> float:
    lo, hi = overlap_annulus(spec, ctx)
    if not lo <= z.modulus <= hi:
        raise OverlapDomainEmpty(f"|z| = {z.modulus:.4g} is outside the overlap [{lo:.4g}, {hi}]")
    n = spec.n
    lhs = f_infinity_basis(spec, 1.0, n - 1, z, ctx)
    rhs = sum(d * f0_basis(spec, i, z, ctx) for i, d in enumerate(corollary_coeffs(spec, z, ctx)))
    return abs(lhs - rhs) / max(1.0, abs(lhs))
