"""q-Borel and q-Laplace transforms and the resummed function nf.

``nf(a, b, lam, z)`` is the sum along the spiral lam*q^Z of the divergent
series nphi_{n-2}(a; b; q, z).  It is evaluated through a finite
expansion into convergent nphi_{n-1} series, which needs the inner argument
q*prod(b)/(z*prod(a)) to be small.  The bilateral Laplace sum is kept for
cross-checks on inputs whose Borel transform is known at every node.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    FitFailure,
    GenericityViolation,
    OutsideRadius,
    PoleProximity,
    TailDivergence,
    TruncationBudgetExceeded,
)
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
    pochhammer_infinite,
    safe_exp,
)
from .qseries import (
    RADIUS_MARGIN,
    ConfluentEquationSpec,
    FormalPowerSeries,
    HypergeometricParams,
    QDifferenceOperator,
    basic_phi,
    convergent_series_value,
    exponential_series_coefficients,
    ratio_radius,
    shift_polynomial,
)


@dataclass(frozen=True)
class SpiralDirection:
    lam: complex
    argument: float

    def __init__(self, lam: complex, argument: float | None = None):
        lam = complex(lam)
        if lam == 0:
            raise DomainError("a spiral direction needs lambda != 0")
        if argument is None:
            argument = cmath.phase(lam)
        if abs(cmath.exp(1j * argument) - lam / abs(lam)) > 1e-12:
            raise DomainError("argument does not match lambda")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "argument", float(argument))


def as_direction(d) -> SpiralDirection:
    return d if isinstance(d, SpiralDirection) else SpiralDirection(d)


# ------------------------------------------------------------------- Borel


@dataclass(frozen=True)
class BorelTransform:
    series: FormalPowerSeries
    source: FormalPowerSeries

    def evaluate(self, xi: complex, ctx: QContext) -> complex:
        """Sum the transform at xi from the source coefficients in log form.

        Only meaningful when the coefficient list is long enough for the
        tail to be negligible at |xi|; otherwise TruncationBudgetExceeded.
        """
        lv = self.log_evaluate(xi, ctx)
        return 0j if lv == -math.inf else safe_exp(lv, "Borel transform")

    def log_evaluate(self, xi: complex, ctx: QContext) -> complex:
        """Logarithm of ``evaluate``; -inf when the transform vanishes."""
        xi = complex(xi)
        if xi == 0:
            c0 = complex(self.source.coefficients[0]) if len(self.source) else 0j
            return cmath.log(c0) if c0 else -math.inf
        c = np.asarray(self.source.coefficients, dtype=complex)
        k = np.arange(len(c), dtype=float)
        with np.errstate(divide="ignore"):
            lc = np.log(np.abs(c)) + 0.5 * k * (k - 1) * ctx.logq + k * math.log(abs(xi))
        ph = np.angle(c) + k * cmath.phase(xi)
        peak = np.max(lc)
        if not np.isfinite(peak):
            return -math.inf
        tail = lc[-2:].max() if len(c) > 2 else -np.inf
        if len(c) > 2 and tail > peak + math.log(ctx.tol) + 2:
            raise TruncationBudgetExceeded("Borel transform needs more coefficients at this xi")
        s = complex(np.sum(np.exp(lc - peak + 1j * ph)))
        return peak + cmath.log(s) if s else -math.inf


def q_borel(f: FormalPowerSeries, q: float) -> BorelTransform:
    c = np.asarray(f.coefficients, dtype=complex)
    k = np.arange(len(c), dtype=float)
    with np.errstate(under="ignore"):
        b = c * np.exp(0.5 * k * (k - 1) * math.log(q))
    return BorelTransform(FormalPowerSeries(f.variable, b, "q-Borel"), f)


def q_laplace(g: Callable[[complex], complex], direction, z: complex, ctx: QContext,
              variable: str = "1/z", n_limit: tuple | None = None,
              log_form: bool = False) -> complex:
    """Bilateral sum of g(lam q^n) / theta(lam q^n z) over the spiral.

    ``variable="z"`` divides by theta(lam q^n / z) instead, which is the
    transform used for series in z.  ``n_limit`` optionally clips the range of
    n to (low, high); the clipped side must still have decayed below tol.
    With ``log_form`` g returns log values (-inf for zero), so huge transforms
    are divided by theta before exponentiating.
    """
    d = as_direction(direction)
    lam, z = d.lam, complex(z)
    if z == 0:
        raise DomainError("q-Laplace transform needs z != 0")
    zz = z if variable == "1/z" else 1.0 / z
    guard_spiral(-1.0 / lam, zz, ctx, "q-Laplace")
    n0 = round(-math.log(abs(lam)) / ctx.logq)
    lo_lim, hi_lim = (None, None) if n_limit is None else n_limit
    if lo_lim is not None:
        n0 = max(n0, lo_lim)
    if hi_lim is not None:
        n0 = min(n0, hi_lim)

    def term(n):
        xi = lam * ctx.q**n
        if log_form:
            lg = g(xi)
            if lg == -math.inf:
                return 0j
            return safe_exp(lg - log_theta(xi * zz, ctx), "Laplace term")
        gv = complex(g(xi))
        if gv == 0:
            return 0j
        return gv * safe_exp(-log_theta(xi * zz, ctx), "1/theta")

    terms = {n0: term(n0)}
    budget = ctx.max_bilateral_terms
    for step in (1, -1):
        n, small, last = n0, 0, abs(terms[n0])
        while True:
            n += step
            if (step > 0 and hi_lim is not None and n > hi_lim) or (
                step < 0 and lo_lim is not None and n < lo_lim
            ):
                if last > ctx.tol * max(1.0, abs(sum(terms.values()))) * 1e6:
                    raise TailDivergence("clipped Laplace tail has not decayed")
                break
            t = term(n)
            terms[n] = t
            scale = max(1.0, abs(sum(terms.values())))
            small = small + 1 if abs(t) < ctx.tol * scale else 0
            last = abs(t)
            if small >= 2 and abs(n - n0) >= 8:
                break
            if abs(n - n0) > budget:
                if step < 0:
                    raise TailDivergence("n -> -inf tail of the q-Laplace sum is not decaying")
                raise TruncationBudgetExceeded("q-Laplace sum")
    return complex(sum(terms[k] for k in sorted(terms)))


# ---------------------------------------------------------------------- nf


def _except(seq, i):
    return [x for j, x in enumerate(seq) if j != i]


def _check_nf_params(a, b, ctx: QContext):
    if len(a) < 2 or len(b) != len(a) - 2:
        raise DomainError("nf needs n >= 2 values in a and n - 2 in b")
    for i, ai in enumerate(a):
        if ai == 0:
            raise DomainError("a_i must be nonzero")
        for aj in a[i + 1 :]:
            if on_spiral(aj, ai, ctx):
                raise GenericityViolation("a_i / a_j lies in q^Z")
    for bl in b:
        if bl == 0 or on_spiral(1.0, bl, ctx, (None, 0)):
            raise DomainError(f"b = {bl!r} is zero or in q^(-N)")


def nf_inner_argument(a, b, z, q) -> complex:
    return q * complex(np.prod(b)) / (complex(z) * complex(np.prod(a)))


def _nf_terms(a, b, lam, z, ctx: QContext) -> list:
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    lam, z = complex(lam), complex(z)
    _check_nf_params(a, b, ctx)
    if lam == 0 or z == 0:
        raise DomainError("nf needs lambda != 0 and z != 0")
    guard_theta_zero(lam, ctx, "nf: lambda on [-1; q]")
    guard_spiral(-lam, z, ctx, "nf: z on [-lambda; q]")
    q = ctx.q
    inner = nf_inner_argument(a, b, z, q)
    if abs(inner) > RADIUS_MARGIN:
        raise OutsideRadius(
            f"the connection expansion needs |q prod b / (z prod a)| <= {RADIUS_MARGIN}, got {abs(inner):.4g}"
        )
    terms = []
    lt_den = log_theta(q * z / lam, ctx) + log_theta(lam, ctx)
    for k, ak in enumerate(a):
        others = _except(a, k)
        lp = sum(log_pochhammer(x, ctx) for x in others)
        lp += sum(log_pochhammer(bl / ak, ctx) for bl in b)
        lp -= sum(log_pochhammer(bl, ctx) for bl in b)
        lp -= sum(log_pochhammer(al / ak, ctx) for al in others)
        lt = log_theta(q * ak * z / lam, ctx) + log_theta(ak * lam, ctx) - lt_den
        coef = safe_exp(lp + lt, "expansion coefficient")
        if coef == 0:
            continue
        upper = [ak] + [ak * q / bl for bl in b] + [0]
        lower = [ak * q / al for al in others]
        terms.append(coef * basic_phi(HypergeometricParams(upper, lower), inner, ctx))
    return terms


def nf(a: Sequence[complex], b: Sequence[complex], lam: complex, z: complex,
       ctx: QContext) -> complex:
    return sum(_nf_terms(a, b, lam, z, ctx), 0j)


def nf_condition(a, b, lam, z, ctx: QContext) -> float:
    """Cancellation factor sum |terms| / |nf| of the expansion; about 1e16 / condition digits survive."""
    terms = _nf_terms(a, b, lam, z, ctx)
    total = abs(sum(terms, 0j))
    mass = sum(abs(t) for t in terms)
    return math.inf if total == 0 else mass / total


def nf_operator(a, b, ctx: QContext) -> QDifferenceOperator:
    """Operator annihilating nphi_{n-2}(a; b; q, z) and hence nf:
    z prod(1 - a s) y = -(s/q)(1 - s) prod(1 - (b/q) s) y."""
    al = shift_polynomial(a)
    core = shift_polynomial([1.0] + [complex(x) / ctx.q for x in b])
    be = -np.insert(core, 0, 0) / ctx.q
    size = max(len(al), len(be))
    al = np.pad(al, (0, size - len(al)))
    be = np.pad(be, (0, size - len(be)))
    return QDifferenceOperator(tuple(complex(x) for x in al), tuple(complex(x) for x in be))


def nf_formal_series(a, b, K: int, ctx: QContext, scale: complex = 1.0) -> FormalPowerSeries:
    from .qseries import phi_coefficients

    with np.errstate(over="ignore", invalid="ignore"):
        c = phi_coefficients(HypergeometricParams(a, b), K, ctx, scale)
    return FormalPowerSeries("z", c, "nphi_{n-2}")


def nf_borel(a, b, ctx: QContext) -> Callable[[complex], complex]:
    """The Borel transform nphi_{n-1}(a; b, 0; q, -xi) as an evaluator on |xi| < 1."""
    params = HypergeometricParams(list(a), list(b) + [0])

    def g(xi):
        return basic_phi(params, -complex(xi), ctx)

    return g


def nf_by_laplace(a, b, lam, z, ctx: QContext) -> complex:
    """Laplace sum of the Borel transform, truncated to nodes with |xi| <= 0.95.

    Only accurate when the nodes beyond the disc contribute below tol, i.e.
    for |z| small compared with the disc.
    """
    lam = complex(lam)
    hi = None
    lo = math.floor(math.log(RADIUS_MARGIN / abs(lam)) / ctx.logq) + 1
    return q_laplace(nf_borel(a, b, ctx), SpiralDirection(lam), z, ctx,
                     variable="z", n_limit=(lo, hi))


# ---------------------------------------------- meromorphic basis at infinity


def f_infinity_params(spec: ConfluentEquationSpec, i: int, lam: complex, ctx: QContext):
    q = ctx.q
    ai = spec.a[i]
    pa, pb = complex(np.prod(spec.a)), complex(np.prod(spec.b))
    upper = [ai] + [ai * q / bl for bl in spec.b]
    lower = [ai * q / al for al in _except(spec.a, i)]
    return upper, lower, lam * pb / (ai * pa), pb / (ai * pa)


@lru_cache(maxsize=256)
def _h_coefficients(spec: ConfluentEquationSpec, q: float, tol: float, K: int):
    ctx = QContext(q, tol=tol)
    Q = complex(np.prod(spec.a) / np.prod(spec.b))
    c = exponential_series_coefficients(spec.operator(ctx), Q, K, ctx)
    c.setflags(write=False)
    return c, ratio_radius(c)


def h_coefficients(spec: ConfluentEquationSpec, ctx: QContext, K: int = 64):
    return _h_coefficients(spec, ctx.q, ctx.tol, K)


def h_radius(spec: ConfluentEquationSpec, ctx: QContext) -> float:
    return h_coefficients(spec, ctx, 96)[1]


def exponential_solution_value(spec: ConfluentEquationSpec, w: complex, ctx: QContext) -> complex:
    """h(w) for the series solution c_0 = 1 of the confluent equation."""
    R = h_radius(spec, ctx)
    w = complex(w)
    if abs(w) < R / 0.8:
        raise OutsideRadius(f"|z| = {abs(w):.4g} is inside 1.25x the radius {R:.4g} of h_n")
    ratio = max(R / abs(w), 1e-3)
    K = min(ctx.max_series_terms, 24 + math.ceil(math.log(ctx.tol) / math.log(ratio)))
    K = 1 << max(5, (K - 1).bit_length())
    c, _ = h_coefficients(spec, ctx, K)
    return convergent_series_value(c, w, ctx)


def f_infinity_basis(spec: ConfluentEquationSpec, direction, i: int, z: BranchedPoint,
                     ctx: QContext) -> complex:
    spec.validate(ctx)
    d = as_direction(direction)
    n = spec.n
    if not 0 <= i < n:
        raise DomainError(f"index {i} out of range for n = {n}")
    zc = z.to_complex()
    if i < n - 1:
        upper, lower, lam_i, c = f_infinity_params(spec, i, d.lam, ctx)
        val = nf(upper, lower, lam_i, c / zc, ctx)
        return val * branched_power(z, -log_q(spec.a[i], ctx))
    s = sum(log_q(al, ctx) - log_q(bl, ctx) for al, bl in zip(spec.a, spec.b))
    guard_spiral(1.0, zc, ctx, "f_inf: z on q^Z", (None, 0))
    h = exponential_solution_value(spec, zc, ctx)
    return h * branched_power(z, s) / pochhammer_infinite(zc, ctx)


# ------------------------------------------------------------------ Gevrey


@dataclass(frozen=True)
class GevreyFit:
    C: float
    K: float
    slopes: tuple  # growth of the normalized error in log|z|, one per order
    passed: bool


def gevrey_check(f: Callable[[complex], complex], formal: FormalPowerSeries, zs: Sequence[complex],
                 ctx: QContext, orders=range(1, 7), slack: float = 0.5) -> GevreyFit:
    """Fit |f(z) - sum_{k<N} a_k t^k| <= C K^N q^{-N(N-1)/2} |t|^N along samples.

    ``t`` is z or 1/z according to the formal series.  The bound can only
    hold uniformly when the normalized error stays bounded as |t| -> 0, so the
    check fails when its growth in log(1/|t|) exceeds ``slack`` for any order.
    """
    zs = [complex(z) for z in zs]
    ts = [z if formal.variable == "z" else 1.0 / z for z in zs]
    vals = [complex(f(z)) for z in zs]
    lq = ctx.logq
    Y, slopes = [], []
    for N in orders:
        xs, ys = [], []
        for t, z, v in zip(ts, zs, vals):
            err = abs(v - formal.partial_sum(z, N))
            if err < 1e-13 * max(1.0, abs(v)):
                continue
            xs.append(-math.log(abs(t)))
            ys.append(math.log(err) + 0.5 * N * (N - 1) * lq - N * math.log(abs(t)))
        if len(xs) < 2:
            continue
        slope = float(np.polyfit(xs, ys, 1)[0])
        slopes.append(slope)
        Y.append((N, max(ys)))
    if len(Y) < 2:
        raise FitFailure("not enough resolvable orders for a Gevrey fit")
    Ns = np.array([y[0] for y in Y], dtype=float)
    Ys = np.array([y[1] for y in Y])
    logK = float(np.polyfit(Ns, Ys, 1)[0])
    logC = float(np.max(Ys - Ns * logK))
    passed = all(s < slack for s in slopes)
    return GevreyFit(math.exp(logC), math.exp(logK), tuple(slopes), passed)
