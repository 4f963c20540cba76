"""Basic and generalized hypergeometric series, and the solution bases of
the confluent q-hypergeometric equation

    z * prod_{l<n} (1 - a_l s) y = (1 - s) * prod_{l<n} (1 - (b_l/q) s) y,

where ``s`` is the shift y(z) -> y(qz).

Indices are 0-based throughout: for an equation of order n the "special"
solution (the one built from an exponential-type factor at infinity, or the
holomorphic one at the origin) has index n-1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DivergentSeries,
    DomainError,
    GenericityViolation,
    OutsideRadius,
    RecursionSingular,
    TruncationBudgetExceeded,
)
from .qcore import (
    BranchedPoint,
    QContext,
    branched_power,
    finite,
    log_q,
    on_spiral,
)

RADIUS_MARGIN = 0.95


def _cplx_tuple(xs) -> tuple:
    return tuple(complex(x) for x in xs)


@dataclass(frozen=True)
class HypergeometricParams:
    upper: tuple
    lower: tuple
    kind: str = "q"  # "q" for basic series, "classical" for nFm

    def __init__(self, upper: Sequence, lower: Sequence, kind: str = "q"):
        if kind not in ("q", "classical"):
            raise DomainError(f"unknown series kind {kind!r}")
        object.__setattr__(self, "upper", _cplx_tuple(upper))
        object.__setattr__(self, "lower", _cplx_tuple(lower))
        object.__setattr__(self, "kind", kind)

    def validate(self, ctx: QContext):
        if self.kind == "q":
            for b in self.lower:
                if b != 0 and on_spiral(1.0, b, ctx, (None, 0)):
                    raise DomainError(f"lower parameter {b!r} lies in q^(-N)")
        else:
            for b in self.lower:
                k = round(b.real)
                if k <= 0 and abs(b - k) < ctx.spiral_margin:
                    raise DomainError(f"lower parameter {b!r} is a non-positive integer")


def radius_class(n_upper: int, m_lower: int) -> str:
    if n_upper >= m_lower + 2:
        return "zero"
    if n_upper == m_lower + 1:
        return "one"
    return "infinity"


@dataclass(frozen=True)
class FormalPowerSeries:
    """Coefficient list of a (possibly divergent) power series.

    There is deliberately no ``__call__``.  ``partial_sum`` makes truncation
    explicit at the call site.
    """

    variable: str  # "z" or "1/z"
    coefficients: tuple
    normalization: str = ""

    def __post_init__(self):
        if self.variable not in ("z", "1/z"):
            raise DomainError("variable must be 'z' or '1/z'")
        object.__setattr__(self, "coefficients", _cplx_tuple(self.coefficients))

    def __len__(self):
        return len(self.coefficients)

    def partial_sum(self, z: complex, order: int) -> complex:
        t = complex(z) if self.variable == "z" else 1.0 / complex(z)
        return complex(sum(c * t**k for k, c in enumerate(self.coefficients[:order])))


# ------------------------------------------------------------ series engine


def _terminating_order(upper, ctx: QContext):
    """Smallest N with some a = q^(-N) (N >= 0), or None."""
    best = None
    for a in upper:
        if a == 0:
            continue
        if on_spiral(1.0, a, ctx, (None, 0)):
            N = round(-math.log(abs(a)) / ctx.logq)
            best = N if best is None else min(best, N)
    return best


def _q_ratios(upper, lower, q, ks):
    """term_{k+1}/term_k without the z factor, for an array of k."""
    qk = q**ks
    num = np.ones_like(qk, dtype=complex)
    for a in upper:
        num = num * (1.0 - a * qk)
    den = 1.0 - q * qk
    for b in lower:
        den = den * (1.0 - b * qk)
    e = 1 + len(lower) - len(upper)
    if e:
        num = num * (-qk) ** e
    return num / den


def _classical_ratios(upper, lower, ks):
    num = np.ones_like(ks, dtype=complex)
    for a in upper:
        num = num * (a + ks)
    den = ks + 1.0
    for b in lower:
        den = den * (b + ks)
    return num / den


def _sum_with_stop(ratio_fn, z, ctx: QContext, limit=None):
    """Sum 1 + sum_k prod_{j<k} ratio(j) z with the two-small-terms rule."""
    z = complex(z)
    if z == 0:
        return 1 + 0j
    K = 64
    cap = ctx.max_series_terms if limit is None else min(limit + 1, ctx.max_series_terms)
    while True:
        K = min(K, cap)
        ks = np.arange(K - 1, dtype=float)
        terms = np.empty(K, dtype=complex)
        terms[0] = 1.0
        if K > 1:
            terms[1:] = np.cumprod(ratio_fn(ks) * z)
        if limit is not None and K >= limit + 1:
            return complex(np.sum(terms[: limit + 1]))
        partial = np.cumsum(terms)
        scale = np.maximum(1.0, np.abs(partial))
        small = np.abs(terms) < ctx.tol * scale
        both = small[1:] & small[:-1]
        both[:7] = False
        hit = np.flatnonzero(both)
        if hit.size:
            stop = hit[0] + 1
            return finite(partial[stop], "series sum")
        if K >= cap:
            raise TruncationBudgetExceeded(f"series did not settle within {cap} terms")
        K *= 2


def basic_phi(params: HypergeometricParams, z: complex, ctx: QContext) -> complex:
    n, m = len(params.upper), len(params.lower)
    params.validate(ctx)
    z = complex(z)
    if z == 0:
        return 1 + 0j
    N = _terminating_order(params.upper, ctx)
    rc = radius_class(n, m)
    if N is None:
        if rc == "zero":
            raise DivergentSeries(f"{n}phi{m} has zero radius of convergence")
        if rc == "one" and abs(z) > RADIUS_MARGIN:
            raise OutsideRadius(f"|z| = {abs(z):.4g} exceeds {RADIUS_MARGIN} for {n}phi{m}")
    q = ctx.q
    return _sum_with_stop(
        lambda ks: _q_ratios(params.upper, params.lower, q, ks), z, ctx, limit=N
    )


def classical_F(params: HypergeometricParams, z: complex, ctx: QContext) -> complex:
    n, m = len(params.upper), len(params.lower)
    params.validate(ctx)
    z = complex(z)
    if z == 0:
        return 1 + 0j
    N = None
    for a in params.upper:
        k = round(a.real)
        if k <= 0 and abs(a - k) < ctx.spiral_margin:
            N = -k if N is None else min(N, -k)
    rc = radius_class(n, m)
    if N is None:
        if rc == "zero":
            raise DivergentSeries(f"{n}F{m} has zero radius of convergence")
        if rc == "one" and abs(z) > RADIUS_MARGIN:
            raise OutsideRadius(f"|z| = {abs(z):.4g} exceeds {RADIUS_MARGIN} for {n}F{m}")
    return _sum_with_stop(
        lambda ks: _classical_ratios(params.upper, params.lower, ks), z, ctx, limit=N
    )


def phi_coefficients(params: HypergeometricParams, K: int, ctx: QContext, scale=1.0):
    """First K coefficients of the basic series in its variable, times scale^k."""
    out = np.empty(K, dtype=complex)
    out[0] = 1.0
    if K > 1:
        ks = np.arange(K - 1, dtype=float)
        r = _q_ratios(params.upper, params.lower, ctx.q, ks) * complex(scale)
        out[1:] = np.cumprod(r)
    return out


def classical_coefficients(params: HypergeometricParams, K: int, scale=1.0):
    out = np.empty(K, dtype=complex)
    out[0] = 1.0
    if K > 1:
        ks = np.arange(K - 1, dtype=float)
        out[1:] = np.cumprod(_classical_ratios(params.upper, params.lower, ks) * complex(scale))
    return out


# --------------------------------------------------------- shift operators


def shift_polynomial(roots: Sequence[complex]) -> np.ndarray:
    """Coefficients c_k of prod (1 - r s) = sum c_k s^k, lowest degree first."""
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.append(c, 0) - complex(r) * np.insert(c, 0, 0)
    return c


@dataclass(frozen=True)
class QDifferenceOperator:
    """z * sum alpha_k s^k - sum beta_k s^k, both lists padded to one length."""

    alpha: tuple
    beta: tuple

    def operator(self, ctx: QContext = None) -> "QDifferenceOperator":
        return self

    def apply(self, values: Sequence[complex], z: complex):
        """Return (residual, scale) from values y(q^k z), k = 0..order."""
        z = complex(z)
        res, scale = 0j, 0.0
        for al, be, y in zip(self.alpha, self.beta, values):
            res += (z * al - be) * y
            scale += (abs(z * al) + abs(be)) * abs(y)
        return res, scale


def _operator(upper_roots, lower_roots, q) -> QDifferenceOperator:
    al = shift_polynomial(upper_roots)
    be = shift_polynomial([1.0] + [complex(b) / q for b in lower_roots])
    size = max(len(al), len(be))
    al = np.pad(al, (0, size - len(al)))
    be = np.pad(be, (0, size - len(be)))
    return QDifferenceOperator(_cplx_tuple(al), _cplx_tuple(be))


@dataclass(frozen=True)
class ConfluentEquationSpec:
    n: int
    a: tuple
    b: tuple

    def __init__(self, n: int, a: Sequence, b: Sequence):
        if n < 2:
            raise DomainError("the confluent equation needs n >= 2")
        if len(a) != n - 1 or len(b) != n - 1:
            raise DomainError(f"need {n - 1} values in both a and b")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "a", _cplx_tuple(a))
        object.__setattr__(self, "b", _cplx_tuple(b))

    def validate(self, ctx: QContext):
        for i, ai in enumerate(self.a):
            if ai == 0:
                raise DomainError("a_i must be nonzero")
            for aj in self.a[i + 1 :]:
                if on_spiral(aj, ai, ctx):
                    raise GenericityViolation("a_i / a_j lies in q^Z")
        for b in self.b:
            if b == 0 or on_spiral(1.0, b, ctx, (None, 0)):
                raise DomainError(f"b = {b!r} is zero or in q^(-N)")

    def operator(self, ctx: QContext) -> QDifferenceOperator:
        return _operator(self.a, self.b, ctx.q)


@dataclass(frozen=True)
class FuchsianEquationSpec:
    """z prod_{l<=n}(1 - a_l s) y = (1 - s) prod_{l<n}(1 - (b_l/q) s) y."""

    a: tuple
    b: tuple

    def __init__(self, a: Sequence, b: Sequence):
        if len(b) != len(a) - 1:
            raise DomainError("need len(b) = len(a) - 1")
        object.__setattr__(self, "a", _cplx_tuple(a))
        object.__setattr__(self, "b", _cplx_tuple(b))

    @property
    def n(self):
        return len(self.a)

    def operator(self, ctx: QContext) -> QDifferenceOperator:
        return _operator(self.a, self.b, ctx.q)


def q_difference_residual(f: Callable[[BranchedPoint], complex], spec, z: BranchedPoint,
                          ctx: QContext) -> float:
    """Scale-relative residual |LHS - RHS| / sum |terms| of the equation at z.

    ``spec`` is anything with an ``operator(ctx)`` method.  The operator
    products are expanded into a combination of f(q^k z).
    """
    op = spec.operator(ctx)
    vals = [complex(f(z.qshift(ctx.q, k))) for k in range(len(op.alpha))]
    res, scale = op.apply(vals, z.to_complex())
    if scale == 0:
        return 0.0
    return abs(res) / scale


# ---------------------------------------------------------- Fuchsian basis


def _except(seq, i):
    return [x for j, x in enumerate(seq) if j != i]


def fuchsian_infinity_params(a, b, i, ctx: QContext):
    a, b = _cplx_tuple(a), _cplx_tuple(b)
    q = ctx.q
    upper = [a[i]] + [a[i] * q / bl for bl in b]
    lower = [a[i] * q / al for al in _except(a, i)]
    return HypergeometricParams(upper, lower)


def fuchsian_infinity_basis(a, b, i: int, z: BranchedPoint, ctx: QContext) -> complex:
    a, b = _cplx_tuple(a), _cplx_tuple(b)
    if len(b) != len(a) - 1:
        raise DomainError("need len(b) = len(a) - 1")
    for j, aj in enumerate(a):
        if aj == 0:
            raise DomainError("a_j must be nonzero")
        if j != i and on_spiral(aj, a[i], ctx):
            raise GenericityViolation("a_i / a_j lies in q^Z")
    if any(bl == 0 for bl in b):
        raise DomainError("b_l must be nonzero")
    w = ctx.q * np.prod(b) / (z.to_complex() * np.prod(a))
    val = basic_phi(fuchsian_infinity_params(a, b, i, ctx), w, ctx)
    return val * branched_power(z, -log_q(a[i], ctx))


# --------------------------------------------------- confluent bases at 0


def f0_params(spec: ConfluentEquationSpec, j: int, ctx: QContext) -> HypergeometricParams:
    q, n = ctx.q, spec.n
    if j == n - 1:
        return HypergeometricParams(list(spec.a) + [0], spec.b)
    bj = spec.b[j]
    upper = [q * al / bj for al in spec.a] + [0]
    lower = [q * q / bj] + [q * bl / bj for bl in _except(spec.b, j)]
    return HypergeometricParams(upper, lower)


def f0_basis(spec: ConfluentEquationSpec, j: int, z: BranchedPoint, ctx: QContext) -> complex:
    if not 0 <= j < spec.n:
        raise DomainError(f"index {j} out of range for n = {spec.n}")
    zc = z.to_complex()
    if abs(zc) > RADIUS_MARGIN:
        raise OutsideRadius(f"f0 basis needs |z| <= {RADIUS_MARGIN}")
    val = basic_phi(f0_params(spec, j, ctx), zc, ctx)
    if j == spec.n - 1:
        return val
    return val * branched_power(z, 1.0 - log_q(spec.b[j], ctx))


# ------------------------------------------ confluent formal basis at infinity


@dataclass(frozen=True)
class FormalSolution:
    """series(1/z) * z^exponent, divided by (z;q)_inf when ``qexp_factor``."""

    series: FormalPowerSeries
    exponent: complex
    qexp_factor: bool = False
    radius: float | None = field(default=None, compare=False)


def formal_infinity_params(spec: ConfluentEquationSpec, i: int, ctx: QContext):
    """Parameters (upper, lower, argument scale) of the divergent series for i < n-1."""
    q = ctx.q
    ai = spec.a[i]
    upper = [ai] + [ai * q / bl for bl in spec.b]
    lower = [ai * q / al for al in _except(spec.a, i)]
    scale = np.prod(spec.b) / (ai * np.prod(spec.a))
    return HypergeometricParams(upper, lower), complex(scale)


def exponential_series_coefficients(op: QDifferenceOperator, Q: complex, K: int,
                                    ctx: QContext) -> np.ndarray:
    """Coefficients c_k (c_0 = 1) of h(z) = sum c_k z^-k such that
    y = h(z) z^s / (z;q)_inf solves the operator equation, where Q = q^s.

    Substituting the ansatz turns the equation into
    sum_k (z alpha_k - beta_k) Q^k (z;q)_k h(q^k z) = 0; equating powers of z
    gives one linear equation per coefficient.
    """
    q = ctx.q
    order = len(op.alpha) - 1
    # polynomial p_k(z) = (z alpha_k - beta_k) Q^k (z;q)_k, coefficients pi[k, r]
    pi = np.zeros((order + 1, order + 2), dtype=complex)
    zq = np.array([1.0 + 0j])
    for k in range(order + 1):
        lin = np.array([-op.beta[k], op.alpha[k]], dtype=complex)
        pk = np.convolve(lin, zq) * Q**k
        pi[k, : len(pk)] = pk
        zq = np.convolve(zq, np.array([1.0, -(q**k)]))
    top = order
    # the leading power must cancel for the chosen exponent
    lead = pi[:, top].sum()
    if abs(lead) > 1e-8 * max(1.0, np.abs(pi[:, top]).max()):
        raise RecursionSingular("exponent does not cancel the leading power")
    ks = np.arange(order + 1)
    c = np.zeros(K, dtype=complex)
    c[0] = 1.0
    for N in range(1, K):
        # equation for the coefficient of z^(top - N), scaled by q^(top N)
        den = np.sum(pi[:, top] * q ** ((top - ks) * N))
        if abs(den) < ctx.spiral_margin * np.abs(pi[:, top]).max():
            raise RecursionSingular(f"leading coefficient vanishes at order {N}")
        acc = 0j
        for m in range(max(0, N - top - 1), N):
            r = top - N + m
            if r < 0:
                continue
            acc += c[m] * np.sum(pi[:, r] * q ** (top * N - ks * m))
        c[N] = -acc / den
    return c


def ratio_radius(coeffs: Sequence[complex], tail: int = 12) -> float:
    """Ratio-test estimate R of a series in 1/z (convergent for |z| > R)."""
    c = np.abs(np.asarray(coeffs))
    idx = [k for k in range(max(1, len(c) - tail), len(c)) if c[k - 1] > 0 and c[k] > 0]
    if not idx:
        return 0.0
    return float(np.median([c[k] / c[k - 1] for k in idx]))


def confluent_formal_basis(spec: ConfluentEquationSpec, K: int, ctx: QContext):
    spec.validate(ctx)
    n, q = spec.n, ctx.q
    out = []
    for i in range(n - 1):
        params, scale = formal_infinity_params(spec, i, ctx)
        with np.errstate(over="ignore", invalid="ignore"):
            coeffs = phi_coefficients(params, K, ctx, scale)
        ok = np.isfinite(coeffs) & (np.abs(coeffs) < 1e300)
        if not ok.all():
            coeffs = coeffs[: int(np.argmin(ok))]
        fps = FormalPowerSeries("1/z", coeffs, f"{n}phi{n - 2} at scale {scale:.6g}")
        out.append(FormalSolution(fps, -log_q(spec.a[i], ctx)))
    Q = complex(np.prod(spec.a) / np.prod(spec.b))
    coeffs = exponential_series_coefficients(spec.operator(ctx), Q, K, ctx)
    s = sum(log_q(al, ctx) - log_q(bl, ctx) for al, bl in zip(spec.a, spec.b))
    fps = FormalPowerSeries("1/z", coeffs, "h_n, c_0 = 1")
    out.append(FormalSolution(fps, s, True, ratio_radius(coeffs)))
    return out


def convergent_series_value(coeffs: Sequence[complex], w: complex, ctx: QContext,
                            radius: float | None = None) -> complex:
    """Sum of a coefficient list in 1/w, checking that the tail has settled."""
    t = 1.0 / complex(w)
    if radius is not None and abs(w) < radius / 0.8:
        raise OutsideRadius(f"|w| = {abs(w):.4g} is not beyond 1.25x the radius {radius:.4g}")
    total, p = 0j, 1 + 0j
    small = 0
    for k, c in enumerate(coeffs):
        term = c * p
        total += term
        p *= t
        small = small + 1 if abs(term) < ctx.tol * max(1.0, abs(total)) else 0
        if small >= 2 and k >= 8:
            return total
    if abs(term) > 1e3 * ctx.tol * max(1.0, abs(total)) and abs(term) > 1e-15 * max(1.0, abs(total)):
        raise TruncationBudgetExceeded(
            f"series in 1/z not settled after {len(coeffs)} terms (|last| = {abs(term):.3g})"
        )
    return total
