"""The classical confluent hypergeometric equation and its n x n system
counterpart, with Gamma-function connection data, and the q -> 1 checks
that tie the q-difference results back to them.

Scalar equation, with theta = z d/dz and beta_n = 1:

    prod_l (theta + alpha_l) y = d/dz prod_l (theta + beta_l - 1) y.

Its solutions near the origin and at infinity are finite sums of entire
(n-1)F(n-1) series times powers of z, so every quantity below is computed
in closed form.  Large |z| makes those sums cancel badly in double
precision; past ``_SERIES_SWITCH`` the series go through mpmath, which
raises its working precision as needed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from .connection import main_connection_coeffs
from .errors import DomainError, GenericityViolation, PoleError, WindowViolation
from .qcore import (
    BranchedPoint,
    QContext,
    log_q,
    log_q_gamma,
    log_theta,
    q_exponential,
    safe_exp,
)
from .qseries import ConfluentEquationSpec, HypergeometricParams, classical_F, f0_basis
from .qsystem import MAX_N, SystemSpec, Sq_closed, build_diagonalized, submatrix_eigen
from .resummation import f_infinity_basis

POLE_MARGIN = 1e-9
DEFAULT_SCHEDULE = (0.9, 0.99, 0.999)
TREND_RATIO = 0.8
TREND_FINAL = 5e-2
# below this an error counts as exact, so its trend is not judged
EXACT_FLOOR = 1e-11
_SERIES_SWITCH = 8.0
_DEFAULT_CTX = QContext(0.5)

# ------------------------------------------------------------------ Gamma

# Numerical Recipes (3rd ed.) Lanczos fit, g = 671/128, 14 terms.
_LANCZOS_G = 5.2421875
_LANCZOS = (
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
)
_LANCZOS_C0 = 0.999999999999997092
_SQRT_2PI = 2.5066282746310005


def _check_pole(z: complex):
    k = round(z.real)
    if k <= 0 and abs(z - k) < POLE_MARGIN:
        raise PoleError(f"Gamma has a pole at {z!r}")


def _lanczos_log(z: complex) -> complex:
    # valid for Re z >= 1/2
    tmp = z + _LANCZOS_G
    tmp = (z + 0.5) * cmath.log(tmp) - tmp
    ser = _LANCZOS_C0
    y = z
    for c in _LANCZOS:
        y += 1.0
        ser += c / y
    return tmp + cmath.log(_SQRT_2PI * ser / z)


def log_gamma(z: complex) -> complex:
    """A logarithm of Gamma(z); the imaginary part is not reduced mod 2 pi."""
    z = complex(z)
    _check_pole(z)
    if z.real >= 0.5:
        return _lanczos_log(z)
    # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    s = cmath.sin(math.pi * z)
    return math.log(math.pi) - cmath.log(s) - _lanczos_log(1.0 - z)


def gamma(z: complex) -> complex:
    return safe_exp(log_gamma(z), "Gamma")


def gamma_ratio(num: Sequence[complex], den: Sequence[complex]) -> complex:
    """prod Gamma(num) / prod Gamma(den), formed in log space."""
    lg = sum((log_gamma(x) for x in num), 0j) - sum((log_gamma(x) for x in den), 0j)
    return safe_exp(lg, "Gamma ratio")


# ------------------------------------------------------ parameter map


def q_parameter_map(alpha: Sequence, beta: Sequence, q: float):
    """q-parameters whose confluent q-equation degenerates to the classical one."""
    if not 0 < q < 1:
        raise DomainError("q must lie in (0, 1)")
    a, b = [], []
    for al in alpha:
        d = 1 + (1 - q) * complex(al)
        if abs(d) < POLE_MARGIN:
            raise DomainError(f"alpha = {al!r} equals 1/(q-1)")
        a.append(1 / d)
    for be in beta:
        d = 1 + (1 - q) * (complex(be) - 1)
        if abs(d) < POLE_MARGIN:
            raise DomainError(f"beta = {be!r} equals q/(q-1)")
        b.append(q / d)
    return a, b


def alpha_from_a(a: complex, q: float) -> complex:
    return (1 / complex(a) - 1) / (1 - q)


# ---------------------------------------------------------- data types


def _near_int(x: complex, margin: float) -> bool:
    return abs(x - round(x.real)) < margin


@dataclass(frozen=True)
class Sector:
    """Open range of arguments (low, high)."""

    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise DomainError("a sector needs low < high")

    @classmethod
    def of(cls, sign) -> "Sector":
        s = _sign(sign)
        return cls(-math.pi / 2, 3 * math.pi / 2) if s > 0 else cls(-3 * math.pi / 2, math.pi / 2)

    def contains(self, arg: float) -> bool:
        return self.low < arg < self.high


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise DomainError(f"sign must be '+' or '-', got {sign!r}")


def _as_sector(sector) -> Sector:
    return sector if isinstance(sector, Sector) else Sector.of(sector)


def _sector_sign(sector: Sector) -> int:
    if sector == Sector.of(1):
        return 1
    if sector == Sector.of(-1):
        return -1
    raise DomainError("the exponential solution is only defined on the two standard sectors")


@dataclass(frozen=True)
class ClassicalEquationSpec:
    n: int
    alpha: tuple
    beta: tuple

    def __init__(self, n: int, alpha: Sequence, beta: Sequence):
        if n < 2:
            raise DomainError("need n >= 2")
        if len(alpha) != n - 1 or len(beta) != n - 1:
            raise DomainError(f"need {n - 1} values in both alpha and beta")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "alpha", tuple(complex(x) for x in alpha))
        object.__setattr__(self, "beta", tuple(complex(x) for x in beta))
        self.validate()

    @property
    def beta_full(self) -> tuple:
        return self.beta + (1 + 0j,)

    def validate(self, margin: float = 1e-6):
        for b in self.beta:
            if b.real < 0.5 and _near_int(b, margin):
                raise DomainError(f"beta = {b!r} is a non-positive integer")
        for i, x in enumerate(self.alpha):
            for y in self.alpha[i + 1 :]:
                if _near_int(x - y, margin):
                    raise GenericityViolation("alpha_i - alpha_j is an integer")
        bf = self.beta_full
        for k, x in enumerate(bf):
            for y in bf[k + 1 :]:
                if _near_int(x - y, margin):
                    raise GenericityViolation("the local exponents at 0 differ by an integer")

    def q_spec(self, q: float) -> ConfluentEquationSpec:
        a, b = q_parameter_map(self.alpha, self.beta, q)
        return ConfluentEquationSpec(self.n, a, b)


# --------------------------------------------------------- scalar side


def _except(seq, i):
    return [x for j, x in enumerate(seq) if j != i]


def _entire_F(upper, lower, z: complex, ctx: QContext) -> complex:
    z = complex(z)
    if abs(z) <= _SERIES_SWITCH:
        return classical_F(HypergeometricParams(upper, lower, "classical"), z, ctx)
    return complex(mpmath.hyper([mpmath.mpc(u) for u in upper],
                                [mpmath.mpc(b) for b in lower], mpmath.mpc(z)))


def _zpow(z: BranchedPoint, e: complex) -> complex:
    return cmath.exp(complex(e) * z.log())


def f_origin(spec: ClassicalEquationSpec, z, ctx: QContext | None = None) -> complex:
    """The solution (n-1)F(n-1)(alpha; beta; z) regular at 0."""
    ctx = ctx or _DEFAULT_CTX
    zc = z.to_complex() if isinstance(z, BranchedPoint) else complex(z)
    return _entire_F(spec.alpha, spec.beta, zc, ctx)


def _local_sum(spec, coeffs, z: BranchedPoint, turn: int, ctx) -> complex:
    """sum_k c_k x^(1 - beta_k) F_k(z) with x = z e^(turn pi i), F_k the k-th solution at 0.

    ``coeffs(ratio, conv)`` builds the c_k from a Gamma-ratio function after
    converting the parameters with ``conv``.  Far from 0
    the terms are of size e^|Re z| while the sum may be O(1), so there the
    whole sum, coefficients included, is formed in mpmath with enough guard
    digits to absorb the cancellation.
    """
    bf = spec.beta_full
    zc = z.to_complex()
    x = BranchedPoint(z.modulus, z.argument + turn * math.pi)
    if abs(zc) <= _SERIES_SWITCH:
        total = 0j
        for k, (ck, bk) in enumerate(zip(coeffs(gamma_ratio, complex), bf)):
            upper = [1 + al - bk for al in spec.alpha]
            lower = [1 + bl - bk for bl in _except(bf, k)]
            total += ck * _zpow(x, 1 - bk) * _entire_F(upper, lower, zc, ctx)
        return total
    extra = int(abs(zc.real) / math.log(10)) + 10
    with mpmath.workdps(16 + extra):
        # rebuild z from its polar form so it matches logx to the working precision
        mz = mpmath.mpf(z.modulus) * mpmath.expj(z.argument)
        logx = mpmath.log(mpmath.mpf(z.modulus)) + 1j * (mpmath.mpf(z.argument) + turn * mpmath.pi)
        total = mpmath.mpc(0)
        # coefficients and series parameters must be formed from the same numbers
        mbf = [mpmath.mpc(b) for b in bf]
        for k, (ck, bk) in enumerate(zip(coeffs(mpmath.gammaprod, mpmath.mpc), mbf)):
            upper = [1 + mpmath.mpc(al) - bk for al in spec.alpha]
            lower = [1 + bl - bk for bl in _except(mbf, k)]
            total += ck * mpmath.exp((1 - bk) * logx) * mpmath.hyper(upper, lower, mz)
        return complex(total)


def _algebraic_coeffs(spec: ClassicalEquationSpec, i: int):
    def build(ratio, conv):
        al = [conv(x) for x in spec.alpha]
        bf = [conv(x) for x in spec.beta_full]
        ai = al[i]
        out = []
        for k, bk in enumerate(bf):
            num = [1 + ai - x for x in _except(al, i)] + [bk - x for x in _except(bf, k)]
            den = [1 + ai - x for x in _except(bf, k)] + [bk - x for x in _except(al, i)]
            out.append(ratio(num, den))
        return out

    return build


def _exponential_coeffs(spec: ClassicalEquationSpec):
    def build(ratio, conv):
        al = [conv(x) for x in spec.alpha]
        bf = [conv(x) for x in spec.beta_full]
        return [ratio([bk - x for x in _except(bf, k)], [bk - x for x in al])
                for k, bk in enumerate(bf)]

    return build


def _exponent_sum(spec) -> complex:
    return sum(spec.alpha) - sum(spec.beta)


def f_infinity(spec: ClassicalEquationSpec, i: int, z: BranchedPoint, sector,
               ctx: QContext | None = None) -> complex:
    """The i-th solution at infinity, including its power and exponential factors.

    For i < n-1 this is h_i z^(-alpha_i), defined on the whole universal
    cover.  The last one is the solution recessive along arg z = +-pi,
    written as a Meijer G^{n,0} function of z e^(-+ pi i).
    """
    ctx = ctx or _DEFAULT_CTX
    n = spec.n
    if not 0 <= i < n:
        raise DomainError(f"index {i} out of range for n = {n}")
    sector = _as_sector(sector)
    if i < n - 1:
        return _local_sum(spec, _algebraic_coeffs(spec, i), z, 0, ctx)
    s = _sector_sign(sector)
    if not sector.contains(z.argument):
        raise WindowViolation(f"arg z = {z.argument:.4g} lies outside the sector")
    g = _local_sum(spec, _exponential_coeffs(spec), z, -s, ctx)
    return g * cmath.exp(1j * s * math.pi * _exponent_sum(spec))


def h_infinity(spec: ClassicalEquationSpec, i: int, z: BranchedPoint, sector,
               ctx: QContext | None = None) -> complex:
    f = f_infinity(spec, i, z, sector, ctx)
    if i < spec.n - 1:
        return f * _zpow(z, spec.alpha[i])
    return f * cmath.exp(-z.to_complex()) * _zpow(z, -_exponent_sum(spec))


def asymptotic_h(spec: ClassicalEquationSpec, i: int, z: complex, order: int) -> complex:
    """Partial sum of nF(n-2)(alpha_i, 1 + alpha_i - beta; 1 + alpha_i - alpha_(others); -1/z)."""
    ai = spec.alpha[i]
    upper = [ai] + [1 + ai - b for b in spec.beta]
    lower = [1 + ai - a for a in _except(spec.alpha, i)]
    t = -1 / complex(z)
    total, term = 1 + 0j, 1 + 0j
    for k in range(order):
        r = np.prod([u + k for u in upper]) / ((k + 1) * np.prod([v + k for v in lower] or [1]))
        term *= r * t
        total += term
    return complex(total)


def classical_connection_coeffs(spec: ClassicalEquationSpec, sign) -> list:
    s = _sign(sign)
    al, be = spec.alpha, spec.beta
    out = []
    for i, ai in enumerate(al):
        num = list(be) + [x - ai for x in _except(al, i)]
        den = _except(al, i) + [b - ai for b in be]
        out.append(gamma_ratio(num, den) * cmath.exp(1j * s * math.pi * ai))
    out.append(gamma_ratio(be, al))
    return out


def classical_connection_terms(spec, z: BranchedPoint, sign, ctx=None):
    coeffs = classical_connection_coeffs(spec, sign)
    sector = Sector.of(sign)
    terms = [c * f_infinity(spec, i, z, sector, ctx) for i, c in enumerate(coeffs)]
    return f_origin(spec, z, ctx), terms


def classical_connection_check(spec: ClassicalEquationSpec, z: BranchedPoint, sector,
                               ctx: QContext | None = None) -> float:
    """Relative residual of the expansion of the origin solution at infinity."""
    sector = _as_sector(sector)
    sign = _sector_sign(sector)
    lhs, terms = classical_connection_terms(spec, z, sign, ctx)
    return abs(lhs - sum(terms)) / max(1.0, abs(lhs))


# ---------------------------------------------------- differential residual

_STENCIL = np.arange(-4, 5, dtype=float)


def _derivative_weights(order: int) -> np.ndarray:
    V = np.vander(_STENCIL, increasing=True).T
    rhs = np.zeros(len(_STENCIL))
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


_WEIGHTS = [_derivative_weights(k) for k in range(5)]


def euler_derivatives(f, z: BranchedPoint, order: int, step: float = 1e-2) -> np.ndarray:
    """theta^k f at z for k <= order, theta = z d/dz, by a 9-point stencil in log z."""
    vals = np.array([f(BranchedPoint(z.modulus * math.exp(t * step), z.argument))
                     for t in _STENCIL])
    return np.array([_WEIGHTS[k] @ vals / step**k for k in range(order + 1)])


def equation_residual(spec: ClassicalEquationSpec, f, z: BranchedPoint) -> float:
    """Scale-relative residual of z prod(theta + alpha) f - theta prod(theta + beta - 1) f."""
    d = euler_derivatives(f, z, spec.n)
    left = np.poly([-a for a in spec.alpha])[::-1]
    right = np.convolve(np.poly([1 - b for b in spec.beta])[::-1], [0, 1])
    zc = z.to_complex()
    lt = zc * left * d[: len(left)]
    rt = right * d[: len(right)]
    scale = np.abs(lt).sum() + np.abs(rt).sum()
    return float(abs(lt.sum() - rt.sum()) / scale)


# ---------------------------------------------------------- system side


@dataclass(frozen=True)
class ClassicalSystemSpec:
    """dF/dz = (E_nn + A/z) F.  Field names mirror SystemSpec so the q-side
    diagonalization applies unchanged."""

    A: np.ndarray
    eig_n: tuple = field(init=False)
    eig_n1: tuple = field(init=False)
    eig_n2: tuple = field(init=False)
    a: tuple = field(init=False)
    b: tuple = field(init=False)
    P: np.ndarray = field(init=False)
    P_inv: np.ndarray = field(init=False)

    def __post_init__(self, margin: float = 1e-6):
        A = np.array(self.A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or not 2 <= A.shape[0] <= MAX_N:
            raise DomainError(f"A must be square of size 2..{MAX_N}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        n = A.shape[0]
        object.__setattr__(self, "eig_n", tuple(submatrix_eigen(A, n)))
        object.__setattr__(self, "eig_n1", tuple(submatrix_eigen(A, n - 1)))
        object.__setattr__(self, "eig_n2", tuple(submatrix_eigen(A, n - 2)))
        for i, x in enumerate(self.eig_n):
            for y in self.eig_n[i + 1 :]:
                if _near_int(x - y, margin):
                    raise GenericityViolation("eigenvalues of A differ by an integer")
        for i, x in enumerate(self.eig_n1):
            for y in self.eig_n1[i + 1 :]:
                if _near_int(x - y, margin):
                    raise GenericityViolation("eigenvalues of the upper-left block differ by an integer")
            for y in self.eig_n:
                if _near_int(x - y, margin):
                    raise GenericityViolation("an eigenvalue of A and one of its block differ by an integer")
        d = build_diagonalized(self)
        object.__setattr__(self, "a", d.a)
        object.__setattr__(self, "b", d.b)
        object.__setattr__(self, "P", d.P)
        object.__setattr__(self, "P_inv", d.P_inv)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def a_nn(self) -> complex:
        return sum(self.eig_n) - sum(self.eig_n1)

    def __hash__(self):
        return hash(self.A.tobytes())

    def __eq__(self, other):
        return isinstance(other, ClassicalSystemSpec) and np.array_equal(self.A, other.A)


def classical_U(sys: ClassicalSystemSpec, sign) -> np.ndarray:
    """Connection matrix of the diagonalized system, F0 = F_inf U."""
    s = _sign(sign)
    n = sys.n
    lam, lp = sys.eig_n, sys.eig_n1
    U = np.empty((n, n), dtype=complex)
    for j, lj in enumerate(lam):
        others = _except(lam, j)
        for i, li in enumerate(lp):
            num = [1 + lj - x for x in others] + [1 + li - x for x in _except(lp, i)]
            den = [1 + lj - x for x in _except(lp, i)] + [1 + li - x for x in others]
            phase = cmath.exp(1j * s * math.pi * (lj - li))
            U[i, j] = sys.a[i] / (lj - li) * gamma_ratio(num, den) * phase
        U[n - 1, j] = gamma_ratio([1 + lj - x for x in others], [1 + lj - x for x in lp])
    return U


def classical_U_minus_inverse(sys: ClassicalSystemSpec) -> np.ndarray:
    """The first n-1 columns of U_-^{-1} in closed form (n x (n-1))."""
    n = sys.n
    lam, lp = sys.eig_n, sys.eig_n1
    V = np.empty((n, n - 1), dtype=complex)
    for k, lk in enumerate(lam):
        for j, lj in enumerate(lp):
            num = [x - lj + 1 for x in _except(lp, j)] + [x - lk for x in _except(lam, k)]
            den = [x - lj + 1 for x in _except(lam, k)] + [x - lk for x in _except(lp, j)]
            V[k, j] = -sys.b[j] * gamma_ratio(num, den)
    return V


def classical_S_minus(sys: ClassicalSystemSpec) -> np.ndarray:
    n = sys.n
    lam, lp = sys.eig_n, sys.eig_n1
    S = np.zeros((n, n), dtype=complex)
    for i, li in enumerate(lp):
        S[i, i] = cmath.exp(-2j * math.pi * li)
    S[n - 1, n - 1] = cmath.exp(-2j * math.pi * sys.a_nn)
    for j, lj in enumerate(lp):
        acc = 0j
        for k, lk in enumerate(lam):
            others = _except(lam, k)
            num = ([1 + lk - x for x in others] + [x - lj + 1 for x in _except(lp, j)]
                   + [x - lk for x in others])
            den = ([1 + lk - x for x in lp] + [x - lj + 1 for x in others]
                   + [x - lk for x in _except(lp, j)])
            acc += gamma_ratio(num, den) * cmath.exp(-2j * math.pi * lk)
        S[n - 1, j] = -sys.b[j] * acc
    return S


def stokes_consistency(sys: ClassicalSystemSpec) -> float:
    """max |S_- U_- - U_+ e^(-2 pi i A_n)|, relative to the size of U_+."""
    Up, Um = classical_U(sys, 1), classical_U(sys, -1)
    E = np.diag([cmath.exp(-2j * math.pi * x) for x in sys.eig_n])
    R = classical_S_minus(sys) @ Um - Up @ E
    return float(np.abs(R).max() / max(1.0, np.abs(Up).max()))


def classical_F0(sys: ClassicalSystemSpec, z: BranchedPoint, ctx: QContext | None = None) -> np.ndarray:
    """Convergent fundamental solution H0(z) z^{A_n} of the diagonalized system."""
    ctx = ctx or _DEFAULT_CTX
    n = sys.n
    lam, lp = sys.eig_n, sys.eig_n1
    zc = z.to_complex()
    F = np.empty((n, n), dtype=complex)
    for j, lj in enumerate(lam):
        lower = [1 + lj - x for x in _except(lam, j)]
        for i in range(n):
            shift = [1 if (l == i) else 0 for l in range(n - 1)]
            upper = [1 + lj - x - d for x, d in zip(lp, shift)]
            v = _entire_F(upper, lower, zc, ctx)
            if i < n - 1:
                v *= sys.a[i] / (lj - lp[i])
            F[i, j] = v * _zpow(z, lj)
    return F


def classical_Finf_columns(sys: ClassicalSystemSpec, z: BranchedPoint,
                           ctx: QContext | None = None) -> np.ndarray:
    """The first n-1 columns of the solution at infinity (n x (n-1))."""
    ctx = ctx or _DEFAULT_CTX
    n = sys.n
    lam, lp = sys.eig_n, sys.eig_n1
    zc = z.to_complex()
    F = np.empty((n, n - 1), dtype=complex)
    for j, lj in enumerate(lp):
        for i in range(n):
            dij = 1 if i == j else 0
            dil = [1 if l == i else 0 for l in range(n - 1)]
            if i == j:
                d = 1.0
            elif i < n - 1:
                d = sys.a[i] * sys.b[j] / ((lp[i] - lj + 1) * zc)
            else:
                d = -sys.b[j] / zc
            acc = 0j
            for k, lk in enumerate(lam):
                others = _except(lam, k)
                num = ([dil[l] + lp[l] - lj + 1 - dij for l in range(n - 1) if l != j]
                       + [x - lk for x in others])
                den = ([x - lj + 1 - dij for x in others]
                       + [dil[l] + lp[l] - lk for l in range(n - 1) if l != j])
                upper = [1 + lk - dil[l] - lp[l] for l in range(n - 1)]
                lower = [1 + lk - x for x in others]
                acc += (gamma_ratio(num, den) * _entire_F(upper, lower, zc, ctx)
                        * _zpow(z, lk - lj + 1 - dij))
            F[i, j] = d * acc * _zpow(z, lj)
    return F


def numeric_U_minus_inverse(sys: ClassicalSystemSpec, z: BranchedPoint,
                            ctx: QContext | None = None) -> np.ndarray:
    """F0(z)^{-1} times the first n-1 columns of F_inf(z); constant in z."""
    return np.linalg.solve(classical_F0(sys, z, ctx), classical_Finf_columns(sys, z, ctx))


# --------------------------------------------------------- q -> 1 trends


@dataclass
class TrendReport:
    name: str
    qs: list
    errors: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    ratio_limit: float = TREND_RATIO
    final_limit: float = TREND_FINAL

    def ratios(self, key: str) -> list:
        e = self.errors[key]
        return [e[k + 1] / e[k] if e[k] > 0 else math.inf for k in range(len(e) - 1)]

    def item_passed(self, key: str) -> bool:
        e = self.errors[key]
        if not all(math.isfinite(x) for x in e):
            return False
        if e[-1] >= self.final_limit:
            return False
        for x, y in zip(e, e[1:]):
            if y <= EXACT_FLOOR:
                continue
            if y / x >= self.ratio_limit:
                return False
        return True

    @property
    def passed(self) -> bool:
        return bool(self.errors) and all(self.item_passed(k) for k in self.errors)

    def rows(self):
        """(quantity, q, error) triples for the CSV trend tables."""
        for key, errs in self.errors.items():
            for q, e in zip(self.qs, errs):
                yield key, q, e


def _principal_arg(lam: complex) -> float:
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    a = cmath.phase(lam)
    if a <= -math.pi or a >= math.pi:
        raise WindowViolation("arg(lambda) must lie strictly inside (-pi, pi)")
    return a


def connection_window(lam: complex, z: BranchedPoint, sign) -> None:
    """Raise unless arg z sits in the half-window that the sign selects."""
    s = _sign(sign)
    al = _principal_arg(lam)
    lo, hi = -al - math.pi, -al + math.pi
    t = z.argument
    if not lo < t < hi:
        raise WindowViolation(f"arg z = {t:.4g} outside ({lo:.4g}, {hi:.4g})")
    if (s > 0 and not t > 0) or (s < 0 and not t < 0):
        raise WindowViolation(f"arg z = {t:.4g} does not select the {'+' if s > 0 else '-'} sign")


def _tilde_connection(spec: ClassicalEquationSpec, lam: complex, z: BranchedPoint, q: float,
                      ctx: QContext):
    """f0, (C_1..C_{n-1}, C_n) and the algebraic solutions at infinity of the
    q-equation in the scaling that degenerates to the classical equation."""
    n = spec.n
    qctx = ctx.with_q(q)
    qs = spec.q_spec(q)
    pa, pb = complex(np.prod(qs.a)), complex(np.prod(qs.b))
    c = (1 - q) * pb / (q ** (n - 1) * pa)
    zeta = z.times(c)
    lam_q = complex(lam) * q ** (n - 1) * pa / ((1 - q) * pb)
    dlog = z.log() - zeta.log()
    f0 = f0_basis(qs, n - 1, zeta, qctx)
    cs, cn = main_connection_coeffs(qs, lam_q, zeta, qctx)
    la = [log_q(x, qctx) for x in qs.a]
    lb = [log_q(x, qctx) for x in qs.b]
    cs = [ci * cmath.exp(li * dlog) for ci, li in zip(cs, la)]
    cn = cn * cmath.exp((sum(lb) - sum(la)) * dlog)
    finf = [f_infinity_basis(qs, lam_q, i, zeta, qctx) * cmath.exp(-la[i] * dlog)
            for i in range(n - 1)]
    return f0, cs, cn, finf


def qlimit_connection(spec: ClassicalEquationSpec, lam: complex, z: BranchedPoint, sign,
                      q_schedule: Sequence[float] = DEFAULT_SCHEDULE,
                      ctx: QContext | None = None, enforce_window: bool = True) -> TrendReport:
    ctx = ctx or _DEFAULT_CTX
    if enforce_window:
        connection_window(lam, z, sign)
    n = spec.n
    f0 = f_origin(spec, z, ctx)
    coeffs = classical_connection_coeffs(spec, sign)
    sector = Sector.of(sign)
    finf = [f_infinity(spec, i, z, sector, ctx) for i in range(n - 1)]
    rep = TrendReport("qlimit_connection", list(q_schedule))
    keys = ["f0"] + [f"C_{i + 1}" for i in range(n)] + [f"f_inf_{i + 1}" for i in range(n - 1)]
    for k in keys:
        rep.errors[k] = []
    for q in q_schedule:
        qf0, cs, cn, qfinf = _tilde_connection(spec, lam, z, q, ctx)
        rep.errors["f0"].append(abs(qf0 - f0) / max(1.0, abs(f0)))
        for i in range(n - 1):
            rep.errors[f"C_{i + 1}"].append(abs(cs[i] - coeffs[i]) / max(1.0, abs(coeffs[i])))
            rep.errors[f"f_inf_{i + 1}"].append(abs(qfinf[i] - finf[i]) / max(1.0, abs(finf[i])))
        rep.errors[f"C_{n}"].append(abs(cn - coeffs[-1]) / max(1.0, abs(coeffs[-1])))
    return rep


def tilde_coefficients(spec: ClassicalEquationSpec, lam: complex, z: BranchedPoint, q: float,
                       ctx: QContext | None = None) -> list:
    """C~_1..C~_n of the q-equation at one q."""
    _, cs, cn, _ = _tilde_connection(spec, lam, z, q, ctx or _DEFAULT_CTX)
    return cs + [cn]


def stokes_window(lam: complex, mu: complex, z: BranchedPoint) -> None:
    t = z.argument
    al, am = _principal_arg(lam), _principal_arg(mu)
    zc = z.to_complex()
    if not (zc.real < 0 and math.pi / 2 < t < 3 * math.pi / 2):
        raise WindowViolation("need Re z < 0 with pi/2 < arg z < 3 pi/2")
    for d, name in ((lam, "lambda"), (mu, "mu")):
        ray = cmath.phase(-1 / complex(d))
        if abs(math.remainder(t - ray, 2 * math.pi)) < 1e-9:
            raise WindowViolation(f"z lies on the ray -1/{name} R_>0")
    if not (-am - math.pi < t - 2 * math.pi < 0 < t < -al + math.pi):
        raise WindowViolation("arg z violates the double window of lambda and mu")


def qlimit_stokes(sys: ClassicalSystemSpec, lam: complex, mu: complex, z: BranchedPoint,
                  q_schedule: Sequence[float] = DEFAULT_SCHEDULE,
                  ctx: QContext | None = None, enforce_window: bool = True) -> TrendReport:
    """max-entry error of S_q(z, lam, mu) e^(-2 pi i delta_q) against S_- per q."""
    ctx = ctx or _DEFAULT_CTX
    if enforce_window:
        stokes_window(lam, mu, z)
    target = classical_S_minus(sys)
    scale = max(1.0, float(np.abs(target).max()))
    rep = TrendReport("qlimit_stokes", list(q_schedule), {"S": []})
    for q in q_schedule:
        qctx = ctx.with_q(q)
        dsys = build_diagonalized(SystemSpec(sys.A, q))
        S = Sq_closed(dsys, lam, mu, z, qctx).entries
        E = np.diag([cmath.exp(-2j * math.pi * x) for x in dsys.spec.nu])
        rep.errors["S"].append(float(np.abs(S @ E - target).max()) / scale)
    return rep


def basic_limits_suite(q_schedule: Sequence[float] = DEFAULT_SCHEDULE,
                       ctx: QContext | None = None) -> TrendReport:
    ctx = ctx or _DEFAULT_CTX
    rep = TrendReport("basic_limits", list(q_schedule))
    alpha = 0.7 - 0.4j
    ez = 0.8 + 0.6j
    gz = 0.5
    tz, ta, tb = 1.5 + 0.5j, 0.5, -0.3
    items = {
        "log_q(1+(1-q)alpha)": lambda c: abs(log_q(1 + (1 - c.q) * alpha, c) + alpha),
        "log_q(1)": lambda c: abs(log_q(1.0, c)),
        "e_q": lambda c: abs(q_exponential(ez, c) - cmath.exp(ez)) / abs(cmath.exp(ez)),
        "Gamma_q(1/2)": lambda c: abs(cmath.exp(log_q_gamma(gz, c)) - math.sqrt(math.pi)),
        "Gamma_q(z)": lambda c: abs(cmath.exp(log_q_gamma(1.3 + 0.4j, c)) - gamma(1.3 + 0.4j)),
        "theta(z)/theta(qz)": lambda c: abs(
            cmath.exp(log_theta(2.0, c) - log_theta(2.0 * c.q, c)) - 2.0),
        "theta ratio": lambda c: abs(
            cmath.exp(log_theta(c.q**tb * tz, c) - log_theta(c.q**ta * tz, c)) - tz ** (ta - tb)),
    }
    for key, fn in items.items():
        rep.errors[key] = [float(fn(ctx.with_q(q))) for q in q_schedule]
    return rep
