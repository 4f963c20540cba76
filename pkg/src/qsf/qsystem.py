"""The n x n system D_q F = (E_nn + A/z) F: eigenvalue data of the leading
submatrices, diagonalization of the upper-left block, fundamental solutions
at 0 and infinity, and the connection and Stokes matrices.

Everything below works on the diagonalized system first (arrowhead matrix
A_{n-1}) and is transported to the original A by conjugation at the end.

Notation: ``w = (1-q) q^{-nu_n} z`` is the natural variable of the series in
this module.  Origin solutions need |w| < 1.  The resummed columns of the
solution at infinity are expansions in w, while its convergent last column
is a series in 1/w with radius q.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    GenericityViolation,
    OverlapDomainEmpty,
    RecursionSingular,
    RootfindFailure,
    SingularSolution,
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
    HypergeometricParams,
    basic_phi,
    convergent_series_value,
    exponential_series_coefficients,
    phi_coefficients,
    ratio_radius,
)
from .resummation import SpiralDirection, as_direction, nf

MAX_N = 4
GENERICITY_MARGIN = 1e-6


# ------------------------------------------------------------ eigenvalues


def _charpoly(M: np.ndarray) -> np.ndarray:
    """Faddeev-LeVerrier: coefficients of det(x I - M), highest degree first."""
    k = M.shape[0]
    c = np.zeros(k + 1, dtype=complex)
    c[0] = 1.0
    N = np.eye(k, dtype=complex)
    for m in range(1, k + 1):
        AM = M @ N
        c[m] = -np.trace(AM) / m
        N = AM + c[m] * np.eye(k)
    return c


def submatrix_eigen(A, k: int) -> list:
    """Eigenvalues of the upper-left k x k block, sorted by (real, imag)."""
    A = np.asarray(A, dtype=complex)
    if not 0 <= k <= A.shape[0]:
        raise DomainError(f"k = {k} out of range for a {A.shape[0]}x{A.shape[0]} matrix")
    if k == 0:
        return []
    c = _charpoly(A[:k, :k])
    dc = np.polyder(c)
    roots = np.roots(c) if k > 1 else np.array([-c[1]])
    out = []
    for r in roots:
        for _ in range(8):
            d = np.polyval(dc, r)
            if d == 0:
                break
            step = np.polyval(c, r) / d
            r = r - step
            if abs(step) <= 1e-16 * max(1.0, abs(r)):
                break
        scale = np.polyval(np.abs(c), abs(r))
        if abs(np.polyval(c, r)) > 1e-10 * max(1.0, scale):
            raise RootfindFailure(f"characteristic polynomial residual too large at {r!r}")
        out.append(complex(r))
    return sorted(out, key=lambda x: (round(x.real, 12), x.imag))


# ------------------------------------------------------------ system data


def _dist_to_int(x: complex) -> float:
    return abs(x - round(x.real))


@dataclass(frozen=True)
class SystemSpec:
    A: np.ndarray
    q: float
    eig_n: tuple = field(init=False)
    eig_n1: tuple = field(init=False)
    eig_n2: tuple = field(init=False)
    mu: tuple = field(init=False)
    nu: tuple = field(init=False)  # length n, the last entry is nu_n

    def __post_init__(self):
        A = np.array(self.A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DomainError("A must be square")
        n = A.shape[0]
        if not 2 <= n <= MAX_N:
            raise DomainError(f"n must lie in [2, {MAX_N}], got {n}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        ctx = QContext(self.q)
        eig_n = submatrix_eigen(A, n)
        eig_n1 = submatrix_eigen(A, n - 1)
        eig_n2 = submatrix_eigen(A, n - 2)
        for lam in eig_n + eig_n1:
            if abs(1 - (1 - self.q) * lam) < GENERICITY_MARGIN:
                raise GenericityViolation(f"1 - (1-q) lambda vanishes for lambda = {lam!r}")
        mu = [log_q(1 - (1 - self.q) * x, ctx) for x in eig_n]
        nu = [log_q(1 - (1 - self.q) * x, ctx) for x in eig_n1]
        nu.append(sum(mu) - sum(nu))
        object.__setattr__(self, "eig_n", tuple(eig_n))
        object.__setattr__(self, "eig_n1", tuple(eig_n1))
        object.__setattr__(self, "eig_n2", tuple(eig_n2))
        object.__setattr__(self, "mu", tuple(mu))
        object.__setattr__(self, "nu", tuple(nu))
        self.check_generic()

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def context(self, **kw) -> QContext:
        return QContext(self.q, **kw)

    def check_generic(self, margin: float = GENERICITY_MARGIN):
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                if _dist_to_int(self.mu[i] - self.mu[j]) <= margin:
                    raise GenericityViolation(f"mu_{i} - mu_{j} is an integer")
        for i in range(n - 1):
            for j in range(i + 1, n - 1):
                if _dist_to_int(self.nu[i] - self.nu[j]) <= margin:
                    raise GenericityViolation(f"nu_{i} - nu_{j} is an integer")
            for lam in self.eig_n2:
                if abs(self.eig_n1[i] - lam) <= margin:
                    raise GenericityViolation("an eigenvalue of A^(n-1) is also one of A^(n-2)")

    def __hash__(self):
        return hash((self.A.tobytes(), self.q))

    def __eq__(self, other):
        return (isinstance(other, SystemSpec) and self.q == other.q
                and np.array_equal(self.A, other.A))


# -------------------------------------------------------- diagonalization


def _minor(M: np.ndarray, rows, cols) -> complex:
    if len(rows) == 0:
        return 1.0 + 0j
    return complex(np.linalg.det(M[np.ix_(rows, cols)]))


@dataclass(frozen=True)
class DiagonalizedSystem:
    spec: SystemSpec
    P: np.ndarray
    P_inv: np.ndarray
    A_diag: np.ndarray
    a: tuple
    b: tuple

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def q(self) -> float:
        return self.spec.q

    def invariants(self) -> dict:
        """Residuals of P P^-1 = Id, P^-1 A^(n-1) P = diag, and the a_i b_i identity."""
        s, n = self.spec, self.n
        ident = float(np.abs(self.P @ self.P_inv - np.eye(n - 1)).max())
        D = self.P_inv @ s.A[: n - 1, : n - 1] @ self.P
        spectral = float(np.abs(D - np.diag(s.eig_n1)).max())
        ab = 0.0
        for i, li in enumerate(s.eig_n1):
            num = np.prod([x - li for x in s.eig_n])
            den = np.prod([x - li for l, x in enumerate(s.eig_n1) if l != i])
            target = -num / den
            ab = max(ab, abs(self.a[i] * self.b[i] - target) / max(1.0, abs(target)))
        # the minor formulas for a_i, b_i must agree with the conjugated matrix
        border = max(np.abs(self.A_diag[: n - 1, n - 1] - np.array(self.a)).max(),
                     np.abs(self.A_diag[n - 1, : n - 1] - np.array(self.b)).max())
        return {"P_Pinv": ident, "spectral": spectral, "a_b": float(ab), "border": float(border)}


def _normalizer(spec: SystemSpec, j: int) -> complex:
    lj = spec.eig_n1[j]
    v = np.prod([x - lj for l, x in enumerate(spec.eig_n1) if l != j])
    v *= np.prod([x - lj for x in spec.eig_n2]) if spec.eig_n2 else 1.0
    return complex(v)


def build_diagonalized(spec: SystemSpec) -> DiagonalizedSystem:
    n = spec.n
    m = n - 1
    A = spec.A
    P = np.empty((m, m), dtype=complex)
    Pi = np.empty((m, m), dtype=complex)
    a = []
    b = []
    first = list(range(n - 2))
    upper = list(range(m))
    for j, lj in enumerate(spec.eig_n1):
        B = A - lj * np.eye(n)
        norm = _normalizer(spec, j)
        if abs(norm) < GENERICITY_MARGIN:
            raise GenericityViolation("degenerate eigenvalue data, P is singular")
        root = cmath.sqrt(norm)
        for i in range(m):
            cols = [c for c in upper if c != i]
            P[i, j] = (-1) ** (i + j) * _minor(B, first, cols) / root
            Pi[j, i] = (-1) ** (i + j) * _minor(B, cols, first) / root
        a.append((-1) ** (j + n) * _minor(B, upper, first + [n - 1]) / root)
        b.append((-1) ** (j + n) * _minor(B, first + [n - 1], upper) / root)
    T = np.eye(n, dtype=complex)
    Ti = np.eye(n, dtype=complex)
    T[:m, :m] = P
    Ti[:m, :m] = Pi
    Ad = Ti @ A @ T
    for M in (P, Pi, Ad):
        M.setflags(write=False)
    return DiagonalizedSystem(spec, P, Pi, Ad, tuple(complex(x) for x in a),
                              tuple(complex(x) for x in b))


# ------------------------------------------------------------ helpers


def _qp(x: complex, ctx: QContext) -> complex:
    return cmath.exp(complex(x) * ctx.logq)


def _lp(x: complex, ctx: QContext) -> complex:
    """log (q^x; q)_inf."""
    return log_pochhammer(_qp(x, ctx), ctx)


def _lt(w: complex, ctx: QContext) -> complex:
    return log_theta(w, ctx)


def w_variable(dsys: DiagonalizedSystem, z: BranchedPoint, ctx: QContext) -> complex:
    return (1 - ctx.q) * _qp(-dsys.spec.nu[-1], ctx) * z.to_complex()


def overlap_moduli(dsys: DiagonalizedSystem, ctx: QContext) -> tuple:
    """Range of |z| on which both fundamental solutions can be evaluated."""
    scale = abs((1 - ctx.q) * _qp(-dsys.spec.nu[-1], ctx))
    lo, hi = ctx.q / 0.8, RADIUS_MARGIN
    if lo >= hi:
        raise OverlapDomainEmpty(f"q = {ctx.q} leaves no annulus q/0.8 < |w| < {hi}")
    return lo / scale, hi / scale


@dataclass(frozen=True)
class SolutionHandle:
    evaluate: Callable[[BranchedPoint], np.ndarray]
    base: str
    system: DiagonalizedSystem
    direction: SpiralDirection | None = None
    full: bool = False

    def __call__(self, z: BranchedPoint, columns: Sequence[int] | None = None) -> np.ndarray:
        return self.evaluate(z, columns)


def system_residual(handle: SolutionHandle, z: BranchedPoint, ctx: QContext,
                    columns: Sequence[int] | None = None) -> float:
    """max over the chosen columns of |D_q F - (E_nn + A/z) F| / (|D_q F| + |(E_nn + A/z) F|)."""
    dsys = handle.system
    n = dsys.n
    A = dsys.spec.A if handle.full else dsys.A_diag
    cols = list(range(n)) if columns is None else list(columns)
    F0 = handle(z, cols)[:, cols]
    F1 = handle(z.qshift(ctx.q), cols)[:, cols]
    zc = z.to_complex()
    lhs = (F1 - F0) / ((ctx.q - 1) * zc)
    E = np.zeros((n, n), dtype=complex)
    E[-1, -1] = 1.0
    rhs = (E + A / zc) @ F0
    scale = np.abs(lhs) + np.abs(rhs)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(scale.max(axis=0), 1e-300)))


# --------------------------------------------------- solution at the origin


def _h0_params(dsys: DiagonalizedSystem, i: int, j: int, ctx: QContext) -> HypergeometricParams:
    s = dsys.spec
    n = dsys.n
    mu, nu = s.mu, s.nu[: n - 1]
    shift = [1 if (i < n - 1 and l == i) else 0 for l in range(n - 1)]
    upper = [_qp(1 + mu[j] - nu[l] - shift[l], ctx) for l in range(n - 1)] + [0]
    lower = [_qp(1 + mu[j] - mu[l], ctx) for l in range(n) if l != j]
    return HypergeometricParams(upper, lower)


def F0_handle(dsys: DiagonalizedSystem, ctx: QContext) -> SolutionHandle:
    s = dsys.spec
    n = dsys.n
    for j in range(n):
        for l in range(n):
            if l != j and on_spiral(1.0, _qp(1 + s.mu[j] - s.mu[l], ctx), ctx, (None, 0)):
                raise GenericityViolation("resonant exponents at the origin")
    params = [[_h0_params(dsys, i, j, ctx) for j in range(n)] for i in range(n)]

    def evaluate(z: BranchedPoint, columns=None) -> np.ndarray:
        w = w_variable(dsys, z, ctx)
        if abs(w) > RADIUS_MARGIN:
            raise DomainError(f"origin solution needs |w| <= {RADIUS_MARGIN}, got {abs(w):.4g}")
        H = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                v = basic_phi(params[i][j], w, ctx)
                if i < n - 1:
                    v *= dsys.a[i] / (s.eig_n[j] - s.eig_n1[i])
                H[i, j] = v
        powers = np.array([branched_power(z, m) for m in s.mu])
        return H * powers[None, :]

    return SolutionHandle(evaluate, "origin", dsys)


# ------------------------------------------------- solution at infinity


def _check_direction(dsys: DiagonalizedSystem, lam: complex, ctx: QContext):
    for nul in dsys.spec.nu[:-1]:
        guard_spiral(-(1 - ctx.q) * _qp(-nul, ctx), lam, ctx, "lambda on a forbidden spiral")


def _nf_entry_data(dsys: DiagonalizedSystem, i: int, j: int, ctx: QContext):
    """(upper, lower, exponent e) for the resummed entry (i, j), j < n-1.

    The entry is d_ij * nf(upper; lower; lam q^e/(1-q); q^e / ((1-q) z)).
    """
    s = dsys.spec
    n = dsys.n
    mu, nu = s.mu, s.nu
    dij = 1 if i == j else 0
    dni = 1 if i == n - 1 else 0
    upper = [_qp(1 + mu[l] - nu[j] - dij, ctx) for l in range(n)]
    lower = [_qp((1 if l == i else 0) + 1 + nu[l] - nu[j] - dij, ctx)
             for l in range(n - 1) if l != j]
    return upper, lower, nu[j] + dij - dni


def _d_factor(dsys: DiagonalizedSystem, i: int, j: int, zc: complex, ctx: QContext) -> complex:
    n = dsys.n
    if i == j:
        return 1.0 + 0j
    if i == n - 1:
        return -dsys.b[j] / zc
    nu = dsys.spec.nu
    return ctx.q * (1 - ctx.q) * dsys.a[i] * dsys.b[j] / ((_qp(nu[j], ctx) - _qp(1 + nu[i], ctx)) * zc)


def psi_spec(dsys: DiagonalizedSystem, i: int, j: int, ctx: QContext) -> ConfluentEquationSpec:
    """Scalar equation whose exponential-type solution gives the last column."""
    s = dsys.spec
    n = dsys.n
    a = [_qp(1 + s.mu[j] - s.nu[l] - (1 if l == i else 0), ctx) for l in range(n - 1)]
    b = [_qp(1 + s.mu[j] - s.mu[l], ctx) for l in range(n) if l != j]
    return ConfluentEquationSpec(n, a, b)


def psi_coefficients(dsys: DiagonalizedSystem, i: int, ctx: QContext, K: int = 256, j: int = 0):
    """Coefficients of psi_i as a series in 1/w (constant term 1) and its radius in |w|."""
    sp = psi_spec(dsys, i, j, ctx)
    Q = complex(np.prod(sp.a) / np.prod(sp.b))
    c = exponential_series_coefficients(sp.operator(ctx), Q, K, ctx)
    return c, ratio_radius(c)


def Finf_handle(dsys: DiagonalizedSystem, direction, ctx: QContext) -> SolutionHandle:
    d = as_direction(direction)
    lam = d.lam
    _check_direction(dsys, lam, ctx)
    s = dsys.spec
    n = dsys.n
    data = {(i, j): _nf_entry_data(dsys, i, j, ctx) for i in range(n) for j in range(n - 1)}
    psi = [psi_coefficients(dsys, i, ctx) for i in range(n)]

    def column(z: BranchedPoint, j: int) -> np.ndarray:
        zc = z.to_complex()
        out = np.empty(n, dtype=complex)
        if j < n - 1:
            for i in range(n):
                upper, lower, e = data[(i, j)]
                qe = _qp(e, ctx)
                v = nf(upper, lower, lam * qe / (1 - ctx.q), qe / ((1 - ctx.q) * zc), ctx)
                out[i] = _d_factor(dsys, i, j, zc, ctx) * v
            return out * branched_power(z, s.nu[j])
        w = w_variable(dsys, z, ctx)
        guard_spiral(1.0, w, ctx, "w on q^Z", (None, 0))
        denom = pochhammer_infinite(w, ctx)
        for i in range(n):
            c, R = psi[i]
            v = convergent_series_value(c, w, ctx, radius=R)
            if i < n - 1:
                v *= ctx.q * dsys.a[i] / zc
            out[i] = v
        return out * branched_power(z, s.nu[-1]) / denom

    def evaluate(z: BranchedPoint, columns: Sequence[int] | None = None) -> np.ndarray:
        cols = range(n) if columns is None else columns
        F = np.zeros((n, n), dtype=complex)
        for j in cols:
            F[:, j] = column(z, j)
        return F

    handle = SolutionHandle(evaluate, "infinity", dsys, d)
    return handle


def formal_Hhat(dsys: DiagonalizedSystem, K: int, ctx: QContext) -> list:
    """H_0 = Id, H_1, ..., H_K of the formal solution at infinity."""
    n = dsys.n
    q = ctx.q
    s = dsys.spec
    qnu = [_qp(x, ctx) for x in s.nu]
    A = dsys.A_diag
    lam = s.eig_n1
    H = [np.eye(n, dtype=complex)]
    for m in range(K):
        Hm = H[-1]
        R = (Hm - Hm * (np.array(qnu) * q ** (-m))[None, :]) / (1 - q) - A @ Hm
        Hn = np.zeros((n, n), dtype=complex)
        # last column: rows i < n from -H q^{-(m+1)} = R, row n from (1 - q^{-(m+1)}) H = R
        Hn[: n - 1, n - 1] = -(q ** (m + 1)) * R[: n - 1, n - 1]
        Hn[n - 1, n - 1] = R[n - 1, n - 1] / (1 - q ** (-(m + 1)))
        # first n-1 columns: row n from E_nn H = R, then rows i < n from the
        # constraint that the next step's right-hand side vanishes there
        Hn[n - 1, : n - 1] = R[n - 1, : n - 1]
        for j in range(n - 1):
            for i in range(n - 1):
                den = (1 - qnu[j] * q ** (-(m + 1))) / (1 - q) - lam[i]
                if abs(den) < GENERICITY_MARGIN:
                    raise RecursionSingular(f"entry ({i}, {j}) at order {m + 1}")
                Hn[i, j] = A[i, n - 1] * Hn[n - 1, j] / den
        H.append(Hn)
    return H


# ------------------------------------------------------ closed-form matrices


@dataclass(frozen=True)
class QMatrixDatum:
    entries: np.ndarray
    kind: str
    z: BranchedPoint
    lam: SpiralDirection
    mu: SpiralDirection | None = None

    def block_defect(self) -> float:
        """Distance of a Stokes datum from the block form (Id, 0; b, 1)."""
        M = self.entries
        n = M.shape[0]
        return float(max(np.abs(M[: n - 1, : n - 1] - np.eye(n - 1)).max(),
                         np.abs(M[:, n - 1] - np.eye(n)[:, n - 1]).max()))


def _check_z(dsys, z: BranchedPoint, lams, ctx):
    zc = z.to_complex()
    w = w_variable(dsys, z, ctx)
    guard_spiral(1.0, w, ctx, "w on q^Z")
    for lam in lams:
        guard_theta_zero(lam * zc, ctx, "z on -1/lambda q^Z")


def Uq_closed(dsys: DiagonalizedSystem, direction, z: BranchedPoint, ctx: QContext) -> QMatrixDatum:
    d = as_direction(direction)
    lam = d.lam
    _check_direction(dsys, lam, ctx)
    _check_z(dsys, z, [lam], ctx)
    s = dsys.spec
    n = dsys.n
    mu, nu = s.mu, s.nu
    nun = nu[-1]
    zc = z.to_complex()
    x = (1 - ctx.q) * zc
    U = np.empty((n, n), dtype=complex)
    den_theta = _lt(-_qp(-nun, ctx) * x, ctx)
    lam_theta = -sum(_lt((1 - ctx.q) * _qp(1 - nu[l], ctx) / lam, ctx) for l in range(n - 1))
    for j in range(n):
        for i in range(n - 1):
            lg = sum(_lp(1 + mu[j] - nu[l], ctx) for l in range(n - 1) if l != i)
            lg += sum(_lp(1 + nu[i] - mu[l], ctx) for l in range(n) if l != j)
            lg -= sum(_lp(1 + mu[j] - mu[l], ctx) for l in range(n) if l != j)
            lg -= sum(_lp(1 + nu[i] - nu[l], ctx) for l in range(n - 1) if l != i)
            lg += _lt(-_qp(mu[j] - nu[i] - nun, ctx) * x, ctx) - den_theta
            pref = dsys.a[i] / (s.eig_n[j] - s.eig_n1[i])
            U[i, j] = pref * safe_exp(lg, "U entry") * branched_power(z, mu[j] - nu[i])
        lg = sum(_lp(1 + mu[j] - nu[l], ctx) for l in range(n - 1))
        lg -= sum(_lp(1 + mu[j] - mu[l], ctx) for l in range(n) if l != j)
        lg += sum(_lt((1 - ctx.q) * _qp(1 - mu[l], ctx) / lam, ctx) for l in range(n) if l != j)
        lg += lam_theta
        lg += _lt(_qp(mu[j] - nun, ctx) * lam * zc, ctx) - _lt(lam * zc, ctx)
        U[n - 1, j] = safe_exp(lg, "U entry") * branched_power(z, mu[j] - nun)
    return QMatrixDatum(U, "connection", z, d)


def Uq_inverse_closed(dsys: DiagonalizedSystem, direction, z: BranchedPoint,
                      ctx: QContext) -> QMatrixDatum:
    d = as_direction(direction)
    lam = d.lam
    _check_direction(dsys, lam, ctx)
    _check_z(dsys, z, [lam], ctx)
    s = dsys.spec
    n = dsys.n
    mu, nu = s.mu, s.nu
    nun = nu[-1]
    zc = z.to_complex()
    x = (1 - ctx.q) * zc
    V = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n - 1):
            lg = sum(_lp(1 + mu[l] - nu[j], ctx) for l in range(n) if l != i)
            lg += sum(_lp(nu[l] - mu[i], ctx) for l in range(n - 1) if l != j)
            lg -= sum(_lp(1 + nu[l] - nu[j], ctx) for l in range(n - 1) if l != j)
            lg -= sum(_lp(mu[l] - mu[i], ctx) for l in range(n) if l != i)
            lg += _lt(lam * zc / _qp(1 + mu[i] - nu[j], ctx), ctx) - _lt(lam * zc, ctx)
            lg += _lt(lam * _qp(mu[i], ctx) / (1 - ctx.q), ctx)
            lg -= _lt(lam * _qp(nu[j] - 1, ctx) / (1 - ctx.q), ctx)
            V[i, j] = -dsys.b[j] * safe_exp(lg, "U^-1 entry") * branched_power(z, nu[j] - mu[i] - 1)
        lg = sum(_lp(nu[l] - mu[i], ctx) for l in range(n - 1))
        lg -= sum(_lp(mu[l] - mu[i], ctx) for l in range(n) if l != i)
        lg += _lt(-_qp(1 + mu[i], ctx) / x, ctx) - _lt(-_qp(-nun, ctx) * x, ctx)
        V[i, n - 1] = safe_exp(lg, "U^-1 entry") * branched_power(z, nun - mu[i])
    return QMatrixDatum(V, "connection-inverse", z, d)


def _solve(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """X with F X = G by LU with partial pivoting."""
    if np.linalg.cond(F) > 1e14:
        raise SingularSolution("fundamental matrix is numerically singular")
    return np.linalg.solve(F, G)


def Uq_numeric(dsys: DiagonalizedSystem, direction, z: BranchedPoint, ctx: QContext) -> QMatrixDatum:
    d = as_direction(direction)
    Finf = Finf_handle(dsys, d, ctx)(z)
    F0 = F0_handle(dsys, ctx)(z)
    return QMatrixDatum(_solve(Finf, F0), "connection", z, d)


def stokes_b(dsys: DiagonalizedSystem, lam: complex, mu_dir: complex, z: BranchedPoint,
             ctx: QContext) -> np.ndarray:
    """The last-row entries of the diagonalized Stokes matrix, summed term by term."""
    s = dsys.spec
    n = dsys.n
    mu, nu = s.mu, s.nu
    nun = nu[-1]
    zc = z.to_complex()
    out = np.zeros(n - 1, dtype=complex)
    lam_theta = -sum(_lt((1 - ctx.q) * _qp(1 - nu[l], ctx) / lam, ctx) for l in range(n - 1))
    for j in range(n - 1):
        acc = 0j
        for k in range(n):
            lg = sum(_lp(1 + mu[k] - nu[l], ctx) for l in range(n - 1))
            lg -= sum(_lp(1 + mu[k] - mu[l], ctx) for l in range(n) if l != k)
            lg += sum(_lp(1 + mu[l] - nu[j], ctx) for l in range(n) if l != k)
            lg += sum(_lp(nu[l] - mu[k], ctx) for l in range(n - 1) if l != j)
            lg -= sum(_lp(1 + nu[l] - nu[j], ctx) for l in range(n - 1) if l != j)
            lg -= sum(_lp(mu[l] - mu[k], ctx) for l in range(n) if l != k)
            lg += sum(_lt((1 - ctx.q) * _qp(1 - mu[l], ctx) / lam, ctx) for l in range(n) if l != k)
            lg += lam_theta
            lg += _lt(_qp(mu[k] - nun, ctx) * lam * zc, ctx) - _lt(lam * zc, ctx)
            lg += _lt(_qp(nu[j] - mu[k] - 1, ctx) * mu_dir * zc, ctx) - _lt(mu_dir * zc, ctx)
            lg += _lt(mu_dir * _qp(mu[k], ctx) / (1 - ctx.q), ctx)
            lg -= _lt(mu_dir * _qp(nu[j] - 1, ctx) / (1 - ctx.q), ctx)
            acc += safe_exp(lg, "Stokes term")
        out[j] = -dsys.b[j] * acc * branched_power(z, nu[j] - nun - 1)
    return out


def _check_pair(dsys, lam, mu_dir, ctx):
    _check_direction(dsys, lam, ctx)
    _check_direction(dsys, mu_dir, ctx)
    if on_spiral(lam, mu_dir, ctx):
        raise DomainError("mu lies on the spiral of lambda")


def Sq_closed(dsys: DiagonalizedSystem, lam, mu, z: BranchedPoint, ctx: QContext) -> QMatrixDatum:
    dl, dm = as_direction(lam), as_direction(mu)
    _check_pair(dsys, dl.lam, dm.lam, ctx)
    zc = z.to_complex()
    guard_spiral(1.0, w_variable(dsys, z, ctx), ctx, "w on q^Z")
    guard_theta_zero(dl.lam * zc, ctx, "z on -1/lambda q^Z")
    guard_theta_zero(dm.lam * zc, ctx, "z on -1/mu q^Z")
    n = dsys.n
    S = np.eye(n, dtype=complex)
    S[n - 1, : n - 1] = stokes_b(dsys, dl.lam, dm.lam, z, ctx)
    return QMatrixDatum(S, "stokes", z, dl, dm)


def Sq_numeric(dsys: DiagonalizedSystem, lam, mu, z: BranchedPoint, ctx: QContext) -> QMatrixDatum:
    dl, dm = as_direction(lam), as_direction(mu)
    _check_pair(dsys, dl.lam, dm.lam, ctx)
    F_l = Finf_handle(dsys, dl, ctx)(z)
    F_m = Finf_handle(dsys, dm, ctx)(z)
    return QMatrixDatum(_solve(F_l, F_m), "stokes", z, dl, dm)


# ------------------------------------------------------------ full system


def _embed(M: np.ndarray) -> np.ndarray:
    m = M.shape[0]
    T = np.eye(m + 1, dtype=complex)
    T[:m, :m] = M
    return T


def transport_to_full(dsys: DiagonalizedSystem, obj):
    """Carry a solution handle or matrix datum of the diagonalized system over to A."""
    T, Ti = _embed(dsys.P), _embed(dsys.P_inv)
    if isinstance(obj, SolutionHandle):
        if obj.base == "origin":
            def ev(z, columns=None, f=obj.evaluate):
                return T @ f(z, columns)
        else:
            # right multiplication by diag(P^-1, 1) mixes the first n-1 columns
            def ev(z, columns=None, f=obj.evaluate, n=dsys.n):
                if columns is not None:
                    cols = set(columns)
                    if cols & set(range(n - 1)):
                        cols |= set(range(n - 1))
                    columns = sorted(cols)
                return T @ f(z, columns) @ Ti
        return SolutionHandle(ev, obj.base, dsys, obj.direction, full=True)
    if isinstance(obj, QMatrixDatum):
        if obj.kind == "stokes":
            M = T @ obj.entries @ Ti
        elif obj.kind == "connection":
            M = T @ obj.entries
        elif obj.kind == "connection-inverse":
            M = obj.entries @ Ti
        else:
            raise DomainError(f"cannot transport a datum of kind {obj.kind!r}")
        return QMatrixDatum(M, obj.kind, obj.z, obj.lam, obj.mu)
    raise DomainError(f"cannot transport {type(obj).__name__}")


def full_stokes_b(spec: SystemSpec, lam, mu, z: BranchedPoint, ctx: QContext) -> np.ndarray:
    """Last row of the full Stokes matrix from the minor-weighted sums over j."""
    dsys = build_diagonalized(spec)
    n = spec.n
    dl, dm = as_direction(lam), as_direction(mu)
    _check_pair(dsys, dl.lam, dm.lam, ctx)
    inner = stokes_b(dsys, dl.lam, dm.lam, z, ctx) / -np.array(dsys.b)
    A = spec.A
    upper = list(range(n - 1))
    first = list(range(n - 2))
    out = np.zeros(n - 1, dtype=complex)
    for k in range(n - 1):
        acc = 0j
        for j, lj in enumerate(spec.eig_n1):
            B = A - lj * np.eye(n)
            num = _minor(B, first + [n - 1], upper) * _minor(B, [r for r in upper if r != k], first)
            acc += (-1) ** (n + k + 1) * num / _normalizer(spec, j) * inner[j]
        out[k] = acc
    return out
