"""Complex plumbing and the basic q-special functions.

Everything here is a pure function of its arguments.  Products and theta
values are also exposed in logarithmic form, because close to q = 1 the
individual factors over- or underflow double precision long before the
ratios that the connection formulas need.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import (
    DomainError,
    NonFiniteError,
    PoleError,
    PoleProximity,
    TruncationBudgetExceeded,
)

log = logging.getLogger(__name__)

_NEG_INF = complex(-math.inf, 0.0)


@dataclass(frozen=True)
class QContext:
    """Base q together with the truncation policy used by every evaluator."""

    q: float
    tol: float = 1e-16
    max_product_terms: int = 400_000
    max_series_terms: int = 20_000
    max_bilateral_terms: int = 4_000
    spiral_margin: float = 1e-7

    def __post_init__(self):
        q = self.q
        if not (0.0 < q < 1.0):
            raise DomainError(f"q must lie in (0, 1), got {q!r}")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        for name in ("max_product_terms", "max_series_terms", "max_bilateral_terms"):
            if getattr(self, name) < 16:
                raise DomainError(f"{name} must be at least 16")
        if not (0.0 < self.spiral_margin < (1.0 - q) / 2):
            raise DomainError(
                f"spiral_margin must lie in (0, (1-q)/2) = (0, {(1 - q) / 2:g})"
            )

    def with_q(self, q: float) -> "QContext":
        margin = min(self.spiral_margin, (1.0 - q) / 4)
        return replace(self, q=q, spiral_margin=margin)

    @property
    def logq(self) -> float:
        return math.log(self.q)


@dataclass(frozen=True)
class BranchedPoint:
    """A nonzero complex number together with a chosen value of its argument."""

    modulus: float
    argument: float

    def __post_init__(self):
        if not (self.modulus > 0 and math.isfinite(self.modulus)):
            raise DomainError("a branched point needs a positive finite modulus")
        if not math.isfinite(self.argument):
            raise DomainError("argument must be finite")

    @classmethod
    def from_complex(cls, z: complex) -> "BranchedPoint":
        z = complex(z)
        if z == 0:
            raise DomainError("z = 0 has no branch")
        return cls(abs(z), cmath.phase(z))

    def to_complex(self) -> complex:
        return cmath.rect(self.modulus, self.argument)

    def principal_branch(self) -> "BranchedPoint":
        a = math.remainder(self.argument, 2 * math.pi)
        if a <= -math.pi:
            a += 2 * math.pi
        return BranchedPoint(self.modulus, a)

    def log(self) -> complex:
        return complex(math.log(self.modulus), self.argument)

    def scaled(self, c: float) -> "BranchedPoint":
        """Multiply by a positive real number, keeping the sheet."""
        return BranchedPoint(self.modulus * c, self.argument)

    def times(self, w: complex) -> "BranchedPoint":
        """Multiply by ``w`` with its principal argument added to ours."""
        w = complex(w)
        return BranchedPoint(self.modulus * abs(w), self.argument + cmath.phase(w))

    def qshift(self, q: float, k: int = 1) -> "BranchedPoint":
        return BranchedPoint(self.modulus * q**k, self.argument)


def as_point(z) -> BranchedPoint:
    return z if isinstance(z, BranchedPoint) else BranchedPoint.from_complex(z)


def finite(x: complex, what: str = "value") -> complex:
    x = complex(x)
    if not (math.isfinite(x.real) and math.isfinite(x.imag)):
        raise NonFiniteError(f"{what} is not finite")
    return x


def safe_exp(w: complex, what: str = "value") -> complex:
    """exp(w), raising instead of returning inf/nan."""
    w = complex(w)
    if w.real == -math.inf:
        return 0j
    if w.real > 709.0:
        raise NonFiniteError(f"{what} overflows double precision")
    return finite(cmath.exp(w), what)


@lru_cache(maxsize=64)
def _qpowers(q: float, size: int) -> np.ndarray:
    p = q ** np.arange(size, dtype=float)
    p.setflags(write=False)
    return p


def _bucket(n: int) -> int:
    return 1 << max(4, int(n - 1).bit_length())


# ---------------------------------------------------------------- products


def pochhammer_finite(a: complex, n: int, ctx: QContext) -> complex:
    if n < 0:
        raise DomainError("finite Pochhammer symbol needs n >= 0")
    if n == 0:
        return 1 + 0j
    f = 1.0 - complex(a) * _qpowers(ctx.q, _bucket(n))[:n]
    return finite(np.prod(f), "(a;q)_n")


def _product_length(absa: float, ctx: QContext) -> int:
    # smallest L with exp(|a| q^L / (1-q)) - 1 <= tol
    if absa == 0.0:
        return 0
    target = math.log1p(ctx.tol) * (1.0 - ctx.q) / absa
    if target >= 1.0:
        return 1
    L = math.ceil(math.log(target) / ctx.logq) + 1
    if L > ctx.max_product_terms:
        raise TruncationBudgetExceeded(
            f"(a;q)_inf with |a|={absa:g}, q={ctx.q} needs {L} factors"
        )
    return L


def log_pochhammer(a: complex, ctx: QContext) -> complex:
    """Sum of principal logarithms of the factors of (a;q)_inf.

    The imaginary part is a valid logarithm of the product, not the
    principal one.  Returns -inf when a factor vanishes exactly.
    """
    a = complex(a)
    L = _product_length(abs(a), ctx)
    if L == 0:
        return 0j
    x = a * _qpowers(ctx.q, _bucket(L))[:L]
    one_minus = 1.0 - x
    if np.any(one_minus == 0):
        return _NEG_INF
    s = np.sum(np.log1p(-x))
    return complex(s)


def pochhammer_infinite(a: complex, ctx: QContext) -> complex:
    return safe_exp(log_pochhammer(a, ctx), "(a;q)_inf")


def log_pochhammer_multi(values, ctx: QContext) -> complex:
    return sum((log_pochhammer(v, ctx) for v in values), 0j)


def pochhammer_multi(values, ctx: QContext) -> complex:
    return safe_exp(log_pochhammer_multi(values, ctx), "(a_1,...,a_m;q)_inf")


# ------------------------------------------------------------------- theta


def _theta_split(z: complex, ctx: QContext):
    """Return (log prefactor, annulus value) with theta(z) = exp(pref) * value."""
    z = complex(z)
    if z == 0:
        raise DomainError("theta_q is not defined at z = 0")
    lq = ctx.logq
    lmod = math.log(abs(z))
    n = round(lmod / lq)
    arg = cmath.phase(z)
    lw = complex(lmod - n * lq, arg)
    K = 3 + math.ceil(math.sqrt(1.0 + 2.0 * math.log(ctx.tol) / lq))
    if 2 * K + 1 > ctx.max_bilateral_terms:
        raise TruncationBudgetExceeded(f"theta_q at q={ctx.q} needs {2 * K + 1} terms")
    k = np.arange(-K, K + 1, dtype=float)
    terms = np.exp(0.5 * k * (k - 1.0) * lq + k * lw)
    val = complex(np.sum(terms))
    pref = -n * lw - 0.5 * n * (n - 1) * lq
    return pref, val


# The direct sum loses about arg(z)^2 / (2 |log q|) nats to cancellation
# (a factor 1e3 at q = 0.5, total loss by q = 0.9).  The Poisson-summed
# form has no such loss and converges fast unless q is tiny.
MODULAR_THETA_Q = 0.05


def _log_theta_modular(z: complex, ctx: QContext) -> complex:
    """log theta_q(z) from sum_k exp(-t k(k-1)/2 + k w) = sqrt(2 pi/t) sum_m exp((b - 2 pi i m)^2 / (2t)),
    with q = e^-t, w = log z (principal) and b = w + t/2."""
    z = complex(z)
    if z == 0:
        raise DomainError("theta_q is not defined at z = 0")
    t = -ctx.logq
    b = cmath.log(z) + t / 2
    lead = 0.5 * math.log(2 * math.pi / t) + b * b / (2 * t)
    acc = 1 + 0j
    for m in (1, -1, 2, -2, 3, -3, 4, -4, 5, -5):
        e = (-4j * math.pi * m * b - 4 * math.pi**2 * m * m) / (2 * t)
        if e.real > -745:
            acc += cmath.exp(e)
    if abs(acc) < 1e-300:
        return _NEG_INF
    return lead + cmath.log(acc)


def theta(z: complex, ctx: QContext) -> complex:
    if ctx.q > MODULAR_THETA_Q:
        return safe_exp(log_theta(z, ctx), "theta_q")
    pref, val = _theta_split(z, ctx)
    return safe_exp(pref, "theta_q") * val if val != 0 else 0j


def log_theta(z: complex, ctx: QContext) -> complex:
    if ctx.q > MODULAR_THETA_Q:
        return _log_theta_modular(z, ctx)
    pref, val = _theta_split(z, ctx)
    if val == 0:
        return _NEG_INF
    return pref + cmath.log(val)


# ------------------------------------------------------- spirals and poles


def on_spiral(lam: complex, w: complex, ctx: QContext, n_range=None) -> bool:
    """True iff w lies within spiral_margin (relative) of {lam q^n}.

    ``n_range`` optionally restricts n to an inclusive (low, high) window;
    ``None`` on either side leaves it open.
    """
    lam, w = complex(lam), complex(w)
    if lam == 0 or w == 0:
        raise DomainError("on_spiral needs nonzero arguments")
    r = w / lam
    n0 = round(math.log(abs(r)) / ctx.logq)
    lo, hi = (None, None) if n_range is None else n_range
    for n in range(n0 - 2, n0 + 3):
        if lo is not None and n < lo:
            continue
        if hi is not None and n > hi:
            continue
        if abs(r * ctx.q ** (-n) - 1.0) < ctx.spiral_margin:
            return True
    return False


def guard_spiral(lam: complex, w: complex, ctx: QContext, what: str, n_range=None):
    if complex(w) == 0:
        raise PoleProximity(f"{what}: argument is zero")
    if on_spiral(lam, w, ctx, n_range):
        raise PoleProximity(f"{what}: {complex(w)!r} lies on the spiral {complex(lam)!r}*q^Z")


def guard_theta_zero(w: complex, ctx: QContext, what: str):
    """theta_q vanishes exactly on -q^Z."""
    guard_spiral(-1.0, w, ctx, what)


# --------------------------------------------------------- e_q and Gamma_q


def q_exponential(z: complex, ctx: QContext) -> complex:
    x = (1.0 - ctx.q) * complex(z)
    if x != 0 and on_spiral(1.0, x, ctx, (None, 0)):
        raise PoleError(f"e_q has a pole at z = {complex(z)!r}")
    return safe_exp(-log_pochhammer(x, ctx), "e_q")


def q_exponential_taylor(z: complex, ctx: QContext) -> complex:
    """Taylor form sum (1-q)^k z^k / (q;q)_k, valid for |(1-q) z| < 1."""
    x = (1.0 - ctx.q) * complex(z)
    if abs(x) >= 1:
        raise DomainError("Taylor form of e_q needs |(1-q) z| < 1")
    total, term, k = 1 + 0j, 1 + 0j, 0
    small = 0
    while k < ctx.max_series_terms:
        term *= x / (1.0 - ctx.q ** (k + 1))
        k += 1
        total += term
        small = small + 1 if abs(term) < ctx.tol * max(1.0, abs(total)) else 0
        if small >= 2 and k >= 8:
            return total
    raise TruncationBudgetExceeded("e_q Taylor series")


def log_q_gamma(z: complex, ctx: QContext) -> complex:
    z = complex(z)
    qz = cmath.exp(z * ctx.logq)
    if on_spiral(1.0, qz, ctx, (None, 0)):
        raise PoleError(f"Gamma_q has a pole at z = {z!r}")
    lq = log_pochhammer(ctx.q, ctx) - log_pochhammer(qz, ctx)
    return lq + (1.0 - z) * math.log(1.0 - ctx.q)


def q_gamma(z: complex, ctx: QContext) -> complex:
    return safe_exp(log_q_gamma(z, ctx), "Gamma_q")


# -------------------------------------------------------------- logarithms


def log_q(w: complex, ctx: QContext) -> complex:
    w = complex(w)
    if w == 0:
        raise DomainError("log_q(0) is undefined")
    return cmath.log(w) / ctx.logq


def branched_power(z: BranchedPoint, alpha: complex) -> complex:
    return finite(cmath.exp(complex(alpha) * z.log()), "z^alpha")
