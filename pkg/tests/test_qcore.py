import cmath
import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsf.errors import DomainError, PoleError
from qsf.qcore import (
    BranchedPoint,
    QContext,
    log_theta,
    pochhammer_finite,
    pochhammer_infinite,
    q_exponential,
    q_exponential_taylor,
    q_gamma,
    theta,
)

mp.mp.dps = 40


def mp_theta(z, q):
    """Triple product at 40 digits, used as the reference value."""
    z, q = mp.mpc(z), mp.mpf(q)
    return complex(mp.qp(q, q) * mp.qp(-z, q) * mp.qp(-q / z, q))


def rel(x, y):
    return abs(x - y) / max(1.0, abs(y))


@pytest.mark.parametrize("q", [0.1, 0.3, 0.5, 0.7])
@pytest.mark.parametrize("z", [0.4 + 0.3j, -2.5 + 1j, 7.0, 0.05j])
def test_theta_against_mpmath(q, z):
    assert rel(theta(z, QContext(q)), mp_theta(z, q)) < 1e-12


def test_theta_near_one_against_high_precision_sum():
    # the bilateral sum cancels badly here; compare with a 500 digit direct sum
    q, z = 0.99, 0.8 + 0.9j
    with mp.workdps(500):
        qq, zz = mp.mpf(q), mp.mpc(z)
        ref = mp.fsum(qq ** (k * (k - 1) // 2) * zz**k for k in range(-1500, 1500))
        ref = complex(ref)
    assert abs(theta(z, QContext(q)) - ref) / abs(ref) < 1e-10


@pytest.mark.parametrize("a", [0.3, -0.8 + 0.2j, 2.0 + 1.0j])
def test_pochhammer_against_mpmath(a):
    q = 0.6
    ctx = QContext(q)
    assert rel(pochhammer_infinite(a, ctx), complex(mp.qp(a, q))) < 1e-13
    assert rel(pochhammer_finite(a, 7, ctx), complex(mp.qp(a, q, 7))) < 1e-13


@pytest.mark.parametrize("z", [0.5, 2.3, 1.2 + 0.7j])
def test_q_gamma_against_mpmath(z):
    q = 0.45
    assert rel(q_gamma(z, QContext(q)), complex(mp.qgamma(z, q))) < 1e-12


def test_q_exponential_forms_agree():
    ctx = QContext(0.5)
    for z in (0.3, -1.1 + 0.4j, 1.5j):
        assert rel(q_exponential(z, ctx), q_exponential_taylor(z, ctx)) < 1e-13


def test_guards():
    ctx = QContext(0.5)
    with pytest.raises(DomainError):
        QContext(1.0)
    with pytest.raises(PoleError):
        q_exponential(1 / (1 - 0.5) * 0.5**-2, ctx)
    with pytest.raises(DomainError):
        q_exponential_taylor(10.0, ctx)
    with pytest.raises(DomainError):
        BranchedPoint(0.0, 1.0)


def test_branched_point_roundtrip():
    z = BranchedPoint(2.0, 7.0)
    assert z.principal_branch().argument == pytest.approx(7.0 - 2 * math.pi)
    assert abs(z.to_complex() - cmath.rect(2.0, 7.0)) < 1e-15
    assert z.qshift(0.5, 2).modulus == 0.5


moduli = st.floats(0.05, 20.0)
phases = st.floats(-math.pi, math.pi)
qs = st.sampled_from([0.2, 0.5, 0.8, 0.95])


@settings(max_examples=60, deadline=None)
@given(r=moduli, t=phases, q=qs)
def test_theta_functional_equations(r, t, q):
    ctx = QContext(q)
    z = cmath.rect(r, t)
    lt = log_theta(z, ctx)
    # both identities are checked in log form so large values are fine
    assert abs(cmath.exp(log_theta(q * z, ctx) + cmath.log(z) - lt) - 1) < 1e-9
    assert abs(cmath.exp(log_theta(1 / z, ctx) + cmath.log(z) - lt) - 1) < 1e-9


@settings(max_examples=40, deadline=None)
@given(a=st.complex_numbers(max_magnitude=3.0), n=st.integers(0, 30), m=st.integers(0, 30))
def test_finite_pochhammer_splits(a, n, m):
    ctx = QContext(0.6)
    lhs = pochhammer_finite(a, n + m, ctx)
    rhs = pochhammer_finite(a, n, ctx) * pochhammer_finite(a * 0.6**n, m, ctx)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
