import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from qsf.errors import DomainError, OutsideRadius
from qsf.qcore import BranchedPoint, QContext
from qsf.qseries import ConfluentEquationSpec, FormalPowerSeries, q_difference_residual
from qsf.resummation import (
    exponential_solution_value,
    f_infinity_basis,
    gevrey_check,
    nf,
    nf_by_laplace,
    nf_formal_series,
    nf_operator,
    q_borel,
    q_laplace,
)

A2 = [0.6 + 0.3j, -0.9 + 0.2j]
A3, B3 = [0.7 + 0.1j, -0.5 + 0.6j, 1.2j], [0.8 - 0.3j]


def rel(x, y):
    return abs(x - y) / max(1.0, abs(y))


def mp_nf(a, b, lam, z, q, dps=40):
    """Connection-side expansion of nf summed in mpmath, written from scratch."""
    with mp.workdps(dps):
        a = [mp.mpc(x) for x in a]
        b = [mp.mpc(x) for x in b]
        lam, z, q = mp.mpc(lam), mp.mpc(z), mp.mpf(q)

        def th(x):
            return mp.qp(-x, q) * mp.qp(-q / x, q) * mp.qp(q, q)

        def phi(up, lo, w):
            # r = s + 1 series, no extra sign factor
            tot, term = mp.mpf(0), mp.mpf(1)
            for k in range(3000):
                tot += term
                num = mp.fprod([1 - x * q**k for x in up])
                den = (1 - q ** (k + 1)) * mp.fprod([1 - x * q**k for x in lo])
                term *= num / den * w
                if k > 10 and abs(term) < mp.mpf(10) ** (-dps + 5) * abs(tot):
                    break
            return tot

        inner = q * mp.fprod(b) / (z * mp.fprod(a))
        total = 0
        for k, ak in enumerate(a):
            oth = [x for j, x in enumerate(a) if j != k]
            c = mp.fprod([mp.qp(x, q) for x in oth]) * mp.fprod([mp.qp(bl / ak, q) for bl in b])
            c /= mp.fprod([mp.qp(bl, q) for bl in b]) * mp.fprod([mp.qp(x / ak, q) for x in oth])
            c *= th(q * ak * z / lam) * th(ak * lam) / (th(q * z / lam) * th(lam))
            total += c * phi([ak] + [ak * q / bl for bl in b], [ak * q / x for x in oth], inner)
        return complex(total)


@pytest.mark.parametrize("a,b,lam,z", [
    (A2, [], 1.3 + 0.4j, 2.0 - 1.0j),
    (A3, B3, 0.8 - 0.6j, 1.5 + 2.5j),
])
def test_nf_against_mpmath_oracle(a, b, lam, z):
    q = 0.5
    assert rel(nf(a, b, lam, z, QContext(q)), mp_nf(a, b, lam, z, q)) < 1e-11


def test_laplace_route_near_zero():
    # the connection expansion needs large z, the truncated Laplace sum small z;
    # near 0 check the Laplace route on its own: spiral independence and the equation
    ctx = QContext(0.5)
    lam, z = 1.3 + 0.4j, BranchedPoint(2e-3, 0.5)
    v = nf_by_laplace(A2, [], lam, z.to_complex(), ctx)
    assert rel(nf_by_laplace(A2, [], lam * 0.5**3, z.to_complex(), ctx), v) < 1e-12
    op = nf_operator(A2, [], ctx)
    assert q_difference_residual(lambda p: nf_by_laplace(A2, [], lam, p.to_complex(), ctx),
                                 op, z, ctx) < 1e-10


@pytest.mark.parametrize("k", [-2, 1, 3])
def test_nf_depends_on_the_spiral_only(k):
    ctx = QContext(0.4)
    lam, z = 0.9 + 0.5j, 1.7 - 0.8j
    assert rel(nf(A3, B3, lam * 0.4**k, z, ctx), nf(A3, B3, lam, z, ctx)) < 1e-10


def test_nf_solves_its_equation():
    ctx = QContext(0.5)
    op = nf_operator(A3, B3, ctx)
    z = BranchedPoint(8.0, 0.6)
    assert q_difference_residual(lambda p: nf(A3, B3, 1.1j, p.to_complex(), ctx), op, z, ctx) < 1e-10


def test_nf_is_asymptotic_to_its_series():
    ctx = QContext(0.5)
    lam = 1.3 + 0.4j
    formal = nf_formal_series(A2, [], 12, ctx)
    zs = [2e-3 * 0.8**k * cmath.exp(0.3j) for k in range(8)]
    fit = gevrey_check(lambda z: nf_by_laplace(A2, [], lam, z, ctx), formal, zs, ctx,
                       orders=range(1, 5))
    assert fit.passed


def test_laplace_of_borel_is_identity_on_convergent_series():
    ctx = QContext(0.5)
    x = 0.6 + 0.2j
    co = np.array([x**k / (k + 1) for k in range(400)])
    B = q_borel(FormalPowerSeries("z", co, "log"), 0.5)
    for z in (0.3 + 0.2j, -0.4j, 0.7):
        got = q_laplace(lambda xi: B.log_evaluate(xi, ctx), 1.3 + 0.4j, z, ctx,
                        variable="z", log_form=True)
        assert rel(got, -cmath.log(1 - x * z) / (x * z)) < 1e-12


def test_plain_and_log_form_laplace_agree():
    ctx = QContext(0.5)
    co = np.array([0.5**k for k in range(200)])
    B = q_borel(FormalPowerSeries("z", co, "geom"), 0.5)
    z = 0.25 + 0.1j
    plain = q_laplace(lambda xi: B.evaluate(xi, ctx), 1.2, z, ctx, variable="z")
    logged = q_laplace(lambda xi: B.log_evaluate(xi, ctx), 1.2, z, ctx, variable="z", log_form=True)
    assert rel(plain, logged) < 1e-13


def test_infinity_basis_solves_confluent_equation():
    q = 0.5
    ctx = QContext(q)
    spec = ConfluentEquationSpec(3, A3[:2], [0.8 - 0.3j, 1.4])
    # nf columns need small |z|, the exponential column needs |z| past its radius
    for i, r in ((0, 0.05), (1, 0.05), (2, 60.0)):
        z = BranchedPoint(r, 1.3)
        res = q_difference_residual(lambda p, i=i: f_infinity_basis(spec, 1.1j, i, p, ctx), spec, z, ctx)
        assert res < 1e-10


def test_guards():
    ctx = QContext(0.5)
    with pytest.raises(DomainError):
        nf([0.5], [], 1.0, 1.0, ctx)
    with pytest.raises(OutsideRadius):
        nf(A2, [], 1.3, 1e-3, ctx)
    spec = ConfluentEquationSpec(2, [0.5], [0.7])
    with pytest.raises(OutsideRadius):
        exponential_solution_value(spec, 1e-4, ctx)
    with pytest.raises(DomainError):
        nf([0.5, 0.5 * 0.5**2], [], 1.3, 2.0, ctx)   # a_1 / a_2 in q^Z
