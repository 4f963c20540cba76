import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsf import classical as cl
from qsf.errors import DomainError, GenericityViolation, WindowViolation
from qsf.qcore import BranchedPoint
from qsf.suites import QLIMIT_STOKES, draw_classical_equation, draw_classical_system

mp.mp.dps = 30


@settings(max_examples=80, deadline=None)
@given(st.complex_numbers(max_magnitude=30.0).filter(
    lambda z: abs(z - round(z.real)) > 1e-3 or z.real > 0.5))
def test_gamma_against_mpmath(z):
    ref = complex(mp.loggamma(z))
    got = cl.log_gamma(z)
    # compare modulo 2 pi i, the branch of log Gamma is not part of the contract
    d = got - ref
    assert abs(d.real) < 1e-12 * max(1.0, abs(ref))
    assert abs(math.remainder(d.imag, 2 * math.pi)) < 1e-11 * max(1.0, abs(ref))


def test_gamma_ratio_and_poles():
    assert abs(cl.gamma_ratio([0.5, 0.5], [1.0]) - math.pi) < 1e-14
    with pytest.raises(DomainError):
        cl.gamma(-2.0)


def test_parameter_map_roundtrip():
    a, b = cl.q_parameter_map([0.3 + 0.1j], [1.7], 0.9)
    assert abs(cl.alpha_from_a(a[0], 0.9) - (0.3 + 0.1j)) < 1e-12


def test_two_term_solution_at_infinity_is_tricomi_u():
    """For n = 2 the recessive solution is Gamma(1 + alpha - beta) U(alpha, beta, z) up to sign conventions."""
    spec = cl.ClassicalEquationSpec(2, [0.3 + 0.1j], [1.7 - 0.2j])
    al, be = spec.alpha[0], spec.beta[0]
    for arg in (0.2, 1.0):
        z = BranchedPoint(2.5, arg)
        got = cl.f_infinity(spec, 0, z, 1)
        ref = complex(mp.hyperu(al, be, z.to_complex()))
        assert abs(got - ref) < 1e-12 * abs(ref)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("sign", [1, -1])
def test_connection_formula(n, sign):
    rng = np.random.default_rng(n)
    for _ in range(3):
        spec = draw_classical_equation(rng, n)
        z = BranchedPoint(rng.uniform(0.5, 5), 0.4 * sign)
        assert cl.classical_connection_check(spec, z, sign) < 1e-8


@pytest.mark.parametrize("n", [2, 3])
def test_solutions_solve_differential_equation(n):
    spec = draw_classical_equation(np.random.default_rng(10 + n), n)
    z = BranchedPoint(2.0, 0.5)
    assert cl.equation_residual(spec, lambda p: cl.f_origin(spec, p), z) < 1e-6
    for i in range(n):
        assert cl.equation_residual(spec, lambda p, i=i: cl.f_infinity(spec, i, p, 1), z) < 1e-6


def test_algebraic_solutions_follow_their_asymptotics():
    spec = cl.ClassicalEquationSpec(3, [0.3 + 0.1j, -0.4 + 0.2j], [1.7, 0.6 + 0.3j])
    errs = []
    for R in (10.0, 20.0, 40.0):
        z = BranchedPoint(R, 0.4)
        errs.append(abs(cl.h_infinity(spec, 0, z, 1) - cl.asymptotic_h(spec, 0, z.to_complex(), 3)))
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("R", [12.0, 40.0, 90.0])
def test_far_field_against_high_precision_residue_sum(R):
    """Past |z| ~ 30 the residue sum cancels e^Re(z) in double precision."""
    spec = cl.ClassicalEquationSpec(3, [0.3 + 0.1j, -0.4 + 0.2j], [1.7, 0.6 + 0.3j])
    z = BranchedPoint(R, 0.4)
    with mp.workdps(120):
        al = [mp.mpc(x) for x in spec.alpha]
        bf = [mp.mpc(x) for x in spec.beta_full]
        zz = mp.mpf(R) * mp.expj(0.4)
        ref = 0
        for k, bk in enumerate(bf):
            ob = [x for j, x in enumerate(bf) if j != k]
            c = mp.gammaprod([1 + al[0] - al[1]] + [bk - x for x in ob],
                             [1 + al[0] - x for x in ob] + [bk - al[1]])
            ref += c * zz ** (1 - bk) * mp.hyper([1 + a - bk for a in al], [1 + b - bk for b in ob], zz)
        ref = complex(ref)
    assert abs(cl.f_infinity(spec, 0, z, 1) - ref) < 1e-13 * abs(ref)


def test_exponential_solution_outside_sector():
    spec = cl.ClassicalEquationSpec(2, [0.3], [1.7])
    with pytest.raises(WindowViolation):
        cl.f_infinity(spec, 1, BranchedPoint(2.0, 1.6 * math.pi), 1)


def test_integer_resonance_rejected():
    with pytest.raises(GenericityViolation):
        cl.ClassicalEquationSpec(3, [0.3, 1.3], [1.7, 0.6])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_stokes_and_connection_matrices(n):
    s = draw_classical_system(np.random.default_rng(n), n)
    assert cl.stokes_consistency(s) < 1e-8
    num = cl.numeric_U_minus_inverse(s, BranchedPoint(1.2, 0.3))
    closed = cl.classical_U_minus_inverse(s)
    assert np.abs(num - closed).max() / max(1, np.abs(closed).max()) < 1e-8
    # both connection matrices share their last row
    assert np.allclose(cl.classical_U(s, 1)[-1], cl.classical_U(s, -1)[-1], atol=1e-12)


def test_basic_limits_trend():
    rep = cl.basic_limits_suite()
    assert rep.passed, rep.errors


def test_connection_trend():
    spec = cl.ClassicalEquationSpec(2, [0.3 + 0.1j], [1.7 - 0.2j])
    rep = cl.qlimit_connection(spec, 1.0, BranchedPoint(1.5, 0.8), 1)
    assert rep.passed, rep.errors
    with pytest.raises(WindowViolation):
        cl.qlimit_connection(spec, 1.0, BranchedPoint(1.5, 0.8), -1)


def test_stokes_trend_and_negative_control():
    s = draw_classical_system(np.random.default_rng([0, 11]), 2)
    lam, mu, z = QLIMIT_STOKES
    assert cl.qlimit_stokes(s, lam, mu, z).passed
    outside = BranchedPoint(1.5, 0.3)
    with pytest.raises(WindowViolation):
        cl.qlimit_stokes(s, lam, mu, outside)
    # the guard is there for a reason: outside the window the limit is a different matrix
    rep = cl.qlimit_stokes(s, lam, mu, outside, enforce_window=False)
    assert not rep.passed
    assert rep.errors["S"][-1] > 0.1


def test_trend_report_rules():
    rep = cl.TrendReport("t", [0.9, 0.99, 0.999], {"x": [1e-2, 1e-3, 1e-4]})
    assert rep.passed
    rep.errors["y"] = [1e-2, 9e-3, 1e-4]
    assert not rep.passed
    # exact quantities at every q pass whatever their ratios
    assert cl.TrendReport("t", [0.9, 0.99], {"z": [1e-16, 2e-16]}).passed
