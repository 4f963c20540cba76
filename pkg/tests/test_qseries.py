import cmath

import mpmath as mp
import numpy as np
import pytest

from qsf.errors import DivergentSeries, DomainError, OutsideRadius
from qsf.qcore import BranchedPoint, QContext
from qsf.qseries import (
    ConfluentEquationSpec,
    FuchsianEquationSpec,
    HypergeometricParams,
    basic_phi,
    classical_F,
    f0_basis,
    fuchsian_infinity_basis,
    q_difference_residual,
    radius_class,
)

mp.mp.dps = 30


def rel(x, y):
    return abs(x - y) / max(1.0, abs(y))


@pytest.mark.parametrize("upper,lower,z", [
    ([0.3, 0.5 + 0.2j], [0.7], 0.4 - 0.3j),
    ([0.2, -0.6, 1.3j], [0.4, 0.9], 0.7),
    ([0.5], [0.2, 0.3], 3.0 + 1.0j),        # entire (r < s + 1)
])
def test_basic_phi_against_mpmath(upper, lower, z):
    q = 0.55
    ref = complex(mp.qhyper(upper, lower, q, z))
    assert rel(basic_phi(HypergeometricParams(upper, lower), z, QContext(q)), ref) < 1e-12


def test_terminating_series_ignores_radius():
    q = 0.5
    p = HypergeometricParams([q**-3, 0.7], [0.2])
    # q^-3 stops the series after four terms, so |z| = 5 is fine
    ref = sum(mp.qp(q**-3, q, k) * mp.qp(0.7, q, k) / (mp.qp(0.2, q, k) * mp.qp(q, q, k)) * 5.0**k
              for k in range(4))
    assert rel(basic_phi(p, 5.0, QContext(q)), complex(ref)) < 1e-12


def test_classical_F_against_mpmath():
    p = HypergeometricParams([0.3, 1.2 + 0.5j], [1.7], "classical")
    assert rel(classical_F(p, 0.6j, QContext(0.5)), complex(mp.hyp2f1(0.3, 1.2 + 0.5j, 1.7, 0.6j))) < 1e-13


def test_radius_guards():
    ctx = QContext(0.5)
    assert radius_class(3, 1) == "zero"
    with pytest.raises(DivergentSeries):
        basic_phi(HypergeometricParams([0.2, 0.3, 0.4], [0.5]), 0.1, ctx)
    with pytest.raises(OutsideRadius):
        basic_phi(HypergeometricParams([0.2, 0.3], [0.5]), 1.2, ctx)


def test_lower_parameter_in_q_to_minus_n_rejected():
    with pytest.raises(DomainError):
        basic_phi(HypergeometricParams([0.2], [4.0]), 0.1, QContext(0.5))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_origin_basis_solves_confluent_equation(n):
    rng = np.random.default_rng(n)
    q = 0.4
    ctx = QContext(q)
    a = [cmath.rect(rng.uniform(0.5, 1.5), rng.uniform(-3, 3)) for _ in range(n - 1)]
    b = [cmath.rect(rng.uniform(0.5, 1.5), rng.uniform(-3, 3)) for _ in range(n - 1)]
    spec = ConfluentEquationSpec(n, a, b)
    z = BranchedPoint(0.3, 0.7)
    for j in range(n):
        r = q_difference_residual(lambda p, j=j: f0_basis(spec, j, p, ctx), spec, z, ctx)
        assert r < 1e-12


def test_fuchsian_infinity_basis_solves_its_equation():
    q = 0.5
    ctx = QContext(q)
    a, b = [0.6 + 0.2j, -1.1, 0.4j], [0.8, 1.3 - 0.4j]
    spec = FuchsianEquationSpec(a, b)
    z = BranchedPoint(40.0, 2.0)  # q^2 z must stay outside the disc too
    for i in range(3):
        r = q_difference_residual(lambda p, i=i: fuchsian_infinity_basis(a, b, i, p, ctx), spec, z, ctx)
        assert r < 1e-12
