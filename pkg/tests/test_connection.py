import cmath

import mpmath as mp
import numpy as np
import pytest

from qsf.connection import (
    confluence_limit_check,
    corollary_fn_check,
    main_connection_pseudoconstants,
    overlap_annulus,
    theta_ratio_limit_check,
    thomae_continuation,
    thomae_overlap,
    thomae_residual,
    verify_main_connection,
)
from qsf.errors import DomainError, GenericityViolation
from qsf.qcore import BranchedPoint, QContext
from qsf.qseries import ConfluentEquationSpec, f0_basis
from qsf.suites import _section_form_rhs, draw_confluent, _admissible_lambda, _admissible_z

mp.mp.dps = 30


def test_thomae_expansion_against_mpmath_series():
    q = 0.5
    ctx = QContext(q)
    a, b = [1.6 + 0.2j, -1.7 + 0.1j], [0.9j]
    lo, hi = thomae_overlap(a, b, ctx)
    z = BranchedPoint(0.5 * (lo + hi), 2.2)
    ref = complex(mp.qhyper(a, b, q, z.to_complex()))
    assert abs(thomae_continuation(a, b, z, ctx) - ref) < 1e-12 * max(1, abs(ref))


@pytest.mark.parametrize("n", [2, 3])
def test_thomae_random(n):
    rng = np.random.default_rng(40 + n)
    ctx = QContext(0.4)
    for _ in range(5):
        a = [cmath.rect(rng.uniform(1.0, 1.5), rng.uniform(-3, 3)) for _ in range(n)]
        b = [cmath.rect(rng.uniform(0.5, 1.0), rng.uniform(-3, 3)) for _ in range(n - 1)]
        lo, hi = thomae_overlap(a, b, ctx)
        z = BranchedPoint(0.5 * (lo + hi), rng.uniform(-3, 3))
        assert thomae_residual(a, b, z, ctx) < 1e-9


def _draws(n, q, count, seed):
    rng = np.random.default_rng(seed)
    ctx = QContext(q)
    for _ in range(count):
        spec = draw_confluent(rng, n, q)
        lo, hi = overlap_annulus(spec, ctx)
        lam = _admissible_lambda(rng, spec, q)
        yield spec, lam, _admissible_z(rng, spec, lam, q, lo, hi), ctx


@pytest.mark.parametrize("n,q", [(2, 0.3), (2, 0.5), (3, 0.3), (3, 0.5)])
def test_main_connection_and_coefficients(n, q):
    for spec, lam, z, ctx in _draws(n, q, 6, 7 * n):
        assert verify_main_connection(spec, lam, z, ctx) < 1e-6
        for c in main_connection_pseudoconstants(spec, lam, ctx):
            assert c.defect(z, ctx) < 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_section_form_agrees(n):
    # same identity written with the direction rescaled and no z-powers
    for spec, lam, z, ctx in _draws(n, 0.5, 5, 70 + n):
        lam_s = lam * complex(np.prod(spec.b) / np.prod(spec.a))
        lhs = f0_basis(spec, n - 1, z, ctx)
        assert abs(_section_form_rhs(spec, lam_s, z, ctx) - lhs) / max(1, abs(lhs)) < 1e-6


def test_result_does_not_depend_on_the_spiral_representative():
    spec, lam, z, ctx = next(_draws(3, 0.5, 1, 3))
    assert verify_main_connection(spec, lam * 0.5**2, z, ctx) < 1e-6


def test_resonant_parameters_rejected():
    ctx = QContext(0.5)
    spec = ConfluentEquationSpec(3, [0.8, 0.4], [0.9, 1.3j])
    with pytest.raises(GenericityViolation):
        verify_main_connection(spec, 1.1j, BranchedPoint(0.8, 0.9), ctx)
    with pytest.raises(DomainError):
        # direction on the forbidden spiral lam prod b / (a_i prod a) = -1
        verify_main_connection(ConfluentEquationSpec(2, [0.8], [0.9]), -0.8 * 0.8 / 0.9,
                               BranchedPoint(0.8, 0.9), ctx)


@pytest.mark.parametrize("n", [2, 3])
def test_corollary(n):
    for spec, lam, z, ctx in _draws(n, 0.5, 4, 90 + n):
        assert corollary_fn_check(spec, z, ctx) < 1e-6


def test_confluence_limit_converges():
    ctx = QContext(0.5)
    rep = confluence_limit_check([0.6 + 0.3j, -0.9 + 0.2j], [], 1.3 + 0.4j, 2.0 - 1.0j, 40, ctx)
    errs = [e for _, e in rep.values]
    assert errs[-1] < rep.tolerance
    assert errs[-1] < errs[5]


def test_theta_ratio_limit():
    ctx = QContext(0.5)
    a = [0.7 + 0.2j, 1.3 - 0.5j]
    b = [a[0] * a[1] / (0.9j), 0.9j]
    rep = theta_ratio_limit_check(a, b, [5, 20, 40], ctx)
    assert "unbalanced" not in rep.name
    assert rep.residual < rep.tolerance
