import cmath

import numpy as np
import pytest

from qsf.errors import DomainError, GenericityViolation
from qsf.qcore import BranchedPoint, QContext
from qsf.qsystem import (
    F0_handle,
    Finf_handle,
    Sq_closed,
    Sq_numeric,
    SystemSpec,
    Uq_closed,
    Uq_inverse_closed,
    Uq_numeric,
    build_diagonalized,
    formal_Hhat,
    full_stokes_b,
    overlap_moduli,
    psi_coefficients,
    submatrix_eigen,
    system_residual,
    transport_to_full,
)
from qsf.suites import _system_point, _unit, draw_system


def setup(n, q, seed):
    rng = np.random.default_rng(seed)
    ctx = QContext(q)
    spec = draw_system(rng, n, q)
    dsys = build_diagonalized(spec)
    lam, mu = _unit(rng), _unit(rng)
    return rng, ctx, spec, dsys, lam, mu, _system_point(rng, dsys, ctx, [lam, mu])


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_submatrix_eigen_matches_numpy(k):
    rng = np.random.default_rng(k)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    ours = submatrix_eigen(A, k)
    ref = sorted(np.linalg.eigvals(A[:k, :k]), key=lambda x: (round(x.real, 12), x.imag))
    assert np.allclose(ours, ref, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_diagonalization_invariants(n):
    _, _, _, dsys, *_ = setup(n, 0.5, n)
    assert max(dsys.invariants().values()) < 1e-9


def test_degenerate_matrix_rejected():
    A = np.diag([0.3, 0.3, 1.0]).astype(complex)
    A[0, 2] = A[2, 0] = 0.5
    with pytest.raises(GenericityViolation):
        SystemSpec(A, 0.5)
    with pytest.raises(DomainError):
        SystemSpec(np.ones((2, 3)), 0.5)


@pytest.mark.parametrize("n", [2, 3])
def test_solutions_satisfy_system(n):
    rng, ctx, spec, dsys, lam, mu, z = setup(n, 0.4, 10 + n)
    assert system_residual(F0_handle(dsys, ctx), z, ctx) < 1e-9
    Fi = Finf_handle(dsys, lam, ctx)
    assert system_residual(Fi, z, ctx, columns=range(n - 1)) < 1e-9
    far = BranchedPoint(overlap_moduli(dsys, ctx)[1] * 4, 0.3)
    assert system_residual(Fi, far, ctx, columns=[n - 1]) < 1e-9
    full = transport_to_full(dsys, F0_handle(dsys, ctx))
    assert system_residual(full, z, ctx) < 1e-9


@pytest.mark.parametrize("n", [2, 3, 4])
def test_connection_matrix(n):
    _, ctx, spec, dsys, lam, mu, z = setup(n, 0.5, 20 + n)
    U = Uq_closed(dsys, lam, z, ctx).entries
    Un = Uq_numeric(dsys, lam, z, ctx).entries
    assert np.abs(U - Un).max() / np.abs(U).max() < 1e-6
    assert np.abs(U @ Uq_inverse_closed(dsys, lam, z, ctx).entries - np.eye(n)).max() < 1e-8
    U1 = Uq_closed(dsys, lam, z.qshift(ctx.q), ctx).entries
    assert np.abs(U1 - U).max() / np.abs(U).max() < 1e-8


@pytest.mark.parametrize("n", [2, 3, 4])
def test_stokes_matrix(n):
    _, ctx, spec, dsys, lam, mu, z = setup(n, 0.3, 30 + n)
    S = Sq_closed(dsys, lam, mu, z, ctx)
    Sn = Sq_numeric(dsys, lam, mu, z, ctx)
    assert np.abs(S.entries - Sn.entries).max() < 1e-6
    assert Sn.block_defect() < 1e-8
    back = Sq_closed(dsys, mu, lam, z, ctx).entries
    assert np.abs(S.entries @ back - np.eye(n)).max() < 1e-8
    with pytest.raises(DomainError):
        Sq_closed(dsys, lam, lam * ctx.q, z, ctx)
    Sf = transport_to_full(dsys, S).entries
    assert np.abs(Sf[-1, :-1] - full_stokes_b(spec, lam, mu, z, ctx)).max() < 1e-6
    # z with (1-q) q^{-nu_n} z in q^Z is excluded for Stokes as for connection
    bad = BranchedPoint.from_complex(ctx.q ** (spec.nu[-1] + 2) / (1 - ctx.q))
    for closed in (lambda: Sq_closed(dsys, lam, mu, bad, ctx), lambda: Uq_closed(dsys, lam, bad, ctx)):
        with pytest.raises(DomainError):
            closed()


def test_formal_solution_matches_resummed_last_column():
    n, q = 3, 0.5
    _, ctx, spec, dsys, *_ = setup(n, q, 41)
    H = formal_Hhat(dsys, 8, ctx)
    sc = 1 / ((1 - q) * cmath.exp(-spec.nu[-1] * ctx.logq))
    for i in range(n):
        co, _ = psi_coefficients(dsys, i, ctx, K=16)
        ser = [co[m] * sc**m for m in range(9)]
        if i < n - 1:
            err = max(abs(H[m][i, n - 1] - q * dsys.a[i] * ser[m - 1]) for m in range(1, 9))
        else:
            err = max(abs(H[m][i, n - 1] - ser[m]) for m in range(9))
        assert err < 1e-9
