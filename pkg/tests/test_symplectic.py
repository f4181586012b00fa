import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psdrom.symplectic import (
    SymplecticBasis,
    SymplecticityError,
    is_symplectic,
    omega,
    poisson_matrix,
    projector,
    symplectic_inverse,
    symplecticity_residual,
)

from conftest import random_cotangent


def test_poisson_matrix_blocks():
    J = poisson_matrix(3)
    npt = np.testing
    npt.assert_array_equal(J[:3, 3:], np.eye(3))
    npt.assert_array_equal(J[3:, :3], -np.eye(3))
    npt.assert_array_equal(J @ J, -np.eye(6))
    npt.assert_array_equal(J.T, -J)


def test_poisson_matrix_rejects_bad_size():
    with pytest.raises(ValueError):
        poisson_matrix(0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 30), k=st.integers(1, 6), seed=st.integers(0, 2**31))
def test_cotangent_lift_is_symplectic(n, k, seed):
    k = min(k, n)
    A = random_cotangent(np.random.default_rng(seed), n, k)
    ok, res = is_symplectic(A.matrix)
    assert ok and res < 1e-12
    np.testing.assert_allclose(A.inverse @ A.matrix, np.eye(2 * k), atol=1e-12)
    # closed-form block inverse agrees with J_2k^T A^T J_2n
    direct = poisson_matrix(k).T @ A.matrix.T @ poisson_matrix(n)
    np.testing.assert_allclose(A.inverse, direct, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_projector_idempotent_and_symplectic_form_preserved(seed):
    rng = np.random.default_rng(seed)
    A = random_cotangent(rng, 12, 4)
    P = projector(A)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    z1, z2 = rng.standard_normal(8), rng.standard_normal(8)
    assert omega(A.matrix @ z1, A.matrix @ z2) == pytest.approx(omega(z1, z2), abs=1e-12)


def test_general_symplectic_basis_with_nonzero_pq_block(rng):
    # shear [[I, 0], [S, I]] with symmetric S is symplectic
    n = 5
    S = rng.standard_normal((n, n))
    S = S + S.T
    A = np.block([[np.eye(n), np.zeros((n, n))], [S, np.eye(n)]])
    B = SymplecticBasis.from_matrix(A)
    assert B.kind == "general"
    np.testing.assert_allclose(B.inverse @ A, np.eye(2 * n), atol=1e-12)
    np.testing.assert_allclose(symplectic_inverse(A), B.inverse)


def test_nonzero_qp_block_rejected(rng):
    n = 3
    A = np.eye(2 * n)
    A[:n, n:] = 0.1 * np.eye(n)
    with pytest.raises(ValueError):
        SymplecticBasis.from_matrix(A)


def test_non_symplectic_rejected_with_residual():
    phi = np.array([[1.0], [1.0]])  # not orthonormal
    with pytest.raises(SymplecticityError) as info:
        SymplecticBasis.cotangent(phi)
    assert info.value.residual > 0.5


def test_is_symplectic_rejects_odd_and_nonfinite():
    with pytest.raises(ValueError):
        is_symplectic(np.ones((3, 2)))
    A = np.eye(4)
    A[0, 0] = np.nan
    with pytest.raises(ValueError):
        is_symplectic(A)


def test_residual_zero_for_identity():
    assert symplecticity_residual(np.eye(6)) == 0.0


def test_basis_arrays_read_only(rng):
    A = random_cotangent(rng, 6, 2)
    with pytest.raises(ValueError):
        A.qq[0, 0] = 1.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(3, 25), k=st.integers(1, 3))
def test_adjoint_identities(seed, n, k):
    rng = np.random.default_rng(seed)
    A = random_cotangent(rng, n, k)
    J, Jk = poisson_matrix(n), poisson_matrix(k)
    P = projector(A)
    u, v = rng.standard_normal(2 * n), rng.standard_normal(2 * n)
    a = u @ J @ P @ v
    b = (P @ u) @ J @ v
    c = (A.inverse @ u) @ Jk @ (A.inverse @ v)
    assert a == pytest.approx(b, abs=1e-10) and a == pytest.approx(c, abs=1e-10)
    assert abs(omega(u, P @ u)) < 1e-10
