import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_hermitian
from ipdynamics import qmat
from ipdynamics.errors import DimensionMismatch, NotHermitian

entries = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@given(arrays(float, (4, 4), elements=entries), arrays(float, (4, 4), elements=entries))
def test_eigen_reconstructs_and_is_orthonormal(re, im):
    a = re + 1j * im
    a = 0.5 * (a + a.conj().T)
    eig = qmat.hermitian_eigen(a)
    scale = max(1.0, np.linalg.norm(a))
    v = eig.eigenvectors
    assert np.max(np.abs(eig.reconstruct() - a)) <= 1e-12 * scale
    assert np.max(np.abs(v.conj().T @ v - np.eye(4))) <= 1e-12
    assert np.all(np.diff(eig.eigenvalues) <= 0)


def test_eigenvalues_match_lapack(rng):
    for n in (2, 4):
        for _ in range(200):
            a = random_hermitian(rng, n)
            ours = qmat.eigvals(a)
            ref = np.linalg.eigvalsh(a)[::-1]
            assert np.max(np.abs(ours - ref)) <= 1e-12 * max(1.0, np.linalg.norm(a))


def test_eigenvectors_satisfy_eigen_equation(rng):
    a = random_hermitian(rng, 4)
    eig = qmat.hermitian_eigen(a)
    for k in range(4):
        v = eig.eigenvectors[:, k]
        assert np.allclose(a @ v, eig.eigenvalues[k] * v, atol=1e-12)


def test_diagonal_and_degenerate_inputs():
    eig = qmat.hermitian_eigen(np.diag([0.1, 0.7, 0.1, 0.1]))
    assert np.allclose(eig.eigenvalues, [0.7, 0.1, 0.1, 0.1])
    eig = qmat.hermitian_eigen(np.zeros((4, 4)))
    assert np.all(eig.eigenvalues == 0)
    assert np.allclose(eig.eigenvectors, np.eye(4))


def test_tiny_pivots_do_not_overflow():
    a = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
    a[0, 1] = 1e-310
    a[1, 0] = 1e-310
    assert np.allclose(qmat.eigvals(a), [4, 3, 2, 1])


def test_rejects_non_hermitian_and_bad_shapes():
    with pytest.raises(NotHermitian):
        qmat.hermitian_eigen(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionMismatch):
        qmat.hermitian_eigen(np.eye(3))
    with pytest.raises(DimensionMismatch):
        qmat.sandwich(np.eye(2), np.eye(4))
    with pytest.raises(ValueError):
        qmat.hermitian_eigen(np.eye(2), tol=0)


def test_pauli_algebra():
    x, y, z = qmat.PAULIS
    assert np.allclose(x @ y, 1j * z)
    assert np.allclose(qmat.kron2(x, qmat.IDENTITY2)[0:2, 2:4], np.eye(2))


def test_matrix_element_conjugates_left_vector():
    psi = np.array([1j, 0])
    assert qmat.matrix_element(psi, np.eye(2), psi) == pytest.approx(1.0)
    assert qmat.matrix_element(psi, qmat.SIGMA_X, np.array([0, 1])) == pytest.approx(-1j)


def test_partial_trace_of_product(rng):
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 2)
    prod = qmat.kron2(a, b)
    assert np.allclose(qmat.partial_trace(prod, "A"), a * np.trace(b))
    assert np.allclose(qmat.partial_trace(prod, "B"), b * np.trace(a))
    with pytest.raises(ValueError):
        qmat.partial_trace(prod, "C")
