"""Dense complex linear algebra for 2x2 and 4x4 Hermitian operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The eigensolver
is a cyclic Jacobi method with complex 2x2 rotations; at dimension 4 it
converges in a handful of sweeps and gives orthonormal eigenvectors to
machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian

#: Off-diagonal Frobenius norm target of the Jacobi iteration.
DEFAULT_EIGEN_TOL = 1e-13
#: Entrywise tolerance of the Hermiticity check.
HERMITIAN_ATOL = 1e-12
MAX_SWEEPS = 100

IDENTITY2 = np.eye(2, dtype=complex)
IDENTITY4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Spectral data of a Hermitian matrix.

    ``eigenvalues`` are real and sorted in descending order; column ``k`` of
    ``eigenvectors`` belongs to ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a, dims=(2, 4)) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in dims:
        raise DimensionMismatch(f"expected a square matrix of size {dims}, got {m.shape}")
    return m


def hermiticity_error(a) -> float:
    m = np.asarray(a, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    return hermiticity_error(a) <= atol


def kron2(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices (``a[0, 0] * b`` is the top-left block)."""
    a = as_matrix(a, dims=(2,))
    b = as_matrix(b, dims=(2,))
    return np.kron(a, b)


def sandwich(k, rho) -> np.ndarray:
    """Return ``k @ rho @ k^dagger``."""
    k = np.asarray(k, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if k.ndim != 2 or rho.ndim != 2 or k.shape[1] != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"cannot conjugate {rho.shape} by {k.shape}")
    return k @ rho @ k.conj().T


def matrix_element(psi, a, phi) -> complex:
    """Sesquilinear form ``<psi| a |phi>`` (``psi`` is conjugated)."""
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    return complex(psi.conj() @ np.asarray(a, dtype=complex) @ phi)


def _off_norm(m: np.ndarray) -> float:
    off = m[~np.eye(m.shape[0], dtype=bool)]
    return float(np.sqrt(np.sum(off.real**2 + off.imag**2)))


def hermitian_eigen(a, tol: float = DEFAULT_EIGEN_TOL, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Eigendecomposition of a small Hermitian matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    a : array_like
        2x2 or 4x4 Hermitian matrix.
    tol : float
        Target for the off-diagonal Frobenius norm, relative to
        ``max(1, ||a||_F)``.
    max_sweeps : int
        Sweep budget before :class:`NoConvergence` is raised.

    Returns
    -------
    EigenDecomposition
        Eigenvalues in descending order (stable with respect to the sweep
        output for ties) and orthonormal eigenvector columns.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(a).copy()
    if not is_hermitian(m):
        raise NotHermitian(f"matrix is not Hermitian (max |A - A^H| = {hermiticity_error(m):.3e})")
    m = 0.5 * (m + m.conj().T)
    n = m.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(m)))
    target = tol * scale
    negligible = 1e-30 * scale

    for _ in range(max_sweeps):
        if _off_norm(m) < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                mag = abs(apq)
                if mag <= negligible:
                    m[p, q] = m[q, p] = 0.0
                    continue
                # rotate in the (p, q) plane: a phase makes the pivot real,
                # then a real Givens rotation zeroes it
                phase = apq / mag
                theta = 0.5 * np.arctan2(2.0 * mag, (m[p, p] - m[q, q]).real)
                c, s = np.cos(theta), np.sin(theta)
                col_p = c * v[:, p] + s * np.conj(phase) * v[:, q]
                col_q = -s * v[:, p] + c * np.conj(phase) * v[:, q]
                v[:, p], v[:, q] = col_p, col_q
                mp = c * m[:, p] + s * np.conj(phase) * m[:, q]
                mq = -s * m[:, p] + c * np.conj(phase) * m[:, q]
                m[:, p], m[:, q] = mp, mq
                rp = c * m[p, :] + s * phase * m[q, :]
                rq = -s * m[p, :] + c * phase * m[q, :]
                m[p, :], m[q, :] = rp, rq
                m[p, q] = m[q, p] = 0.0
    else:
        if _off_norm(m) >= target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(m).real
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(eigenvalues=w[order].copy(), eigenvectors=v[:, order].copy())


def eigvals(a, tol: float = DEFAULT_EIGEN_TOL) -> np.ndarray:
    return hermitian_eigen(a, tol).eigenvalues


def partial_trace(rho, keep: str) -> np.ndarray:
    """Reduced 2x2 state of a two-qubit matrix; ``keep`` is ``"A"`` or ``"B"``."""
    r = as_matrix(rho, dims=(4,)).reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")
