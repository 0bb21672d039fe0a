"""Interferometric power (IP) of two-qubit states.

IP is a quarter of the quantum Fisher information (QFI) minimized over local
probe Hamiltonians ``H_A = n . sigma`` on qubit A.  Three independent routes
are provided:

* :func:`ip_general` - smallest eigenvalue of the 3x3 matrix ``M`` built from
  the spectral decomposition of ``rho`` (valid for any two-qubit state);
* :func:`ip_xstate` - closed-form branch values ``M11, M22, M33`` of an X
  state from its analytic spectrum;
* :func:`ip_bruteforce` - direct minimization of the QFI over the unit
  sphere of probe directions.

:func:`ip_bell_diagonal` is the norm formula for Bell-diagonal states.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import qmat, sphere
from .errors import DegenerateFallback, InvalidState
from .states import CorrelationMatrix, XState, to_density_matrix, x_eigensystem

#: eigenvalue pairs with ``q_i + q_j`` at or below this are dropped from the sums
PAIR_TOL = 1e-12
DENSITY_TOL = 1e-10
#: below this |c1 +- c2| the eigenvector ratios lose too many digits
CLOSED_FORM_COND = 1e-6
BRANCHES = ("M11", "M22", "M33")

_LOCAL_PAULIS = np.stack([qmat.kron2(p, qmat.IDENTITY2) for p in qmat.PAULIS])


@dataclass(frozen=True)
class IPBranches:
    """Candidate branch values of an X state and the selected minimum.

    ``route`` is ``"closed-form"`` when the values come from the analytic
    spectrum and ``"general"`` when a degenerate state forced the M-matrix
    route.
    """

    m11: float
    m22: float
    m33: float
    active: str
    value: float
    route: str = "closed-form"

    @property
    def values(self) -> tuple[float, float, float]:
        return (self.m11, self.m22, self.m33)


@dataclass(frozen=True, eq=False)
class MMatrix:
    entries: np.ndarray
    smallest_eigenvalue: float


def check_density(rho, tol: float = DENSITY_TOL) -> np.ndarray:
    rho = qmat.as_matrix(rho, dims=(4,))
    if not np.all(np.isfinite(rho)):
        raise InvalidState("density matrix has non-finite entries")
    if not qmat.is_hermitian(rho, 1e-12):
        raise InvalidState("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidState(f"trace {tr!r} differs from one")
    return rho


def _spectral(rho):
    """Pair weights ``(q_i - q_l)^2 / (q_i + q_l)`` and local Pauli matrix elements."""
    rho = check_density(rho)
    eig = qmat.hermitian_eigen(rho)
    q = eig.eigenvalues
    if q[-1] < -DENSITY_TOL:
        raise InvalidState(f"density matrix has negative eigenvalue {q[-1]:.3e}")
    v = eig.eigenvectors
    sums = q[:, None] + q[None, :]
    keep = sums > PAIR_TOL
    w = np.zeros((4, 4))
    w[keep] = (q[:, None] - q[None, :])[keep] ** 2 / sums[keep]
    elems = np.einsum("ia,mij,jb->mab", v.conj(), _LOCAL_PAULIS, v)
    return w, elems


def qfi(rho, n) -> float:
    """Quantum Fisher information of ``rho`` for the generator ``(n . sigma) x 1``.

    Sums over unordered eigenpairs ``i < j`` with ``q_i + q_j > PAIR_TOL``,
    so a pure state gives four times the variance of the generator.
    """
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("probe direction must be a unit 3-vector")
    w, elems = _spectral(rho)
    h = np.tensordot(n, elems, axes=1)
    return float(2.0 * np.sum(w * np.abs(h) ** 2))


def m_matrix(rho) -> MMatrix:
    """The 3x3 matrix whose quadratic form is ``QFI / 4`` along a direction."""
    w, elems = _spectral(rho)
    raw = 0.5 * np.einsum("il,mil,nli->mn", w, elems, elems)
    m = np.real(raw)
    m = 0.5 * (m + m.T)
    return MMatrix(m, float(np.linalg.eigvalsh(m)[0]))


def ip_general(rho) -> float:
    return m_matrix(rho).smallest_eigenvalue


def _pair(a: float, b: float) -> float:
    s = a + b
    return (a - b) ** 2 / s if s > PAIR_TOL else 0.0


def _select(m11: float, m22: float, m33: float, c1: float, c2: float) -> tuple[str, float]:
    if abs(c1) < abs(c2):
        cands = (1, 2)
    elif abs(c1) > abs(c2):
        cands = (0, 2)
    else:
        cands = (0, 1, 2)
    vals = (m11, m22, m33)
    best = min(cands, key=lambda i: (vals[i], i))
    return BRANCHES[best], vals[best]


def ip_xstate(state: XState) -> IPBranches:
    """IP of an X state from the closed-form branch values.

    Only two of the three branches compete: ``M22, M33`` when
    ``|c1| < |c2|``, ``M11, M33`` when ``|c1| > |c2|``, all three on a tie.
    States whose eigenvector ratios are singular or ill-conditioned
    (``|c1 +- c2|`` tiny) are routed through :func:`m_matrix`.
    """
    es = x_eigensystem(state)
    c1, c2 = state.c1, state.c2
    if min(abs(c1 + c2), abs(c1 - c2)) < CLOSED_FORM_COND:
        m = m_matrix(to_density_matrix(state)).entries
        m11, m22, m33 = (float(m[k, k]) for k in range(3))
        active, value = _select(m11, m22, m33, c1, c2)
        return IPBranches(m11, m22, m33, active, value, route="general")

    l1, l2, l3, l4 = es.lam
    x1, x2 = es.x
    y1, y2 = es.y
    nx1, nx2 = 1 + x1 * x1, 1 + x2 * x2
    ny1, ny2 = 1 + y1 * y1, 1 + y2 * y2
    p13, p14, p23, p24 = _pair(l1, l3), _pair(l1, l4), _pair(l2, l3), _pair(l2, l4)
    m11 = (
        p13 * (x1 + y1) ** 2 / (nx1 * ny1)
        + p14 * (x1 + y2) ** 2 / (nx1 * ny2)
        + p23 * (x2 + y1) ** 2 / (nx2 * ny1)
        + p24 * (x2 + y2) ** 2 / (nx2 * ny2)
    )
    m22 = (
        p13 * (x1 - y1) ** 2 / (nx1 * ny1)
        + p14 * (x1 - y2) ** 2 / (nx1 * ny2)
        + p23 * (x2 - y1) ** 2 / (nx2 * ny1)
        + p24 * (x2 - y2) ** 2 / (nx2 * ny2)
    )
    m33 = _pair(l1, l2) * (x1 * x2 - 1) ** 2 / (nx1 * nx2) + _pair(l3, l4) * (y1 * y2 - 1) ** 2 / (
        ny1 * ny2
    )
    active, value = _select(m11, m22, m33, c1, c2)
    return IPBranches(m11, m22, m33, active, value)


def bell_m_diagonal(c) -> tuple[float, float, float]:
    """Diagonal of ``M`` for a Bell-diagonal state with correlations ``c``.

    ``M_kk = (|C|^2 - c_k^2 + 2 det C) / (1 - c_k^2)``; ``nan`` where
    ``c_k^2 = 1``.
    """
    c1, c2, c3 = c
    num = 2.0 * c1 * c2 * c3
    out = []
    for a, b, ck in ((c2, c3, c1), (c1, c3, c2), (c1, c2, c3)):
        den = 1.0 - ck * ck
        out.append((a * a + b * b + num) / den if den > 0 else math.nan)
    return tuple(out)


def ip_bell_diagonal(c, det_sign: float = 1.0) -> float:
    """IP of a Bell-diagonal state from norms of its correlation matrix.

    ``(|C|^2 - |C|_inf^2 + 2 det C) / (1 - |C|_inf^2)``.  When the operator
    norm approaches one the formula is 0/0 and the M-matrix route is used
    instead (with a :class:`DegenerateFallback` warning).

    ``det_sign`` exists only so the verification harness can plant a
    deliberate error; leave it at ``+1``.
    """
    cm = c if isinstance(c, CorrelationMatrix) else CorrelationMatrix(tuple(c))
    c1, c2, c3 = cm.c
    lam = [(1 + c1 - c2 + c3) / 4, (1 - c1 + c2 + c3) / 4, (1 + c1 + c2 - c3) / 4, (1 - c1 - c2 - c3) / 4]
    if min(lam) < -1e-12:
        raise InvalidState(f"correlations {cm.c} do not define a state")
    op = cm.op_norm_sq
    if op >= 1.0 - 1e-9:
        warnings.warn("operator norm at one; using the M-matrix route", DegenerateFallback, stacklevel=2)
        return ip_general(to_density_matrix(XState.bell(c1, c2, c3)))
    return (cm.hs_norm_sq - op + det_sign * 2.0 * cm.determinant) / (1.0 - op)


# --- brute-force oracle ----------------------------------------------------------


def ip_bruteforce_many(rhos, coarse_grid: int = 64, refine_iters: int = 40):
    """Minimize ``QFI / 4`` over probe directions for many states at once.

    Returns
    -------
    values : ndarray, shape (B,)
    directions : ndarray, shape (B, 3)
    """
    if coarse_grid < 32:
        raise ValueError("coarse_grid must be at least 32")
    spectra = [_spectral(r) for r in rhos]
    w = np.stack([s[0] for s in spectra])
    elems = np.stack([s[1] for s in spectra])
    grid = sphere.fibonacci_sphere(coarse_grid * coarse_grid)

    starts = np.empty((len(spectra), 3))
    for b in range(len(spectra)):
        h = np.einsum("nm,mij->nij", grid, elems[b])
        vals = 0.5 * np.einsum("ij,nij->n", w[b], np.abs(h) ** 2)
        starts[b] = grid[int(np.argmin(vals))]

    def objective(n):
        h = np.einsum("bm,bmij->bij", n, elems)
        return 0.5 * np.einsum("bij,bij->b", w, np.abs(h) ** 2)

    step = 2.0 * math.sqrt(4.0 * math.pi / len(grid))
    values, dirs = sphere.refine(objective, starts, refine_iters, step)
    return values, dirs


def ip_bruteforce(rho, coarse_grid: int = 64, refine_iters: int = 40) -> tuple[float, np.ndarray]:
    """Brute-force IP: Fibonacci grid of ``coarse_grid**2`` directions plus local refinement.

    The result is an upper bound on the true minimum; since ``QFI / 4`` is a
    quadratic form in the direction it agrees with :func:`ip_general` to
    about ``1e-7`` or better.
    """
    values, dirs = ip_bruteforce_many([rho], coarse_grid, refine_iters)
    return float(values[0]), dirs[0]
