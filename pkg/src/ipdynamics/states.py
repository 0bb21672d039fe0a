"""Two-qubit X states parameterized by Bloch z-components and correlations.

An X state is

    rho = (1/4) (1x1 + r s3x1 + s 1xs3 + sum_j c_j sj x sj)

and has non-zero entries only on the diagonal and anti-diagonal.  It splits
into an *inner* block on span{|01>, |10>} and an *outer* block on
span{|00>, |11>}, whose 2x2 spectra are available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import InvalidState, NotXShaped

PSD_TOL = 1e-12
TRACE_TOL = 1e-12
DEGENERATE_TOL = 1e-14

# entries of a 4x4 matrix allowed to be non-zero in X form
X_MASK = np.eye(4, dtype=bool) | np.eye(4, dtype=bool)[::-1]

_PAULI_PRODUCTS = (
    qmat.kron2(qmat.SIGMA_X, qmat.SIGMA_X),
    qmat.kron2(qmat.SIGMA_Y, qmat.SIGMA_Y),
    qmat.kron2(qmat.SIGMA_Z, qmat.SIGMA_Z),
)
_Z_A = qmat.kron2(qmat.SIGMA_Z, qmat.IDENTITY2)
_Z_B = qmat.kron2(qmat.IDENTITY2, qmat.SIGMA_Z)


@dataclass(frozen=True)
class XState:
    """Five real parameters of a two-qubit X state.

    ``r`` and ``s`` are the z-magnetizations of qubits A and B; ``c1, c2, c3``
    the diagonal of the correlation tensor.
    """

    r: float
    s: float
    c1: float
    c2: float
    c3: float

    @classmethod
    def bell(cls, c1: float, c2: float, c3: float) -> "XState":
        return cls(0.0, 0.0, c1, c2, c3)

    @property
    def c(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)

    @property
    def is_bell_diagonal(self) -> bool:
        return self.r == 0 and self.s == 0

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.r, self.s, self.c1, self.c2, self.c3)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Diagonal correlation tensor ``diag(c1, c2, c3)`` and its norms."""

    c: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))
        if len(self.c) != 3:
            raise ValueError("correlation matrix needs exactly three entries")

    @classmethod
    def of(cls, state: XState) -> "CorrelationMatrix":
        return cls(state.c)

    @property
    def hs_norm_sq(self) -> float:
        c1, c2, c3 = self.c
        return c1 * c1 + c2 * c2 + c3 * c3

    @property
    def op_norm_sq(self) -> float:
        return max(x * x for x in self.c)

    @property
    def determinant(self) -> float:
        c1, c2, c3 = self.c
        return c1 * c2 * c3

    @property
    def argmax_index(self) -> int:
        """1-based index of the largest ``|c_i|``; ties go to the smaller index."""
        mags = [abs(x) for x in self.c]
        return mags.index(max(mags)) + 1


@dataclass(frozen=True)
class Violation:
    name: str
    magnitude: float

    def __str__(self) -> str:
        return f"{self.name} ({self.magnitude:.3e})"


@dataclass(frozen=True)
class XEigenStructure:
    """Closed-form spectrum of an X state.

    ``lam[0:2]`` come from the inner block (larger first), ``lam[2:4]`` from
    the outer block.  ``x`` and ``y`` are the eigenvector ratios entering the
    branch formulas for M11, M22, M33; they are ``(inf, 0)`` when the
    corresponding block is already diagonal.
    """

    lam: tuple[float, float, float, float]
    x: tuple[float, float]
    y: tuple[float, float]
    degenerate_inner: bool
    degenerate_outer: bool


def to_density_matrix(state: XState) -> np.ndarray:
    r, s, c1, c2, c3 = state.as_tuple()
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1 + r + s + c3
    rho[1, 1] = 1 + r - s - c3
    rho[2, 2] = 1 - r + s - c3
    rho[3, 3] = 1 - r - s + c3
    rho[0, 3] = rho[3, 0] = c1 - c2
    rho[1, 2] = rho[2, 1] = c1 + c2
    return rho / 4


def _pauli_expectation(rho: np.ndarray, op: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ op)))


def from_density_matrix(rho, tol: float = 1e-13) -> XState:
    """Invert :func:`to_density_matrix`.

    Raises
    ------
    NotXShaped
        If any entry outside the diagonal and anti-diagonal exceeds ``tol``.
    """
    rho = qmat.as_matrix(rho, dims=(4,))
    stray = np.abs(rho[~X_MASK])
    if stray.size and stray.max() > tol:
        raise NotXShaped(f"off-X entry of magnitude {stray.max():.3e} exceeds {tol:.1e}")
    return XState(
        r=_pauli_expectation(rho, _Z_A),
        s=_pauli_expectation(rho, _Z_B),
        c1=_pauli_expectation(rho, _PAULI_PRODUCTS[0]),
        c2=_pauli_expectation(rho, _PAULI_PRODUCTS[1]),
        c3=_pauli_expectation(rho, _PAULI_PRODUCTS[2]),
    )


def _block_eigs(a: float, d: float, b: float) -> tuple[float, float]:
    mean = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), b)
    return mean + rad, mean - rad


def _spectrum(state: XState) -> tuple[float, float, float, float]:
    r, s, c1, c2, c3 = state.as_tuple()
    l1, l2 = _block_eigs((1 + r - s - c3) / 4, (1 - r + s - c3) / 4, (c1 + c2) / 4)
    l3, l4 = _block_eigs((1 + r + s + c3) / 4, (1 - r - s + c3) / 4, (c1 - c2) / 4)
    return l1, l2, l3, l4


def validate(state: XState) -> list[Violation]:
    """Return the list of physicality violations (empty for a valid state)."""
    values = state.as_tuple()
    if not all(math.isfinite(v) for v in values):
        return [Violation("non-finite parameter", math.inf)]
    out = []
    lam_min = min(_spectrum(state))
    if lam_min < -PSD_TOL:
        out.append(Violation("not positive semidefinite", lam_min))
    trace = float(np.real(np.trace(to_density_matrix(state))))
    if abs(trace - 1) > TRACE_TOL:
        out.append(Violation("trace not one", trace - 1))
    return out


def is_valid(state: XState) -> bool:
    return not validate(state)


def x_eigensystem(state: XState) -> XEigenStructure:
    problems = validate(state)
    if problems:
        raise InvalidState("; ".join(str(p) for p in problems))
    r, s, c1, c2, c3 = state.as_tuple()
    l1, l2, l3, l4 = _spectrum(state)
    inner, outer = c1 + c2, c1 - c2
    deg_in = abs(inner) <= DEGENERATE_TOL
    deg_out = abs(outer) <= DEGENERATE_TOL
    if deg_in:
        x = (math.inf, 0.0)
    else:
        x = ((r - s - 2 * (l2 - l1)) / inner, (r - s + 2 * (l2 - l1)) / inner)
    if deg_out:
        y = (math.inf, 0.0)
    else:
        y = ((r + s - 2 * (l4 - l3)) / outer, (r + s + 2 * (l4 - l3)) / outer)
    return XEigenStructure((l1, l2, l3, l4), x, y, deg_in, deg_out)


def parse_state_literal(text: str) -> XState:
    """Parse ``"r,s,c1,c2,c3"`` or the Bell-diagonal shorthand ``"c1,c2,c3"``."""
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"cannot parse state literal {text!r}") from exc
    if len(values) == 3:
        return XState.bell(*values)
    if len(values) == 5:
        return XState(*values)
    raise ValueError(f"state literal needs 3 or 5 numbers, got {len(values)}")


def random_xstate(rng: np.random.Generator) -> XState:
    """A random valid X state.

    Block populations are Dirichlet distributed and each block coherence is
    uniform within its positivity bound, so every draw is a state.
    """
    a, b, c, d = rng.dirichlet(np.ones(4))  # populations of |00>, |01>, |10>, |11>
    inner = rng.uniform(-1.0, 1.0) * math.sqrt(b * c)
    outer = rng.uniform(-1.0, 1.0) * math.sqrt(a * d)
    return XState(
        r=(a + b) - (c + d),
        s=(a + c) - (b + d),
        c1=2.0 * (inner + outer),
        c2=2.0 * (inner - outer),
        c3=(a + d) - (b + c),
    )


def random_bell_diagonal(rng: np.random.Generator) -> XState:
    """A random Bell-diagonal state with Dirichlet-distributed Bell weights."""
    w1, w2, w3, w4 = rng.dirichlet(np.ones(4))
    return XState.bell(w1 - w2 + w3 - w4, -w1 + w2 + w3 - w4, w1 + w2 - w3 - w4)
