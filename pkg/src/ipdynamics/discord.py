"""Entropic quantum discord of two-qubit states.

The discord with a projective measurement on ``side`` is

    D = S(rho_side) - S(rho_AB) + min_n sum_k p_k S(rho_other | k)

where ``n`` is the Bloch direction of the rank-1 projectors.  Conditional
states of the unmeasured qubit are qubits, so their entropies follow from
Bloch-vector lengths and the objective vectorizes over many directions.
Logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from . import qmat, sphere
from .errors import InvalidState
from .ip import check_density

DEFAULT_GRID = 64
DEFAULT_REFINE = 30


@dataclass(frozen=True)
class MeasurementAngles:
    theta: float
    phi: float

    @property
    def direction(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


@dataclass(frozen=True)
class DiscordResult:
    value: float
    argmin: MeasurementAngles
    side: str


def _binary_entropy(p):
    return (entr(p) + entr(1.0 - p)) / math.log(2.0)


def von_neumann_entropy(rho) -> float:
    """``-sum l log2 l`` over the spectrum, with ``0 log 0 = 0``."""
    rho = qmat.as_matrix(rho)
    if not qmat.is_hermitian(rho) or abs(np.trace(rho).real - 1.0) > 1e-10:
        raise InvalidState("not a density matrix")
    lam = qmat.hermitian_eigen(rho).eigenvalues
    if lam[-1] < -1e-10:
        raise InvalidState(f"negative eigenvalue {lam[-1]:.3e}")
    return float(np.sum(entr(np.clip(lam, 0.0, 1.0))) / math.log(2.0))


def bloch_data(rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Local Bloch vectors ``a``, ``b`` and correlation tensor ``T_ij = <s_i x s_j>``."""
    rho = qmat.as_matrix(rho, dims=(4,))
    p = qmat.PAULIS
    a = np.array([np.trace(rho @ qmat.kron2(s, qmat.IDENTITY2)).real for s in p])
    b = np.array([np.trace(rho @ qmat.kron2(qmat.IDENTITY2, s)).real for s in p])
    t = np.array([[np.trace(rho @ qmat.kron2(si, sj)).real for sj in p] for si in p])
    return a, b, t


def _conditional_entropy(n, a, b, t):
    """Average entropy of the unmeasured qubit after measuring along ``n``.

    ``n`` has shape ``(..., 3)``; ``a`` is the measured side's Bloch vector,
    ``b`` the other side's, ``t`` the correlation tensor oriented
    measured-by-other.  Leading axes of ``a, b, t`` broadcast against ``n``.
    """
    na = np.sum(n * a, axis=-1)
    nt = np.einsum("...i,...ij->...j", n, t)
    total = 0.0
    for sign in (1.0, -1.0):
        prob = 0.5 * (1.0 + sign * na)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = (b + sign * nt) / (1.0 + sign * na)[..., None]
        length = np.clip(np.linalg.norm(v, axis=-1), 0.0, 1.0)
        h = _binary_entropy(0.5 * (1.0 + length))
        total = total + np.where(prob > 1e-15, prob * h, 0.0)
    return total


def _oriented(rho, side: str):
    a, b, t = bloch_data(rho)
    if side == "A":
        return a, b, t
    if side == "B":
        return b, a, t.T
    raise ValueError(f"side must be 'A' or 'B', not {side!r}")


def discord_many(rhos, side: str = "A", grid: int = DEFAULT_GRID, refine_iters: int = DEFAULT_REFINE):
    """Discord of several states, minimized in one batch.

    The coarse ``grid x 2 grid`` angle scan picks the best direction closest
    to each coordinate axis; all three seeds are refined and the lowest wins,
    so near-degenerate competing minima are both examined.
    """
    if grid < 4:
        raise ValueError("grid must be at least 4")
    rhos = [check_density(r) for r in rhos]
    oriented = [_oriented(r, side) for r in rhos]
    a = np.stack([o[0] for o in oriented])
    b = np.stack([o[1] for o in oriented])
    t = np.stack([o[2] for o in oriented])
    nb = len(rhos)

    pts = sphere.angle_grid(grid)
    region = np.argmax(np.abs(pts), axis=-1)
    seeds = [np.empty((nb, 3)) for _ in range(3)]
    for lo in range(0, nb, 64):
        sl = slice(lo, lo + 64)
        cond = _conditional_entropy(pts[None], a[sl, None], b[sl, None], t[sl, None])
        for axis in range(3):
            masked = np.where(region[None, :] == axis, cond, np.inf)
            seeds[axis][sl] = pts[np.argmin(masked, axis=1)]
    x0 = np.concatenate(seeds)  # seed-major: rows k*nb .. (k+1)*nb
    aa, bb, tt = (np.concatenate([arr] * 3) for arr in (a, b, t))

    def objective(n):
        return _conditional_entropy(n, aa, bb, tt)

    vals, dirs = sphere.refine(objective, x0, refine_iters, step=math.pi / grid)
    vals = vals.reshape(3, nb)
    dirs = dirs.reshape(3, nb, 3)
    best = np.argmin(vals, axis=0)
    idx = np.arange(nb)
    min_cond = vals[best, idx]
    best_dirs = dirs[best, idx]

    out = []
    for k, rho in enumerate(rhos):
        measured = qmat.partial_trace(rho, side)
        value = von_neumann_entropy(measured) - von_neumann_entropy(rho) + float(min_cond[k])
        theta, phi = sphere.to_angles(best_dirs[k])
        out.append(DiscordResult(value, MeasurementAngles(float(theta), float(phi)), side))
    return out


def discord(rho, side: str = "A", grid: int = DEFAULT_GRID, refine_iters: int = DEFAULT_REFINE) -> DiscordResult:
    return discord_many([rho], side, grid, refine_iters)[0]


def measurement_axis(result: DiscordResult) -> int:
    """Coordinate axis (0, 1, 2) closest to the optimal measurement direction."""
    return int(np.argmax(np.abs(result.argmin.direction)))
