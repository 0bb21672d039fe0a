"""Derivative-free minimization over the unit sphere.

All routines work on batches: a single objective ``f`` maps an array of unit
vectors of shape ``(B, 3)`` to ``B`` values, so many independent problems
(states, trajectory points, seeds) are refined in lockstep.
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def fibonacci_sphere(count: int) -> np.ndarray:
    """``count`` nearly uniform unit vectors on a golden-angle spiral."""
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def angle_grid(n_theta: int) -> np.ndarray:
    """Unit vectors on a ``n_theta x 2 n_theta`` polar-angle/azimuth grid."""
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.linspace(0.0, 2 * math.pi, 2 * n_theta, endpoint=False)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    return np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th) * np.ones_like(ph)], axis=-1
    ).reshape(-1, 3)


def to_angles(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar angle in [0, pi] and azimuth in [0, 2 pi) of unit vectors."""
    n = np.asarray(n, dtype=float)
    theta = np.arccos(np.clip(n[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(n[..., 1], n[..., 0]), 2 * math.pi)
    return theta, phi


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _tangent(d: np.ndarray, x: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    """Project ``d`` onto the tangent plane at ``x``; degenerate rows use ``fallback``."""
    t = d - np.sum(d * x, axis=-1, keepdims=True) * x
    norm = np.linalg.norm(t, axis=-1, keepdims=True)
    bad = norm[:, 0] < 1e-12
    if np.any(bad):
        t[bad] = fallback[bad]
        norm[bad] = np.linalg.norm(t[bad], axis=-1, keepdims=True)
    return t / norm


def tangent_frame(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal tangent vectors at each row of ``x``."""
    # pick the coordinate axis least aligned with x to seed the frame
    axis = np.eye(3)[np.argmin(np.abs(x), axis=-1)]
    u = _normalize(axis - np.sum(axis * x, axis=-1, keepdims=True) * x)
    v = np.cross(x, u)
    return u, v


def _golden_line(f, x, d, fx, half_width, iters):
    """Golden-section search of ``f(cos a x + sin a d)`` for ``a`` in ``[-h, h]``."""
    h = half_width[:, None]
    lo, hi = -h, h
    c = hi - GOLDEN * (hi - lo)
    e = lo + GOLDEN * (hi - lo)

    def point(a):
        return np.cos(a) * x + np.sin(a) * d

    fc, fe = f(point(c)), f(point(e))
    for _ in range(iters):
        left = (fc < fe)[:, None]
        hi = np.where(left, e, hi)
        lo = np.where(left, lo, c)
        new_c = hi - GOLDEN * (hi - lo)
        new_e = lo + GOLDEN * (hi - lo)
        # the surviving interior point is reused; only one new evaluation is needed
        c_next = np.where(left, new_c, e)
        e_next = np.where(left, c, new_e)
        probe = np.where(left, c_next, e_next)
        fp = f(point(probe))
        fc_next = np.where(left[:, 0], fp, fe)
        fe_next = np.where(left[:, 0], fc, fp)
        c, e, fc, fe = c_next, e_next, fc_next, fe_next
    a = 0.5 * (lo + hi)
    cand = _normalize(point(a))
    fcand = f(cand)
    better = fcand < fx
    x_new = np.where(better[:, None], cand, x)
    f_new = np.where(better, fcand, fx)
    return x_new, f_new


def refine(f, x0, rounds: int, step, golden_iters: int = 48, tol: float = 1e-13):
    """Powell-style refinement with golden-section searches along great circles.

    Each round searches along two tangent directions and then along the net
    displacement of the round, which becomes a new search direction.  For a
    quadratic form on the sphere this converges in a few rounds.

    Parameters
    ----------
    f : callable
        Batched objective ``(B, 3) -> (B,)``.
    x0 : ndarray, shape (B, 3)
        Starting unit vectors (typically the best coarse-grid points).
    rounds : int
        Maximum number of rounds.
    step : float or ndarray
        Initial bracket half-width in radians.

    Returns
    -------
    values, points : ndarray
        Refined minima and their arguments; never worse than the start.
    """
    x = _normalize(np.array(x0, dtype=float))
    fx = f(x)
    h = np.broadcast_to(np.asarray(step, dtype=float), fx.shape).copy()
    d1, d2 = tangent_frame(x)
    for _ in range(rounds):
        start = x
        d1 = _tangent(d1, x, tangent_frame(x)[0])
        x, fx = _golden_line(f, x, d1, fx, h, golden_iters)
        d2 = _tangent(d2, x, np.cross(x, d1))
        x, fx = _golden_line(f, x, d2, fx, h, golden_iters)
        disp = x - start
        dnew = _tangent(disp, x, d1)
        x, fx = _golden_line(f, x, dnew, fx, h, golden_iters)
        moved = np.linalg.norm(x - start, axis=-1)
        d1, d2 = d2, dnew
        h = np.clip(4.0 * moved, 1e-7, 0.5 * math.pi)
        if np.all(moved < tol):
            break
    return fx, x
