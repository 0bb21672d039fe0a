"""Evolution of X states through channel families and sudden-change detection.

A *sudden change* is a jump in the time derivative of IP (or discord) caused
by a switch of the optimizing branch.  :func:`detect_kinks` finds switches
of the branch label on the sampled trajectory, pins each one down by
bisection on the label, and keeps it only if the one-sided slopes differ.
The ``predict_*`` functions give the analytic switch times for Bell-diagonal
initial states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from . import channels
from .channels import ChannelFamily
from .discord import DEFAULT_GRID, DEFAULT_REFINE, discord, discord_many, measurement_axis
from .errors import ConstantIP, InvalidState, RouteMismatch
from .ip import BRANCHES, IPBranches, ip_xstate
from .states import CorrelationMatrix, XState, from_density_matrix, to_density_matrix, validate

SLOPE_JUMP_THRESHOLD = 1e-6
KINK_TIME_TOL = 1e-10
DISCORD_TIME_TOL = 1e-7
ROUTE_CHECK_TOL = 1e-11
ROUTE_CHECK_POINTS = 5

BATH_CAPTION_NOTE = (
    "note: for the common-bath example c = (0.4, -0.1, c3) the reference figure caption "
    "places the sudden change at c3 = 0.14 and none at c3 = 0.16; the switching "
    "condition c3 > (c1 + c2)/2 used here gives the opposite assignment"
)


@dataclass
class Trajectory:
    """Sampled evolution of an initial state under a channel family.

    ``branches`` holds the active-branch label per time: ``argmax |c_i(t)|``
    (as ``"M11"``-style labels) when the family keeps Bell-diagonal states
    Bell-diagonal, the closed-form branch otherwise.
    """

    family: ChannelFamily
    initial: XState
    times: np.ndarray
    states: list
    ip_values: np.ndarray
    branches: list
    bell_tracking: bool
    discord_values: Optional[np.ndarray] = None
    discord_axes: Optional[list] = None
    discord_side: str = "A"
    discord_grid: int = DEFAULT_GRID
    discord_refine: int = DEFAULT_REFINE

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class SuddenChangeEvent:
    t_star: float
    left_slope: float
    right_slope: float
    branch_before: str
    branch_after: str
    kind: str = "branch-switch"
    quantity: str = "ip"

    @property
    def slope_jump(self) -> float:
        return abs(self.right_slope - self.left_slope)


def bell_label(state: XState) -> str:
    return BRANCHES[CorrelationMatrix.of(state).argmax_index - 1]


def _uses_bell_tracking(family: ChannelFamily, initial: XState) -> bool:
    return initial.is_bell_diagonal and family.preserves_bell_diagonal


def _branch_label(state: XState, branches: IPBranches, bell: bool) -> str:
    return bell_label(state) if bell else branches.active


def check_routes(family: ChannelFamily, initial: XState, times, tol: float = ROUTE_CHECK_TOL) -> float:
    """Compare the closed-form map with the Kraus route at the given times.

    Returns the largest parameter discrepancy; raises :class:`RouteMismatch`
    above ``tol``.
    """
    rho0 = to_density_matrix(initial)
    worst = 0.0
    for t in times:
        ch = family.at(float(t))
        closed = np.array(ch.xmap(initial).as_tuple())
        kraus = np.array(from_density_matrix(channels.apply(ch, rho0), tol=1e-12).as_tuple())
        worst = max(worst, float(np.max(np.abs(closed - kraus))))
    if worst > tol:
        raise RouteMismatch(f"{family.spec()}: coefficient map and Kraus route differ by {worst:.3e}")
    return worst


def evolve(
    family: ChannelFamily,
    initial: XState,
    times,
    with_discord: bool = False,
    discord_side: str = "A",
    discord_grid: int = DEFAULT_GRID,
    discord_refine: int = DEFAULT_REFINE,
) -> Trajectory:
    """Evolve ``initial`` over ``times`` and record IP (and optionally discord)."""
    problems = validate(initial)
    if problems:
        raise InvalidState("; ".join(str(p) for p in problems))
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("time grid must be a non-empty 1-d array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")

    picks = np.unique(np.linspace(0, len(times) - 1, ROUTE_CHECK_POINTS).round().astype(int))
    check_routes(family, initial, times[picks])

    bell = _uses_bell_tracking(family, initial)
    evolved = [family.state_at(initial, float(t)) for t in times]
    ips, labels = [], []
    for st in evolved:
        br = ip_xstate(st)
        ips.append(br.value)
        labels.append(_branch_label(st, br, bell))
    tr = Trajectory(family, initial, times, evolved, np.array(ips), labels, bell)

    if with_discord:
        res = discord_many([to_density_matrix(s) for s in evolved], discord_side, discord_grid, discord_refine)
        tr.discord_values = np.array([r.value for r in res])
        tr.discord_axes = ["xyz"[measurement_axis(r)] for r in res]
        tr.discord_side = discord_side
        tr.discord_grid = discord_grid
        tr.discord_refine = discord_refine
    return tr


# --- kink detection ---------------------------------------------------------------


def _ip_probe(tr: Trajectory):
    def probe(t: float):
        st = tr.family.state_at(tr.initial, t)
        br = ip_xstate(st)
        return br.value, _branch_label(st, br, tr.bell_tracking)

    return probe


def _discord_probe(tr: Trajectory):
    def probe(t: float):
        rho = to_density_matrix(tr.family.state_at(tr.initial, t))
        res = discord(rho, tr.discord_side, tr.discord_grid, tr.discord_refine)
        return res.value, "xyz"[measurement_axis(res)]

    return probe


def _one_sided_slope(f: Callable[[float], float], t: float, h: float, sign: float) -> float:
    """Richardson-extrapolated one-sided derivative (``sign=-1`` looks left)."""
    f0 = f(t)

    def d(step):
        return sign * (f(t + sign * step) - f0) / step

    return 2.0 * d(0.5 * h) - d(h)


def _locate_switches(probe, times, labels, tol):
    """Yield ``(a, b, label_a, label_b)`` brackets of width <= ``tol`` around label switches."""
    for k in range(len(times) - 1):
        if labels[k] == labels[k + 1]:
            continue
        lo, hi = float(times[k]), float(times[k + 1])
        lab_lo, lab_hi = labels[k], labels[k + 1]
        while lab_lo != lab_hi:
            a, b = lo, hi
            lab_b = lab_hi
            while b - a > tol:
                mid = 0.5 * (a + b)
                lab_mid = probe(mid)[1]
                if lab_mid == lab_lo:
                    a = mid
                else:
                    b, lab_b = mid, lab_mid
            yield a, b, lab_lo, lab_b
            lo, lab_lo = b, lab_b


def _kinks(probe, times, labels, tol, threshold, quantity) -> list:
    times = np.asarray(times, dtype=float)
    if len(times) < 3:
        raise ValueError("kink detection needs at least three samples")
    step = float(np.min(np.diff(times)))
    t_first, t_last = float(times[0]), float(times[-1])
    events = []
    value = lambda t: probe(t)[0]  # noqa: E731
    for a, b, before, after in _locate_switches(probe, times, labels, tol):
        t_star = 0.5 * (a + b)
        h = min(step / 8.0, 0.5 * (t_star - t_first), 0.5 * (t_last - t_star))
        if h < 1e-9:
            continue
        left = _one_sided_slope(value, t_star, h, -1.0)
        right = _one_sided_slope(value, t_star, h, 1.0)
        if abs(right - left) > threshold:
            events.append(SuddenChangeEvent(t_star, left, right, str(before), str(after), quantity=quantity))
    return events


def detect_kinks(
    tr: Trajectory, slope_jump_threshold: float = SLOPE_JUMP_THRESHOLD, time_tol: float = KINK_TIME_TOL
) -> list:
    """Sudden changes of IP along a trajectory."""
    return _kinks(_ip_probe(tr), tr.times, tr.branches, time_tol, slope_jump_threshold, "ip")


def detect_discord_kinks(
    tr: Trajectory, slope_jump_threshold: float = SLOPE_JUMP_THRESHOLD, time_tol: float = DISCORD_TIME_TOL
) -> list:
    """Sudden changes of discord, signalled by jumps of the optimal measurement axis.

    The threshold grows with the grid spacing because the minimizer noise
    divided by the finite-difference step is larger on coarse grids.
    """
    if tr.discord_values is None:
        raise ValueError("trajectory was evolved without discord")
    step = float(np.min(np.diff(tr.times)))
    threshold = max(slope_jump_threshold, 1e-4 * step)
    return _kinks(_discord_probe(tr), tr.times, tr.discord_axes, time_tol, threshold, "discord")


# --- analytic predictors -------------------------------------------------------------


def _as_cm(c) -> CorrelationMatrix:
    return c if isinstance(c, CorrelationMatrix) else CorrelationMatrix(tuple(c))


def predict_phase_t0(c, tau: float) -> Optional[float]:
    """Switch time ``-(2/tau) ln |c3 / max(|c1|, |c2|)|`` under phase noise, if any."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    c1, c2, c3 = _as_cm(c).c
    top = max(abs(c1), abs(c2))
    if c3 == 0 or abs(c3) >= top:
        return None
    return -(2.0 / tau) * math.log(abs(c3) / top)


def predict_amplitude_kink(c) -> bool:
    """Sufficient condition ``|c3| < max(|c1|, |c2|)`` for an IP kink under amplitude noise."""
    c1, c2, c3 = _as_cm(c).c
    return abs(c3) < max(abs(c1), abs(c2))


def _first_crossing(g, t_max: float, samples: int) -> Optional[float]:
    """First root of ``g`` on ``[0, t_max]`` found by scanning and Brent refinement."""
    ts = np.linspace(0.0, t_max, samples)
    prev_t, prev_g = ts[0], g(ts[0])
    for t in ts[1:]:
        cur = g(t)
        if prev_g == 0.0:
            return float(prev_t)
        if prev_g * cur < 0:
            return float(optimize.brentq(g, prev_t, t, xtol=1e-14, rtol=4 * np.finfo(float).eps))
        prev_t, prev_g = t, cur
    return None


def predict_bath_kink(c, s: float = 4.0, wc: float = 1.0) -> Optional[float]:
    """First time at which ``max(|c1(t)|, |c2(t)|)`` drops to ``|c3|`` in the common bath.

    With ``x = xi^4(t)`` the larger transverse correlation is
    ``|c1 + c2|/2 + |c1 - c2| x / 2``, so the switch happens at
    ``x* = (|c3| - |c1 + c2|/2) / (|c1 - c2|/2)`` provided ``0 < x* < 1`` and
    the decoherence function reaches ``-ln(x*)/4``.

    Raises
    ------
    ConstantIP
        If ``c1 == c2``: the evolution leaves the state unchanged.
    """
    c1, c2, c3 = _as_cm(c).c
    if c1 == c2:
        raise ConstantIP("c1 == c2: transverse correlations and IP stay constant")
    mean, half = abs(c1 + c2) / 2.0, abs(c1 - c2) / 2.0
    x_star = (abs(c3) - mean) / half
    if not 0.0 < x_star < 1.0:
        return None
    target = -math.log(x_star) / 4.0

    def g(t):
        return channels.bath_gamma(float(t), s, wc) - target

    # Gamma may overshoot its long-time value, so scan for the first crossing
    return _first_crossing(g, 50.0 / wc, 5001)


def predict_colored_nu(c, a: float, tau: float, nu_max: float = 20.0) -> Optional[float]:
    """First ``nu`` with ``Lambda(nu)^2 max(|c1|, |c2|) = |c3|`` under colored dephasing."""
    c1, c2, c3 = _as_cm(c).c
    top = max(abs(c1), abs(c2))
    if c3 == 0 or abs(c3) >= top:
        return None

    def g(nu):
        return channels.colored_dephasing_lambda(float(nu), a, tau) ** 2 * top - abs(c3)

    return _first_crossing(g, nu_max, 20001)


def predict_first_kink(family: ChannelFamily, initial: XState) -> Optional[float]:
    """Analytic first switch time for a Bell-diagonal initial state, where one exists.

    Returns ``None`` when no formula applies or no switch is predicted.
    Raises :class:`ConstantIP` for the common bath with ``c1 == c2``.
    """
    if not initial.is_bell_diagonal:
        return None
    p = family.p
    c = initial.c
    if family.name == "phase":
        return predict_phase_t0(c, p["tau"])
    if family.name == "colored":
        return predict_colored_nu(c, p["a"], p["tau"])
    if family.name == "bath":
        return predict_bath_kink(c, p["s"], p["wc"])
    return None
