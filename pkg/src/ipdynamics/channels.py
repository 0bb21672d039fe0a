"""Decoherence channels acting on two-qubit X states.

Each constructor returns a :class:`KrausChannel` holding the 4x4 Kraus
operators together with the equivalent closed-form map on
:class:`~ipdynamics.states.XState` parameters.  The two routes are
independent: ``apply`` works on raw matrices, ``xmap`` on the five
parameters, and tests compare them.

One-sided channels act on qubit A.  :func:`on_b` mirrors them onto qubit B.
:class:`ChannelFamily` turns a channel spec string such as
``"colored:a=1,tau=0.5"`` into a time-parameterized family.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from . import qmat
from .errors import (
    ChannelSpecError,
    NotCPTP,
    ParamOutOfRange,
    QuadratureFailure,
    UnknownChannel,
)
from .states import XState

COMPLETENESS_TOL = 1e-10
BATH_RTOL = 1e-10

XMap = Callable[[XState], XState]


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CPTP map given by Kraus operators on two qubits.

    Attributes
    ----------
    name : str
        Channel identifier.
    operators : tuple of ndarray
        4x4 Kraus operators.
    params : dict
        Parameter values the channel was built from.
    xmap : callable or None
        Closed-form action on X-state parameters, if the channel keeps X form.
    local : tuple of ndarray or None
        2x2 single-qubit Kraus factors for one-sided channels.
    side : str
        ``"A"``, ``"B"`` or ``"AB"``.
    """

    name: str
    operators: tuple
    params: dict = field(default_factory=dict)
    xmap: Optional[XMap] = None
    local: Optional[tuple] = None
    side: str = "A"

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - qmat.IDENTITY4)))

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)


def _check_range(name: str, value: float, lo: float, hi: float) -> float:
    value = float(value)
    if not (lo <= value <= hi) or math.isnan(value):
        raise ParamOutOfRange(f"{name}={value!r} outside [{lo}, {hi}]")
    return value


def _one_sided(name: str, local, params: dict, xmap: XMap) -> KrausChannel:
    local = tuple(np.asarray(k, dtype=complex) for k in local)
    ops = tuple(qmat.kron2(k, qmat.IDENTITY2) for k in local)
    return KrausChannel(name, ops, params, xmap, local, "A")


def apply(channel: KrausChannel, rho) -> np.ndarray:
    """Return ``sum_k K rho K^dagger``."""
    err = channel.completeness_error()
    if err > COMPLETENESS_TOL:
        raise NotCPTP(f"{channel.name}: completeness violated by {err:.3e}")
    rho = qmat.as_matrix(rho, dims=(4,))
    out = np.zeros((4, 4), dtype=complex)
    for k in channel.operators:
        out += qmat.sandwich(k, rho)
    return out


def _swap(state: XState) -> XState:
    return XState(state.s, state.r, state.c1, state.c2, state.c3)


def on_b(channel: KrausChannel) -> KrausChannel:
    """Mirror a one-sided channel onto qubit B."""
    if channel.local is None or channel.side != "A":
        raise ValueError(f"{channel.name} is not a single-qubit channel on A")
    ops = tuple(qmat.kron2(qmat.IDENTITY2, k) for k in channel.local)
    xmap = None
    if channel.xmap is not None:
        fa = channel.xmap
        xmap = lambda st: _swap(fa(_swap(st)))  # noqa: E731
    return KrausChannel(channel.name + "@B", ops, dict(channel.params), xmap, channel.local, "B")


def random_local_channel(rng: np.random.Generator, n_ops: int = 2, side: str = "B") -> KrausChannel:
    """Random single-qubit CPTP map (from a Haar-ish random isometry)."""
    g = rng.normal(size=(2 * n_ops, 2)) + 1j * rng.normal(size=(2 * n_ops, 2))
    iso, _ = np.linalg.qr(g)
    local = tuple(iso[2 * i : 2 * i + 2, :] for i in range(n_ops))
    if side == "A":
        ops = tuple(qmat.kron2(k, qmat.IDENTITY2) for k in local)
    elif side == "B":
        ops = tuple(qmat.kron2(qmat.IDENTITY2, k) for k in local)
    else:
        raise ValueError("side must be 'A' or 'B'")
    return KrausChannel("random", ops, {"n_ops": n_ops}, None, local, side)


# --- single-qubit channels on A ---------------------------------------------


def amplitude_channel(eta: float) -> KrausChannel:
    """Amplitude damping of qubit A toward |1>, coherences scaled by ``eta``."""
    eta = _check_range("eta", eta, 0.0, 1.0)
    k1 = np.diag([eta, 1.0])
    k2 = np.array([[0.0, 0.0], [math.sqrt(1.0 - eta * eta), 0.0]])
    loss = 1.0 - eta * eta

    def xmap(st: XState) -> XState:
        # written as corrections so that eta = 1 returns the input exactly
        return XState(
            r=st.r - loss * (1.0 + st.r),
            s=st.s,
            c1=eta * st.c1,
            c2=eta * st.c2,
            c3=st.c3 - loss * (st.c3 + st.s),
        )

    return _one_sided("amplitude", (k1, k2), {"eta": eta}, xmap)


def phase_channel(gamma: float) -> KrausChannel:
    """Dephasing of qubit A; transverse correlations are multiplied by ``gamma``."""
    gamma = _check_range("gamma", gamma, 0.0, 1.0)
    alpha = 0.5 * (1.0 + gamma)
    k1 = math.sqrt(alpha) * qmat.IDENTITY2
    k2 = math.sqrt(1.0 - alpha) * qmat.SIGMA_Z

    def xmap(st: XState) -> XState:
        return XState(st.r, st.s, gamma * st.c1, gamma * st.c2, st.c3)

    return _one_sided("phase", (k1, k2), {"gamma": gamma, "alpha": alpha}, xmap)


def depolarizing_channel(p: float) -> KrausChannel:
    p = _check_range("p", p, 0.0, 1.0)
    w = math.sqrt(p) / 2
    local = (
        math.sqrt(1.0 - 0.75 * p) * qmat.IDENTITY2,
        w * qmat.SIGMA_X,
        w * qmat.SIGMA_Y,
        w * qmat.SIGMA_Z,
    )
    f = 1.0 - p

    def xmap(st: XState) -> XState:
        return XState(f * st.r, st.s, f * st.c1, f * st.c2, f * st.c3)

    return _one_sided("depolarizing", local, {"p": p}, xmap)


# --- colored dephasing on both qubits ----------------------------------------


def colored_dephasing_lambda(nu: float, a: float, tau: float) -> float:
    """Coherence factor of random-telegraph dephasing at dimensionless time ``nu``.

    Uses the oscillating form when ``4 a tau > 1``, its hyperbolic
    continuation below, and ``exp(-nu) (1 + nu)`` at the critical point.
    """
    if nu < 0 or a <= 0 or tau <= 0 or any(map(math.isnan, (nu, a, tau))):
        raise ParamOutOfRange(f"need nu >= 0 and a, tau > 0 (nu={nu}, a={a}, tau={tau})")
    k = 4.0 * a * tau
    env = math.exp(-nu)
    if abs(k - 1.0) <= 1e-12:
        return env * (1.0 + nu)
    if k > 1.0:
        mu = math.sqrt(k * k - 1.0)
        return env * (math.cos(mu * nu) + math.sin(mu * nu) / mu)
    m = math.sqrt(1.0 - k * k)
    # cosh/sinh overflow long after exp(-nu) underflows, so combine in log space
    if m * nu > 700:
        return 0.5 * (1 + 1 / m) * math.exp((m - 1.0) * nu)
    return env * (math.cosh(m * nu) + math.sinh(m * nu) / m)


def colored_dephasing_channel_from_lambda(lam: float) -> KrausChannel:
    lam = _check_range("Lambda", lam, -1.0, 1.0)
    beta = 0.5 * (1.0 + lam)
    m1 = math.sqrt(beta) * qmat.IDENTITY2
    m2 = math.sqrt(1.0 - beta) * qmat.SIGMA_Z
    ops = tuple(qmat.kron2(mi, mj) for mi in (m1, m2) for mj in (m1, m2))
    l2 = lam * lam

    def xmap(st: XState) -> XState:
        return XState(st.r, st.s, l2 * st.c1, l2 * st.c2, st.c3)

    return KrausChannel("colored", ops, {"Lambda": lam, "beta": beta}, xmap, (m1, m2), "AB")


def colored_dephasing_channel(nu: float, a: float, tau: float) -> KrausChannel:
    lam = colored_dephasing_lambda(nu, a, tau)
    ch = colored_dephasing_channel_from_lambda(lam)
    ch.params.update(nu=nu, a=a, tau=tau)
    return ch


# --- common bosonic bath -------------------------------------------------------


def _bath_cutoff(s: float) -> float:
    # upper limit beyond which the spectral weight is below 1e-17
    u = 40.0
    while 2.0 * special.gamma(s - 1) * special.gammaincc(s - 1, u) > 1e-17:
        u *= 1.25
    return u


def _bath_gamma_quad(t: float, s: float, wc: float) -> float:
    # with u = omega/wc the integral only depends on T = wc t
    T = wc * t
    weight = lambda u: u ** (s - 2) * math.exp(-u)  # noqa: E731
    osc = lambda u: 2.0 * math.sin(0.5 * u * T) ** 2 * weight(u)  # noqa: E731
    upper = _bath_cutoff(s)
    opts = dict(epsabs=1e-15, epsrel=1e-12, limit=2000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if T <= 2.0:
            value, err = integrate.quad(osc, 0.0, upper, **opts)
        else:
            u0 = min(1.0, upper)
            head, e0 = integrate.quad(osc, 0.0, u0, **opts)
            flat, e1 = integrate.quad(weight, u0, upper, **opts)
            cos_part, e2 = integrate.quad(weight, u0, upper, weight="cos", wvar=T, **opts)
            value, err = head + flat - cos_part, e0 + e1 + e2
    if not math.isfinite(value) or err > BATH_RTOL * max(1.0, abs(value)):
        raise QuadratureFailure(f"Gamma(t={t}) quadrature error estimate {err:.2e} too large")
    return value


def bath_gamma_closed_form(t: float) -> float:
    """Decoherence function for the s=4, wc=1 spectral density."""
    t2 = t * t
    return 2.0 - 2.0 * (1.0 - 3.0 * t2) / (1.0 + t2) ** 3


def bath_gamma(t: float, s: float = 4.0, wc: float = 1.0, method: str = "auto") -> float:
    """Decoherence function of the common bath.

    ``Gamma(t) = int_0^inf (1 - cos wt) / w^2 * J(w) dw`` with
    ``J(w) = w^s / wc^(s-1) * exp(-w/wc)``.

    Parameters
    ----------
    method : {"auto", "quad", "closed"}
        ``auto`` takes the closed form for ``s=4, wc=1`` and adaptive
        quadrature otherwise.
    """
    if t < 0 or s <= 1 or wc <= 0 or any(map(math.isnan, (t, s, wc))):
        raise ParamOutOfRange(f"need t >= 0, s > 1, wc > 0 (t={t}, s={s}, wc={wc})")
    if t == 0:
        return 0.0
    if method == "closed" or (method == "auto" and s == 4 and wc == 1):
        if s != 4 or wc != 1:
            raise ParamOutOfRange("closed form only exists for s=4, wc=1")
        return bath_gamma_closed_form(t)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    return _bath_gamma_quad(t, s, wc)


def bath_gamma_infinity(s: float) -> float:
    """Long-time limit of the decoherence function, ``Gamma_fn(s - 1)``."""
    return float(special.gamma(s - 1))


def common_bath_channel_from_xi4(xi4: float) -> KrausChannel:
    xi4 = _check_range("xi^4", xi4, 0.0, 1.0)
    chi = 0.5 * (xi4 + 1.0)
    h = 1.0 / math.sqrt(2.0)
    k1 = np.diag([math.sqrt(chi), h, h, math.sqrt(chi)]).astype(complex)
    k2 = np.diag([math.sqrt(1.0 - chi), h, h, -math.sqrt(1.0 - chi)]).astype(complex)

    def xmap(st: XState) -> XState:
        return XState(
            st.r,
            st.s,
            0.5 * ((1 + xi4) * st.c1 + (1 - xi4) * st.c2),
            0.5 * ((1 - xi4) * st.c1 + (1 + xi4) * st.c2),
            st.c3,
        )

    return KrausChannel("bath", (k1, k2), {"xi4": xi4, "chi": chi}, xmap, None, "AB")


def common_bath_channel(t: float, s: float = 4.0, wc: float = 1.0) -> KrausChannel:
    g = bath_gamma(t, s, wc)
    ch = common_bath_channel_from_xi4(math.exp(-4.0 * g))
    ch.params.update(t=t, s=s, wc=wc, Gamma=g)
    return ch


# --- time-parameterized families ---------------------------------------------

_SPEC_KEYS = {
    "amplitude": {"tau": 1.0},
    "phase": {"tau": 1.0},
    "depolarizing": {"tau": 1.0},
    "colored": {"a": 1.0, "tau": 0.5},
    "bath": {"s": 4.0, "wc": 1.0},
}


@dataclass(frozen=True)
class ChannelFamily:
    """A channel parameterized by a time coordinate.

    The time coordinate is physical time ``t`` for every family except
    ``colored``, where it is the dimensionless time ``nu = t / (2 tau)``.
    """

    name: str
    params: tuple  # sorted (key, value) pairs

    @property
    def p(self) -> dict:
        return dict(self.params)

    @property
    def time_symbol(self) -> str:
        return "nu" if self.name == "colored" else "t"

    @property
    def preserves_bell_diagonal(self) -> bool:
        return self.name != "amplitude"

    def at(self, t: float) -> KrausChannel:
        if t < 0:
            raise ParamOutOfRange(f"time must be non-negative, got {t}")
        p = self.p
        if self.name == "amplitude":
            return amplitude_channel(math.exp(-0.5 * p["tau"] * t))
        if self.name == "phase":
            return phase_channel(math.exp(-0.5 * p["tau"] * t))
        if self.name == "depolarizing":
            return depolarizing_channel(-math.expm1(-p["tau"] * t))
        if self.name == "colored":
            return colored_dephasing_channel(t, p["a"], p["tau"])
        if self.name == "bath":
            return common_bath_channel(t, p["s"], p["wc"])
        raise UnknownChannel(self.name)

    def state_at(self, initial: XState, t: float) -> XState:
        return self.at(t).xmap(initial)

    def default_grid(self, points: int = 2001) -> np.ndarray:
        return np.linspace(0.0, self.default_tmax(), points)

    def default_tmax(self) -> float:
        if self.name in ("amplitude", "phase", "depolarizing"):
            return 5.0 / self.p["tau"]
        if self.name == "colored":
            return 3.0
        return 5.0

    def spec(self) -> str:
        return self.name + ":" + ",".join(f"{k}={v:g}" for k, v in self.params)


def parse_channel_spec(text: str) -> ChannelFamily:
    """Parse ``"name:key=value,..."``; omitted keys take their defaults."""
    name, _, rest = text.strip().partition(":")
    name = name.strip().lower()
    if name not in _SPEC_KEYS:
        raise UnknownChannel(f"unknown channel {name!r}; expected one of {sorted(_SPEC_KEYS)}")
    values = dict(_SPEC_KEYS[name])
    for item in filter(None, (x.strip() for x in rest.split(","))):
        key, eq, raw = item.partition("=")
        key = key.strip()
        if not eq or key not in values:
            raise ChannelSpecError(f"bad parameter {item!r} for channel {name!r}")
        try:
            values[key] = float(raw)
        except ValueError as exc:
            raise ChannelSpecError(f"bad value in {item!r}") from exc
    positive = {k: v for k, v in values.items() if not (v > 0 and math.isfinite(v))}
    if positive:
        raise ChannelSpecError(f"parameters must be positive and finite: {positive}")
    if name == "bath" and values["s"] <= 1:
        raise ChannelSpecError("bath exponent s must exceed 1")
    return ChannelFamily(name, tuple(sorted(values.items())))
