"""Seeded self-verification suites behind ``ipdyn verify``.

Every check draws its inputs from one ``numpy`` generator seeded by the
caller, so a run is reproducible bit for bit.  Each check reports the worst
deviation it saw against its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from . import channels, dynamics, ip, qmat
from .channels import parse_channel_spec
from .errors import ConstantIP
from .states import from_density_matrix, random_bell_diagonal, random_xstate, to_density_matrix

FAMILY_SPECS = (
    "amplitude:tau=1",
    "phase:tau=1",
    "depolarizing:tau=1",
    "colored:a=1,tau=0.5",
    "bath:s=4,wc=1",
)
GAMMA_TIMES = (0.1, 0.5, 1.0, 2.0, 5.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    count: int
    detail: str = ""


def _check(name: str, worst: float, tol: float, count: int, detail: str = "") -> CheckResult:
    ok = bool(np.isfinite(worst)) and worst <= tol
    return CheckResult(name, ok, float(worst), tol, count, detail=detail)


def random_density_matrix(rng: np.random.Generator) -> np.ndarray:
    """Full-rank random two-qubit state from a complex Ginibre matrix."""
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def check_route_agreement(rng, samples: int, canary: bool = False) -> list[CheckResult]:
    states = [random_xstate(rng) for _ in range(samples)]
    rhos = [to_density_matrix(s) for s in states]
    closed = np.array([ip.ip_xstate(s).value for s in states])
    general = np.array([ip.ip_general(r) for r in rhos])
    brute, _ = ip.ip_bruteforce_many(rhos)
    worst = max(np.max(np.abs(closed - general)), np.max(np.abs(brute - general)), np.max(np.abs(brute - closed)))
    out = [_check("route agreement (X state routes)", worst, 1e-7, samples)]

    det_sign = -1.0 if canary else 1.0
    worst_bell = 0.0
    for _ in range(samples):
        st = random_bell_diagonal(rng)
        m = ip.m_matrix(to_density_matrix(st))
        bell = ip.ip_bell_diagonal(st.c, det_sign=det_sign)
        diag = np.array(ip.bell_m_diagonal(st.c))
        worst_bell = max(worst_bell, abs(bell - m.smallest_eigenvalue), float(np.max(np.abs(diag - np.diag(m.entries)))))
    detail = "canary: determinant sign flipped" if canary else ""
    out.append(_check("route agreement (Bell-diagonal closed form)", worst_bell, 1e-9, samples, detail))
    return out


def check_channels(rng, samples: int) -> list[CheckResult]:
    families = [parse_channel_spec(s) for s in FAMILY_SPECS]
    worst_cptp = 0.0
    for fam in families:
        for t in np.linspace(0.0, fam.default_tmax(), 11):
            worst_cptp = max(worst_cptp, fam.at(float(t)).completeness_error())
    out = [_check("channel completeness", worst_cptp, 1e-10, 11 * len(families))]

    worst_map = 0.0
    for fam in families:
        for _ in range(samples):
            st = random_xstate(rng)
            ch = fam.at(float(rng.uniform(0.0, fam.default_tmax())))
            if rng.random() < 0.5 and ch.side == "A":
                ch = channels.on_b(ch)
            kraus = from_density_matrix(channels.apply(ch, to_density_matrix(st)), tol=1e-12)
            diff = np.abs(np.array(ch.xmap(st).as_tuple()) - np.array(kraus.as_tuple()))
            worst_map = max(worst_map, float(np.max(diff)))
    out.append(_check("coefficient map vs Kraus route", worst_map, 1e-11, samples * len(families)))

    worst_gamma = max(
        abs(channels.bath_gamma(t, 4.0, 1.0, method="quad") - channels.bath_gamma_closed_form(t)) for t in GAMMA_TIMES
    )
    out.append(_check("bath decoherence quadrature", worst_gamma, 1e-9, len(GAMMA_TIMES)))
    return out


def check_properties(rng, samples: int) -> list[CheckResult]:
    n = min(samples, 200)
    out = []

    worst = 0.0
    for _ in range(n):
        basis = unitary_group.rvs(2, random_state=rng)
        probs = rng.dirichlet(np.ones(2))
        rho = np.zeros((4, 4), dtype=complex)
        for k in range(2):
            proj = np.outer(basis[:, k], basis[:, k].conj())
            rho += probs[k] * qmat.kron2(proj, _random_qubit(rng))
        worst = max(worst, abs(ip.ip_general(rho)))
    out.append(_check("(i) classical-quantum states have zero IP", worst, 1e-10, n))

    worst = 0.0
    for _ in range(n):
        rho = random_density_matrix(rng)
        u = qmat.kron2(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))
        worst = max(worst, abs(ip.ip_general(u @ rho @ u.conj().T) - ip.ip_general(rho)))
    out.append(_check("(ii) local-unitary invariance", worst, 1e-9, n))

    worst = 0.0
    for _ in range(n):
        rho = random_density_matrix(rng)
        ch = channels.random_local_channel(rng, n_ops=int(rng.integers(1, 5)), side="B")
        worst = max(worst, ip.ip_general(channels.apply(ch, rho)) - ip.ip_general(rho), 0.0)
    out.append(_check("(iii) monotone under channels on B", worst, 1e-9, n))

    phi_plus = np.zeros(4, dtype=complex)
    phi_plus[[0, 3]] = 1.0 / math.sqrt(2.0)
    value = ip.ip_general(np.outer(phi_plus, phi_plus.conj()))
    out.append(_check("(iv) maximally entangled pure state has IP 1", abs(value - 1.0), 1e-9, 1))
    return out


def _random_qubit(rng) -> np.ndarray:
    v = rng.normal(size=3)
    v *= rng.uniform() / np.linalg.norm(v)
    return 0.5 * (qmat.IDENTITY2 + sum(x * p for x, p in zip(v, qmat.PAULIS)))


def _draw_predicted(rng, predictor, lo: float, hi: float, tries: int = 10000):
    for _ in range(tries):
        st = random_bell_diagonal(rng)
        try:
            t = predictor(st)
        except ConstantIP:
            continue
        if t is not None and lo < t < hi:
            return st, t
    raise RuntimeError("could not draw a state with a predicted sudden change")


def check_predictors(rng, samples: int) -> list[CheckResult]:
    n = min(samples, 6)
    out = []
    cases = (
        ("phase", "phase:tau=1", lambda st: dynamics.predict_phase_t0(st.c, 1.0), 1e-6),
        ("colored", "colored:a=1,tau=0.5", lambda st: dynamics.predict_colored_nu(st.c, 1.0, 0.5), 1e-3),
        ("bath", "bath:s=4,wc=1", lambda st: dynamics.predict_bath_kink(st.c, 4.0, 1.0), 1e-3),
    )
    for label, spec, predictor, tol in cases:
        fam = parse_channel_spec(spec)
        tmax = fam.default_tmax()
        worst = 0.0
        for _ in range(n):
            st, predicted = _draw_predicted(rng, predictor, 0.05 * tmax, 0.95 * tmax)
            events = dynamics.detect_kinks(dynamics.evolve(fam, st, fam.default_grid()))
            worst = max(worst, abs(events[0].t_star - predicted) if events else math.inf)
        out.append(_check(f"predictor agreement ({label})", worst, tol, n))

    fam = parse_channel_spec("depolarizing:tau=1")
    kinks = 0
    for _ in range(n):
        kinks += len(dynamics.detect_kinks(dynamics.evolve(fam, random_bell_diagonal(rng), fam.default_grid())))
    out.append(_check("no sudden change under depolarizing noise", kinks, 0, n))
    return out


def run_all(seed: int = 0, samples: int = 1000, canary: bool = False) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    suites = (
        lambda: check_route_agreement(rng, samples, canary),
        lambda: check_channels(rng, samples),
        lambda: check_properties(rng, samples),
        lambda: check_predictors(rng, samples),
    )
    results = []
    for suite in suites:
        results.extend(suite())
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'status':<6}  {'worst':>10}  {'tol':>8}  {'n':>5}"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{r.name:<{width}}  {status:<6}  {r.worst:>10.3e}  {r.tol:>8.0e}  {r.count:>5}"
        if r.detail:
            line += f"  ({r.detail})"
        lines.append(line)
    failed = [r.name for r in results if not r.passed]
    lines.append("all checks passed" if not failed else "FAILED: " + "; ".join(failed))
    return "\n".join(lines)
