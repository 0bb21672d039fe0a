import math

import numpy as np
import pytest

from ipdynamics import channels, dynamics
from ipdynamics.channels import parse_channel_spec
from ipdynamics.errors import ConstantIP, InvalidState, RouteMismatch
from ipdynamics.ip import ip_xstate
from ipdynamics.states import XState, is_valid


def kinks(spec, c, points=2001, tmax=None):
    fam = parse_channel_spec(spec)
    times = fam.default_grid(points) if tmax is None else np.linspace(0, tmax, points)
    return dynamics.detect_kinks(dynamics.evolve(fam, XState.bell(*c), times))


def test_single_point_trajectory_matches_static_ip():
    st = XState(0.1, -0.1, 0.3, 0.2, 0.25)
    tr = dynamics.evolve(parse_channel_spec("amplitude"), st, [0.0])
    assert tr.states[0] == st
    assert tr.ip_values[0] == ip_xstate(st).value


def test_trajectory_invariants():
    fam = parse_channel_spec("amplitude:tau=2")
    tr = dynamics.evolve(fam, XState(0.2, 0.1, 0.3, -0.2, 0.1), fam.default_grid(101))
    assert len(tr.states) == len(tr.ip_values) == len(tr.branches) == len(tr) == 101
    assert all(is_valid(s) for s in tr.states)
    assert not tr.bell_tracking
    for s, v in zip(tr.states[::10], tr.ip_values[::10]):
        assert v == pytest.approx(ip_xstate(s).value, abs=1e-9)


def test_evolve_rejects_bad_input():
    fam = parse_channel_spec("phase")
    with pytest.raises(InvalidState):
        dynamics.evolve(fam, XState.bell(1, 1, 1), [0.0, 1.0])
    with pytest.raises(ValueError):
        dynamics.evolve(fam, XState.bell(0.1, 0.1, 0.1), [1.0, 0.0])
    with pytest.raises(ValueError):
        dynamics.evolve(fam, XState.bell(0.1, 0.1, 0.1), [])


def test_route_cross_check_catches_wrong_map(monkeypatch):
    fam = parse_channel_spec("phase")
    real = channels.phase_channel

    def skewed(gamma):
        ch = real(gamma)
        return channels.KrausChannel(ch.name, ch.operators, ch.params, lambda s: XState(s.r, s.s, s.c1, s.c2, 0.9 * s.c3), ch.local)

    monkeypatch.setattr(channels, "phase_channel", skewed)
    with pytest.raises(RouteMismatch):
        dynamics.evolve(fam, XState.bell(0.4, 0.1, 0.3), fam.default_grid(11))


def test_depolarizing_is_smooth_and_decreasing():
    fam = parse_channel_spec("depolarizing")
    tr = dynamics.evolve(fam, XState.bell(0.4, 0.3, 0.2), fam.default_grid())
    assert np.all(np.diff(tr.ip_values) < 0)
    assert dynamics.detect_kinks(tr) == []


def test_phase_kink_matches_prediction():
    (ev,) = kinks("phase:tau=1", (0.4, 0.1, 0.3))
    assert ev.t_star == pytest.approx(2 * math.log(4 / 3), abs=1e-6)
    assert (ev.branch_before, ev.branch_after) == ("M11", "M33")
    assert ev.slope_jump > 1e-6 and ev.kind == "branch-switch"


@pytest.mark.parametrize("c", [(0.1, 0.3, 0.4), (0.4, 0.3, 0.0)])
def test_phase_no_kink_situations(c):
    assert kinks("phase:tau=1", c) == []
    assert dynamics.predict_phase_t0(c, 1.0) is None


def test_phase_prediction_scales_with_rate():
    assert dynamics.predict_phase_t0((0.4, 0.1, 0.3), 1.0) == pytest.approx(0.575364144904, abs=1e-11)
    assert dynamics.predict_phase_t0((0.4, 0.1, 0.3), 2.0) == pytest.approx(math.log(4 / 3), abs=1e-12)
    with pytest.raises(ValueError):
        dynamics.predict_phase_t0((0.4, 0.1, 0.3), 0.0)


def test_ip_is_continuous_across_kinks():
    fam = parse_channel_spec("amplitude")
    st = XState.bell(0.3, 0.2, 0.301)
    events = dynamics.detect_kinks(dynamics.evolve(fam, st, fam.default_grid()))
    assert len(events) >= 1
    for ev in events:
        left = ip_xstate(fam.state_at(st, ev.t_star - 1e-10)).value
        right = ip_xstate(fam.state_at(st, ev.t_star + 1e-10)).value
        assert abs(left - right) <= 1e-8


def test_amplitude_predictor_is_only_sufficient():
    assert dynamics.predict_amplitude_kink((0.4, 0.2, 0.3))
    assert kinks("amplitude", (0.4, 0.2, 0.3))
    assert not dynamics.predict_amplitude_kink((0.3, 0.2, 0.301))
    assert kinks("amplitude", (0.3, 0.2, 0.301))
    assert not dynamics.predict_amplitude_kink((0, 0, 0.5))
    assert kinks("amplitude", (0, 0, 0.5)) == []


def test_amplitude_long_time_limit():
    fam = parse_channel_spec("amplitude")
    st = fam.state_at(XState.bell(0.4, 0.2, 0.3), 60.0)
    assert ip_xstate(st).value <= 1e-8
    assert st.r == pytest.approx(-1.0, abs=1e-8)
    assert abs(st.c1) + abs(st.c2) <= 1e-8
    assert st.c3 == pytest.approx(-st.s, abs=1e-8)  # product of |1><1| and the B marginal


def test_colored_kink():
    (first, *_) = kinks("colored:a=1,tau=0.5", (0.3, 0.4, 0.2))
    assert first.t_star == pytest.approx(0.455, abs=1e-3)
    assert first.t_star == pytest.approx(dynamics.predict_colored_nu((0.3, 0.4, 0.2), 1.0, 0.5), abs=1e-9)


def test_colored_predictor_edge_cases():
    assert dynamics.predict_colored_nu((0.3, 0.4, 0.0), 1.0, 0.5) is None
    assert dynamics.predict_colored_nu((0.3, 0.2, 0.4), 1.0, 0.5) is None
    # overdamped regime still crosses once
    nu = dynamics.predict_colored_nu((0.4, 0.1, 0.2), 0.1, 1.0)
    assert channels.colored_dephasing_lambda(nu, 0.1, 1.0) ** 2 * 0.4 == pytest.approx(0.2, abs=1e-12)


def test_bath_predictions():
    # c1(t) = 0.15 + 0.25 xi^4 reaches 0.16 at xi^4 = 0.04, i.e. Gamma = ln(25)/4
    t_star = dynamics.predict_bath_kink((0.4, -0.1, 0.16))
    assert channels.bath_gamma(t_star) == pytest.approx(math.log(25) / 4, abs=1e-12)
    assert t_star == pytest.approx(0.286, abs=5e-3)
    (ev,) = kinks("bath", (0.4, -0.1, 0.16))
    assert ev.t_star == pytest.approx(t_star, abs=1e-6)
    assert dynamics.predict_bath_kink((0.4, -0.1, 0.14)) is None
    assert kinks("bath", (0.4, -0.1, 0.14)) == []
    with pytest.raises(ConstantIP):
        dynamics.predict_bath_kink((0.2, 0.2, 0.1))


def test_bath_prediction_with_other_spectrum():
    t_star = dynamics.predict_bath_kink((0.4, -0.1, 0.16), s=3.0, wc=2.0)
    assert channels.bath_gamma(t_star, 3.0, 2.0) == pytest.approx(math.log(25) / 4, abs=1e-9)


def test_bath_equal_transverse_correlations_give_constant_ip():
    fam = parse_channel_spec("bath")
    tr = dynamics.evolve(fam, XState.bell(0.3, 0.3, -0.2), fam.default_grid(201))
    assert np.ptp(tr.ip_values) <= 1e-10


def test_predict_first_kink_dispatch():
    st = XState.bell(0.4, 0.1, 0.3)
    assert dynamics.predict_first_kink(parse_channel_spec("phase"), st) == pytest.approx(2 * math.log(4 / 3))
    assert dynamics.predict_first_kink(parse_channel_spec("depolarizing"), st) is None
    assert dynamics.predict_first_kink(parse_channel_spec("phase"), XState(0.1, 0, 0.4, 0.1, 0.3)) is None


def test_threshold_discards_small_slope_jumps():
    fam = parse_channel_spec("phase")
    tr = dynamics.evolve(fam, XState.bell(0.4, 0.1, 0.3), fam.default_grid())
    assert dynamics.detect_kinks(tr, slope_jump_threshold=1.0) == []


def test_detect_kinks_needs_three_points():
    fam = parse_channel_spec("phase")
    with pytest.raises(ValueError):
        dynamics.detect_kinks(dynamics.evolve(fam, XState.bell(0.4, 0.1, 0.3), [0.0, 1.0]))


def test_discord_kinks_require_discord():
    fam = parse_channel_spec("phase")
    with pytest.raises(ValueError):
        dynamics.detect_discord_kinks(dynamics.evolve(fam, XState.bell(0.4, 0.1, 0.3), fam.default_grid(5)))


def test_discord_kink_location():
    # oracle: crossing of the z- and x-measurement conditional entropies at t = 0.0067031
    fam = parse_channel_spec("amplitude")
    tr = dynamics.evolve(fam, XState.bell(0.3, 0.2, 0.301), fam.default_grid(201), with_discord=True)
    (ev,) = dynamics.detect_discord_kinks(tr)
    assert ev.t_star == pytest.approx(0.0067031, abs=1e-6)
    assert (ev.branch_before, ev.branch_after) == ("z", "x")
