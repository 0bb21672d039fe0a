import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.linalg import solve_sylvester
from scipy.stats import unitary_group

from ipdynamics import channels, ip, qmat
from ipdynamics.errors import DegenerateFallback, InvalidState
from ipdynamics.states import XState, to_density_matrix
from strategies import bell_states, density_matrices, x_states


def sld_qfi(rho, h):
    # Tr(rho L^2) with rho L + L rho = 2 d(rho), d(rho) = -i [h, rho]
    drho = -1j * (h @ rho - rho @ h)
    sld = solve_sylvester(rho, rho, 2 * drho)
    return float(np.trace(rho @ sld @ sld).real)


def sld_ip(rho):
    # the QFI is a quadratic form in the probe direction; recover it by polarization
    e = np.eye(3)
    gen = lambda n: qmat.kron2(sum(c * p for c, p in zip(n, qmat.PAULIS)), qmat.IDENTITY2)  # noqa: E731
    q = np.array([[sld_qfi(rho, gen(e[m] + e[n])) for n in range(3)] for m in range(3)]) / 4
    diag = np.array([sld_qfi(rho, gen(e[m])) for m in range(3)]) / 4
    form = 0.5 * (q - diag[:, None] - diag[None, :])
    return np.linalg.eigvalsh(form)[0], form


def test_qfi_matches_sld_oracle(rng):
    for _ in range(50):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        h = qmat.kron2(sum(c * p for c, p in zip(n, qmat.PAULIS)), qmat.IDENTITY2)
        assert ip.qfi(rho, n) == pytest.approx(sld_qfi(rho, h), rel=1e-9, abs=1e-12)
        value, form = sld_ip(rho)
        m = ip.m_matrix(rho)
        assert np.allclose(m.entries, form, atol=1e-9)
        assert ip.ip_general(rho) == pytest.approx(value, abs=1e-9)


def test_qfi_of_pure_state_is_four_times_variance():
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    rho = np.outer(psi, psi)
    assert ip.qfi(rho, [0, 0, 1]) == pytest.approx(4.0)
    assert ip.ip_general(rho) == pytest.approx(1.0, abs=1e-12)


def test_qfi_rejects_non_unit_direction():
    with pytest.raises(ValueError):
        ip.qfi(np.eye(4) / 4, [1, 1, 0])


def test_reference_bell_state_value():
    # M11 = (c2^2 + c3^2 + 2 c1 c2 c3) / (1 - c1^2) = 0.124 / 0.84
    br = ip.ip_xstate(XState.bell(0.4, 0.1, 0.3))
    assert br.value == pytest.approx(31 / 210, abs=1e-12)
    assert br.active == "M11"
    assert br.values == pytest.approx((31 / 210, 0.274 / 0.99, 0.194 / 0.91), abs=1e-12)
    assert ip.ip_bell_diagonal((0.4, 0.1, 0.3)) == pytest.approx(31 / 210, abs=1e-12)


def test_maximally_mixed_and_product_states_have_zero_ip():
    assert ip.ip_xstate(XState.bell(0, 0, 0)).value == 0.0
    assert ip.ip_general(to_density_matrix(XState(0.3, -0.5, 0, 0, -0.15))) == pytest.approx(0, abs=1e-12)


@given(x_states())
def test_closed_form_matches_general_route(state):
    br = ip.ip_xstate(state)
    m = ip.m_matrix(to_density_matrix(state))
    assert br.value == pytest.approx(m.smallest_eigenvalue, abs=1e-9)
    # M is diagonal for X states and its diagonal holds the branch values
    assert np.allclose(np.diag(m.entries), br.values, atol=1e-9)
    assert np.max(np.abs(m.entries - np.diag(np.diag(m.entries)))) < 1e-10
    assert -1e-12 <= br.value <= 1 + 1e-12


@given(bell_states())
def test_bell_closed_form_and_diagonal(state):
    m = ip.m_matrix(to_density_matrix(state))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateFallback)
        assert ip.ip_bell_diagonal(state.c) == pytest.approx(m.smallest_eigenvalue, abs=1e-9)
    diag = np.array(ip.bell_m_diagonal(state.c))
    finite = np.isfinite(diag)
    assert np.allclose(diag[finite], np.diag(m.entries)[finite], atol=1e-9)


def test_determinant_sign_matters():
    c = (0.4, 0.1, 0.3)
    assert abs(ip.ip_bell_diagonal(c, det_sign=-1.0) - ip.ip_bell_diagonal(c)) > 1e-3


def test_bell_formula_falls_back_at_unit_operator_norm():
    with pytest.warns(DegenerateFallback):
        assert ip.ip_bell_diagonal((1, -1, 1)) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(InvalidState):
        ip.ip_bell_diagonal((1, 1, 1))


def test_degenerate_states_use_general_route():
    br = ip.ip_xstate(XState(0.1, 0.2, 0.3, 0.3, 0.1))
    assert br.route == "general"
    assert br.value == pytest.approx(ip.ip_general(to_density_matrix(XState(0.1, 0.2, 0.3, 0.3, 0.1))), abs=1e-12)


def test_selection_rule_candidates():
    # only M22 and M33 compete when |c1| < |c2|
    br = ip.ip_xstate(XState(0.2, 0.1, 0.1, 0.3, 0.2))
    assert br.active in ("M22", "M33")
    assert br.value == min(br.m22, br.m33)


def test_bruteforce_oracle(rng):
    for _ in range(20):
        state = XState(*rng.uniform(-0.25, 0.25, size=5))
        rho = to_density_matrix(state)
        value, direction = ip.ip_bruteforce(rho)
        assert value == pytest.approx(ip.ip_general(rho), abs=1e-9)
        assert np.linalg.norm(direction) == pytest.approx(1.0)
        assert ip.qfi(rho, direction) / 4 == pytest.approx(value, abs=1e-12)


@settings(max_examples=40)
@given(density_matrices())
def test_local_unitary_invariance(rho):
    rng = np.random.default_rng(7)
    u = qmat.kron2(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))
    assert ip.ip_general(u @ rho @ u.conj().T) == pytest.approx(ip.ip_general(rho), abs=1e-9)


@settings(max_examples=40)
@given(density_matrices())
def test_monotone_under_channels_on_b(rho):
    rng = np.random.default_rng(11)
    ch = channels.random_local_channel(rng, 3, side="B")
    assert ip.ip_general(channels.apply(ch, rho)) <= ip.ip_general(rho) + 1e-9


def test_classical_quantum_states_have_zero_ip(rng):
    for _ in range(50):
        u = unitary_group.rvs(2, random_state=rng)
        rho = np.zeros((4, 4), dtype=complex)
        for k, p in enumerate(rng.dirichlet([1, 1])):
            b = rng.normal(size=3)
            b *= rng.uniform() / np.linalg.norm(b)
            sigma = 0.5 * (qmat.IDENTITY2 + sum(x * s for x, s in zip(b, qmat.PAULIS)))
            rho += p * qmat.kron2(np.outer(u[:, k], u[:, k].conj()), sigma)
        assert abs(ip.ip_general(rho)) <= 1e-10


def test_invalid_density_matrices():
    with pytest.raises(InvalidState):
        ip.ip_general(np.eye(4) / 2)
    with pytest.raises(InvalidState):
        ip.ip_general(np.diag([1.5, -0.5, 0, 0]))
