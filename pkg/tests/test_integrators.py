import math

import numpy as np
import pytest

from oracles import center_ode, width_ode
from scaled_tunnel.closed_form import width_ck_closed, width_classical, width_frictionless
from scaled_tunnel.integrators import (DivergenceError, StiffnessError, WidthCollapseError,
                                       _B, _P, evolve_center, evolve_packet, evolve_width,
                                       integrate_rk, second_order)
from scaled_tunnel.model import BarrierField, PacketInit, PacketState, SystemParams

INIT = PacketInit()
V2 = -0.04
T = np.linspace(0.0, 150.0, 1501)


def oscillator(t, y):
    return np.array([y[1], -y[0]])


def test_dense_matrix_consistent_with_weights():
    # the interpolant must land on the 5th-order solution at the step end
    np.testing.assert_allclose(_P.sum(axis=1), _B, atol=1e-15)


def test_harmonic_oscillator():
    sol = integrate_rk(oscillator, [1.0, 0.0], (0.0, math.pi), tol=1e-10)
    assert sol.y[-1, 0] == pytest.approx(-1.0, abs=1e-9)
    assert sol.times[0] == 0.0 and sol.times[-1] == math.pi
    assert set(sol.stats) >= {"n_steps", "n_rejected", "n_fev", "max_error_estimate"}


def test_pure_damping():
    g = 0.3
    sol = integrate_rk(second_order(lambda t, x, v: -g * v), [0.0, 2.0], (0.0, 10.0),
                       t_eval=np.linspace(0, 10, 11))
    np.testing.assert_allclose(sol.y[:, 1], 2.0 * np.exp(-g * sol.times), rtol=1e-9)


def test_dense_output_accuracy():
    sol = integrate_rk(oscillator, [1.0, 0.0], (0.0, 20.0), tol=1e-10)
    t = np.linspace(0.0, 20.0, 997)
    np.testing.assert_allclose(sol(t)[:, 0], np.cos(t), atol=1e-8)
    assert sol(3.3).shape == (2,)


def test_global_error_tracks_tolerance():
    t = np.linspace(0.0, 30.0, 301)
    ratios = []
    for tol in (1e-5, 1e-6, 1e-7, 1e-8, 1e-9):
        sol = integrate_rk(oscillator, [1.0, 0.0], (0.0, 30.0), tol=tol, atol=tol * 1e-2,
                           t_eval=t)
        ratios.append(np.max(np.abs(sol.y[:, 0] - np.cos(t))) / tol)
    # error / tol stays flat: the global error is O(tol)
    assert max(ratios) < 10.0
    assert max(ratios) / min(ratios) < 2.0


def test_backward_integration_and_time_reversal():
    rhs = second_order(lambda t, x, v: 0.04 * x + 0.25 / x ** 3)
    fwd = integrate_rk(rhs, [1.0, 0.0], (0.0, 20.0), tol=1e-10)
    back = integrate_rk(rhs, fwd.y[-1], (20.0, 0.0), tol=1e-10)
    np.testing.assert_allclose(back.y[-1], [1.0, 0.0], atol=1e-8)
    assert back(10.0) == pytest.approx(fwd(10.0), rel=1e-8)


def test_errors():
    with pytest.raises(DivergenceError):
        integrate_rk(lambda t, y: np.array([np.nan]), [1.0], (0.0, 1.0))
    with pytest.raises(StiffnessError):
        integrate_rk(lambda t, y: np.array([1.0 / (1.0 - t) ** 2]), [0.0], (0.0, 2.0))
    with pytest.raises(ValueError):
        integrate_rk(oscillator, [1.0, 0.0], (0.0, 1.0), tol=0.0)


def test_width_collapse_guard():
    # classical packet squeezed towards zero width
    with pytest.raises(WidthCollapseError):
        evolve_width("kostin", PacketInit(sigma0_dot=-1.0), SystemParams(epsilon=0), V2,
                      np.linspace(0, 5, 11))


def test_evolve_center_examples():
    sol = evolve_center(INIT, SystemParams(), BarrierField(E0=0.0), [0.0, 5.0])
    assert sol.y[0, 0] == -10.0 and sol.y[0, 1] == 1.0
    assert sol.y[1, 0] == pytest.approx(-10 * math.cosh(1) + 5 * math.sinh(1), abs=1e-8)
    a = evolve_center(INIT, SystemParams(epsilon=0.3), BarrierField(), T).y
    b = evolve_center(INIT, SystemParams(epsilon=1.0), BarrierField(), T).y
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("gamma", [0.0, 0.06])
def test_evolve_center_matches_oracle(gamma):
    bf = BarrierField(phi=-math.pi / 2, omega0=0.17)
    ref, vref = center_ode(T, gamma=gamma, phi=bf.phi, omega0=bf.omega0)
    sol = evolve_center(INIT, SystemParams(gamma=gamma), bf, T)
    np.testing.assert_allclose(sol.y[:, 0], ref, rtol=1e-8)
    np.testing.assert_allclose(sol.y[:, 1], vref, rtol=1e-8)


@pytest.mark.parametrize("approach", ["kostin", "ck"])
@pytest.mark.parametrize("eps, gamma", [(1.0, 0.06), (0.5, 0.02), (0.1, 0.1)])
def test_evolve_width_matches_oracle(approach, eps, gamma):
    ref, _ = width_ode(T, approach, epsilon=eps, gamma=gamma)
    sol = evolve_width(approach, INIT, SystemParams(gamma=gamma, epsilon=eps), V2, T)
    np.testing.assert_allclose(sol.y[:, 0], ref, rtol=1e-8)


def test_width_reductions():
    ck = evolve_width("ck", INIT, SystemParams(gamma=0.06), V2, T).y[:, 0]
    np.testing.assert_allclose(ck, width_ck_closed(INIT, SystemParams(gamma=0.06), V2, T), rtol=1e-8)
    k0 = evolve_width("kostin", INIT, SystemParams(), V2, T).y[:, 0]
    np.testing.assert_allclose(k0, width_frictionless(INIT, SystemParams(), 0.2, T), rtol=1e-8)
    for g in (0.0, 0.06):
        p = SystemParams(gamma=g, epsilon=0)
        kc = evolve_width("kostin", INIT, p, V2, T).y[:, 0]
        np.testing.assert_allclose(kc, width_classical(INIT, p, V2, T), rtol=1e-8)
    ck0 = evolve_width("ck", INIT, SystemParams(), V2, T).y
    np.testing.assert_array_equal(ck0, evolve_width("kostin", INIT, SystemParams(), V2, T).y)


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("gamma", [0.02, 0.06, 0.1])
def test_ck_width_below_kostin(eps, gamma):
    p = SystemParams(gamma=gamma, epsilon=eps)
    ck = evolve_width("ck", INIT, p, V2, T).y[1:, 0]
    ko = evolve_width("kostin", INIT, p, V2, T).y[1:, 0]
    assert np.all(ck < ko)


def test_tolerance_halving_is_stable():
    p = SystemParams(gamma=0.06)
    a = evolve_width("kostin", INIT, p, V2, T, tol=1e-8, atol=1e-10).y[:, 0]
    b = evolve_width("kostin", INIT, p, V2, T, tol=5e-9, atol=5e-11).y[:, 0]
    assert np.max(np.abs(a / b - 1)) < 1e-8 * 10


def test_width_independent_of_field():
    # evolve_packet shares width runs across field settings
    a = evolve_packet("kostin", INIT, SystemParams(gamma=0.06), BarrierField(), 20.0)
    b = evolve_packet("kostin", INIT, SystemParams(gamma=0.06), BarrierField(E0=0.05, phi=1.0), 20.0)
    np.testing.assert_array_equal(a.sigma, b.sigma)
    assert not np.array_equal(a.x_t, b.x_t)


def test_packet_series_access():
    s = evolve_packet("ck", INIT, SystemParams(gamma=0.06), BarrierField(), 10.0, 0.5)
    assert len(s.times) == 21
    st = s.state(4)
    assert isinstance(st, PacketState) and st.t == 2.0
    assert len(s.states()) == 21
    mid = s.at(2.25)
    ref, _ = center_ode([2.25], gamma=0.06)
    assert mid.x_t == pytest.approx(ref[0], rel=1e-8)
    x, v, sig, sd = s.arrays_at(np.array([1.0, 2.25]))
    assert sig[1] == pytest.approx(mid.sigma)
    with pytest.raises(ValueError):
        evolve_packet("ck", INIT, SystemParams(), BarrierField(), 10.05, 0.1)
