import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scaled_tunnel.model import (Approach, BarrierField, PacketInit, PacketState,
                                 ParameterError, SystemParams, potential_coeffs,
                                 scaled_hbar)


@pytest.mark.parametrize("eps, expected", [(1.0, 1.0), (0.0, 0.0), (0.5, 0.7071067812)])
def test_scaled_hbar(eps, expected):
    assert scaled_hbar(SystemParams(epsilon=eps)) == pytest.approx(expected, abs=1e-10)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 10))
def test_scaled_hbar_monotone_and_bounded(e1, e2, hbar):
    lo, hi = sorted((e1, e2))
    a = scaled_hbar(SystemParams(hbar=hbar, epsilon=lo))
    b = scaled_hbar(SystemParams(hbar=hbar, epsilon=hi))
    assert 0 <= a <= b <= hbar


@pytest.mark.parametrize("kwargs", [dict(m=0), dict(hbar=-1), dict(gamma=-0.1),
                                    dict(epsilon=1.2), dict(epsilon=-0.1),
                                    dict(q=math.inf)])
def test_system_params_validation(kwargs):
    with pytest.raises(ParameterError):
        SystemParams(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(omega=0), dict(E0=-1), dict(omega0=-0.1),
                                    dict(phi=math.nan)])
def test_barrier_validation(kwargs):
    with pytest.raises(ParameterError):
        BarrierField(**kwargs)


def test_packet_validation():
    with pytest.raises(ParameterError):
        PacketInit(sigma0=0)
    with pytest.raises(ParameterError):
        PacketState(0.0, 0.0, 0.0, -1.0, 0.0)


def test_parameter_error_is_value_error():
    assert issubclass(ParameterError, ValueError)


def test_potential_coeffs_examples():
    p = SystemParams()
    assert potential_coeffs(BarrierField(), p, 0.0) == (0.0, pytest.approx(-0.1), pytest.approx(-0.04))
    _, v1, _ = potential_coeffs(BarrierField(phi=-math.pi / 2), p, 0.0)
    assert abs(v1) < 1e-16


@given(st.floats(0, 100), st.floats(-10, 10), st.floats(0, 1))
def test_field_off_removes_linear_term(t, phi, omega0):
    _, v1, v2 = potential_coeffs(BarrierField(E0=0.0, phi=phi, omega0=omega0),
                                 SystemParams(), t)
    assert v1 == 0.0
    assert v2 < 0


def test_potential_coeffs_vectorized_and_potential():
    bf, p = BarrierField(), SystemParams()
    t = np.linspace(0, 10, 7)
    _, v1, _ = potential_coeffs(bf, p, t)
    assert v1.shape == t.shape
    x = np.array([-1.0, 0.0, 2.0])
    expected = -0.1 * np.cos(0.2 * 3.0) * x - 0.02 * x ** 2
    np.testing.assert_allclose(bf.potential(x, 3.0, p), expected, rtol=1e-14)


def test_approach_parse():
    assert Approach.parse("Kostin") is Approach.KOSTIN
    assert Approach.parse("caldirola-kanai") is Approach.CK
    assert Approach.parse(Approach.CK) is Approach.CK
    with pytest.raises(ParameterError):
        Approach.parse("lindblad")


def test_initial_state():
    s = PacketState.initial(PacketInit(p0=2.0), SystemParams(m=4.0))
    assert (s.t, s.x_t, s.v_t, s.sigma, s.sigma_dot) == (0.0, -10.0, 0.5, 1.0, 0.0)
    assert SystemParams(epsilon=0.25).hbar_scaled == 0.5
