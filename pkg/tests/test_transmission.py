import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf, erfc

from scaled_tunnel.closed_form import center_driven
from scaled_tunnel.integrators import evolve_packet
from scaled_tunnel.model import BarrierField, PacketInit, PacketState, SystemParams
from scaled_tunnel.transmission import (SWEEP_PARAMS, PlateauWarning, center_resonance,
                                        find_resonance, plateau_onset,
                                        stationary_transmission, sweep,
                                        transmission_curve, transmission_erf,
                                        transmission_flux, transmission_from_arrays)

INIT = PacketInit()
W = 0.2


def naive_erf_T(x_t, sigma):
    # direct transcription of the erf expression
    b = INIT.x0 / (math.sqrt(2) * INIT.sigma0)
    return (erf(x_t / (math.sqrt(2) * sigma)) - erf(b)) / erfc(b)


def test_erf_form_t0_and_reference():
    assert transmission_erf(PacketState.initial(INIT, SystemParams()), INIT) == 0.0
    st_ = PacketState(5.0, -3.0, 0.0, 4.0, 0.0)
    assert transmission_erf(st_, INIT) == pytest.approx(naive_erf_T(-3.0, 4.0), rel=1e-12)


def test_erf_form_asymptotes():
    # erf argument tends to -2.5/(sigma_ratio*sqrt 2) for the frictionless free case
    assert 0.5 * erfc(1.31307) / (1 - 0.5 * erfc(7.0710678)) == pytest.approx(0.0317, abs=5e-4)
    assert 0.5 * erfc(3.5355) == pytest.approx(3e-7, rel=0.1)


@given(st.floats(-200, 200), st.floats(0.1, 1e3))
def test_erf_form_bounded(x_t, sigma):
    T = transmission_from_arrays(x_t, sigma, INIT)
    assert -1e-15 <= T <= 1.0 + 1e-15


@pytest.fixture(scope="module")
def driven_series():
    return evolve_packet("kostin", INIT, SystemParams(gamma=0.06), BarrierField(), 150.0)


def test_flux_spatial_route_matches_erf(driven_series):
    for t in (0.0, 3.0, 20.0, 150.0):
        T = transmission_flux(t, 0.0, driven_series, INIT)
        assert T == pytest.approx(transmission_erf(driven_series.at(t), INIT), rel=1e-12, abs=1e-15)
    assert transmission_flux(0.0, 2.0, driven_series, INIT) == 0.0
    assert transmission_flux(0.0, 2.0, driven_series, INIT, route="flux") == 0.0


@pytest.mark.parametrize("x_d", [0.0, 2.0])
@pytest.mark.parametrize("t", [10.0, 40.0])
def test_flux_routes_agree(driven_series, x_d, t):
    a = transmission_flux(t, x_d, driven_series, INIT, route="spatial")
    b = transmission_flux(t, x_d, driven_series, INIT, route="flux")
    assert b == pytest.approx(a, abs=1e-6 * max(a, 1e-3))


def test_flux_route_errors(driven_series):
    with pytest.raises(ValueError):
        transmission_flux(1.0, 0.0, driven_series, INIT, route="bohm")


def test_curve(driven_series):
    c = transmission_curve(driven_series, INIT)
    assert c.T[0] == 0.0
    assert np.all((c.T >= 0) & (c.T <= 1))
    c2 = transmission_curve(driven_series, INIT, x_d=2.0)
    assert abs(c2.T[-1] - c.T[-1]) < 1e-3


def test_plateau_onset():
    t = np.arange(0.0, 100.0, 0.5)
    T = 1 - np.exp(-t / 3)
    onset = plateau_onset(t, T, 10.0, 1e-4)
    # the window [s, s+10] is flat once exp(-s/3) (1 - exp(-10/3)) < 1e-4
    s_exact = 3 * math.log((1 - math.exp(-10 / 3)) / 1e-4)
    assert s_exact <= onset < s_exact + 0.5
    assert plateau_onset(t, np.sin(t), 10.0, 1e-4) is None
    assert plateau_onset(t[:10], np.zeros(10), 10.0, 1e-4) is None


def test_stationary_reference_defaults():
    res = stationary_transmission(INIT, SystemParams(), BarrierField())
    assert res.plateau_found
    assert 20 <= res.t_plateau <= 40
    i = np.searchsorted(res.curve.times, 100.0)
    assert abs(res.T_inf - res.curve.T[i]) < 1e-4


def test_stationary_warns_without_plateau():
    with pytest.warns(PlateauWarning):
        res = stationary_transmission(INIT, SystemParams(), BarrierField(), t_max=12.0)
    assert not res.plateau_found and math.isnan(res.t_plateau)


def test_sweep_shapes_and_metadata():
    grid = np.linspace(0.0, 0.1, 4)
    r = sweep("E0", grid, INIT, SystemParams(), BarrierField(), t_max=60.0)
    assert r.param == "E0" and r.T.shape == (4,) and r.t_plateau.shape == (4,)
    assert r.argmax == 0.1 and r.at_boundary
    assert len(r.metadata["T_short"]) == 4
    with pytest.raises(ValueError):
        sweep("mass", grid, INIT, SystemParams(), BarrierField())
    with pytest.raises(ValueError):
        sweep("E0", grid[::-1], INIT, SystemParams(), BarrierField())
    assert set(SWEEP_PARAMS) == {"epsilon", "gamma", "E0", "omega0", "phi"}


def test_sweep_parallel_matches_serial():
    grid = np.linspace(0.1, 0.3, 5)
    kw = dict(init=INIT, params=SystemParams(gamma=0.06), bf=BarrierField(), t_max=60.0)
    a = sweep("omega0", grid, **kw)
    b = sweep("omega0", grid, workers=2, **kw)
    np.testing.assert_array_equal(a.T, b.T)


def test_find_resonance_and_center_coincide():
    grid = np.linspace(0.1, 0.3, 11)
    bf = BarrierField(phi=-math.pi / 2)
    p = SystemParams(gamma=0.3 * W)
    res = find_resonance("omega0", grid, INIT, p, bf)
    assert res.refined
    assert res.argmax == pytest.approx(0.86 * W, rel=0.02)
    xc = center_resonance("omega0", grid, INIT, p, bf)
    assert abs(xc - res.argmax) < 2e-3 * W
    assert res.summary()["param"] == "omega0"
    with pytest.raises(ValueError):
        find_resonance("gamma", grid, INIT, p, bf)


def test_find_resonance_boundary_not_refined():
    res = find_resonance("omega0", np.linspace(0.01, 0.05, 5), INIT, SystemParams(),
                         BarrierField(phi=-math.pi / 2))
    assert not res.refined and res.argmax == 0.05


def test_field_enters_only_through_center():
    # two field settings with the same center give the same T
    p = SystemParams(gamma=0.06)
    a = evolve_packet("kostin", INIT, p, BarrierField(), 50.0)
    Ta = transmission_from_arrays(a.x_t, a.sigma, INIT)
    Tb = transmission_from_arrays(center_driven(INIT, p, BarrierField(), a.times), a.sigma, INIT)
    np.testing.assert_allclose(Ta, Tb, rtol=1e-7, atol=1e-12)
