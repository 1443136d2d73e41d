"""Analytic solutions for the packet center and width.

All functions accept scalar or array ``t`` and return the same shape.
Hyperbolic factors are always combined with the friction damping
``exp(-gamma*t/2)`` so that long runs (Omega*t of several hundred) stay finite.
"""
from __future__ import annotations

import math

import numpy as np

from .model import BarrierField, PacketInit, SystemParams, scaled_hbar

#: below this |Omega*t| the ratio sinh(Omega*t)/Omega is taken from its series
SERIES_CUTOFF = 1e-4
#: above this Omega*t the hyperbolics are evaluated in factored exponential form
FACTORED_CUTOFF = 30.0


def big_omega(params: SystemParams, V2: float) -> float:
    """Growth rate ``sqrt(-V2/m + gamma**2/4)`` of the homogeneous solutions."""
    radicand = -V2 / params.m + 0.25 * params.gamma ** 2
    if radicand < 0:
        raise ValueError(f"negative radicand {radicand}: oscillatory branch not supported")
    return math.sqrt(radicand)


def _as_output(t_in, value):
    return float(value) if np.ndim(t_in) == 0 else value


def sinh_over_omega(Omega: float, t):
    """``sinh(Omega*t)/Omega``, finite as ``Omega -> 0`` (limit ``t``)."""
    tt = np.asarray(t, dtype=float)
    z = Omega * tt
    small = np.abs(z) < SERIES_CUTOFF
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        direct = np.sinh(z) / Omega if Omega != 0 else np.zeros_like(tt)
    series = tt * (1.0 + z * z / 6.0 + z ** 4 / 120.0)
    return _as_output(t, np.where(small, series, direct))


def damped_hyperbolics(Omega: float, gamma: float, t):
    """Return ``(C, S)`` with ``C = e^{-gamma t/2} cosh(Omega t)`` and
    ``S = e^{-gamma t/2} sinh(Omega t)/Omega``.

    Beyond ``Omega*t = 30`` both are computed as
    ``exp((Omega - gamma/2) t) * (1 +- exp(-2 Omega t)) / 2`` which cannot
    overflow before the physical answer itself does.
    """
    tt = np.asarray(t, dtype=float)
    z = Omega * tt
    big = z > FACTORED_CUTOFF
    with np.errstate(over="ignore", invalid="ignore"):
        damp = np.exp(-0.5 * gamma * tt)
        zc = np.where(big, 0.0, z)
        c_direct = damp * np.cosh(zc)
        s_direct = damp * sinh_over_omega(Omega, np.where(big, 0.0, tt))
        lead = 0.5 * np.exp((Omega - 0.5 * gamma) * tt)
        tail = np.exp(-2.0 * z)
        c_big = lead * (1.0 + tail)
        s_big = lead * (1.0 - tail) / Omega if Omega > 0 else np.zeros_like(tt)
    C = np.where(big, c_big, c_direct)
    S = np.where(big, s_big, s_direct)
    return _as_output(t, C), _as_output(t, S)


def center_static(init: PacketInit, params: SystemParams, V1: float, V2: float, t):
    """Center trajectory for a time-independent linear-plus-quadratic potential."""
    if V2 == 0:
        raise ValueError("center_static needs a nonzero curvature V2")
    Omega = big_omega(params, V2)
    C, S = damped_hyperbolics(Omega, params.gamma, t)
    offset = V1 / V2
    v0 = init.p0 / params.m
    return -offset + (init.x0 + offset) * (C + 0.5 * params.gamma * S) + v0 * S


def center_driven(init: PacketInit, params: SystemParams, bf: BarrierField, t):
    """Center trajectory under the oscillatory field.

    Homogeneous part fixed by ``x(0) = x0``, ``x'(0) = p0/m``; the particular
    part is ``A cos(omega0 t + phi) + B sin(omega0 t + phi)`` with
    ``A = F (omega0^2 + omega^2)/D``, ``B = -F gamma omega0/D``,
    ``F = q E0/m`` and ``D = gamma^2 omega0^2 + (omega0^2 + omega^2)^2``.
    """
    m, g = params.m, params.gamma
    w, w0, phi = bf.omega, bf.omega0, bf.phi
    Omega = big_omega(params, -m * w * w)
    C, S = damped_hyperbolics(Omega, g, t)
    v0 = init.p0 / m
    free = init.x0 * (C + 0.5 * g * S) + v0 * S
    if bf.E0 == 0:
        return free
    F = params.q * bf.E0 / m
    s2 = w0 * w0 + w * w
    D = g * g * w0 * w0 + s2 * s2
    k = F / D
    sin_part = k * ((0.5 * g * g + s2) * S + g * C) * w0 * math.sin(phi)
    cos_part = k * ((w0 * w0 - w * w) * 0.5 * g * S - s2 * C) * math.cos(phi)
    theta = w0 * np.asarray(t, dtype=float) + phi
    particular = k * (s2 * np.cos(theta) - g * w0 * np.sin(theta))
    return _as_output(t, free + sin_part + cos_part + particular)


def width_frictionless(init: PacketInit, params: SystemParams, omega: float, t):
    """Width for ``gamma = 0`` and ``sigma0_dot = 0``."""
    if params.gamma != 0:
        raise ValueError("width_frictionless requires gamma == 0")
    if init.sigma0_dot != 0:
        raise ValueError("width_frictionless requires sigma0_dot == 0")
    hb = scaled_hbar(params)
    C, S = damped_hyperbolics(omega, 0.0, t)
    # S*omega is sinh(omega t); keep it factored for large t
    ratio = hb * hb / (4.0 * params.m ** 2 * omega ** 2 * init.sigma0 ** 4)
    sh = S * omega
    return init.sigma0 * np.sqrt(C * C + ratio * sh * sh)


def width_classical(init: PacketInit, params: SystemParams, V2: float, t):
    """Width without the quantum term (``epsilon = 0``), any ``sigma0_dot``.

    The scaled Planck constant of ``params`` is ignored.
    """
    Omega = big_omega(params, V2)
    C, S = damped_hyperbolics(Omega, params.gamma, t)
    return init.sigma0 * (C + 0.5 * params.gamma * S) + init.sigma0_dot * S


def width_ck_closed(init: PacketInit, params: SystemParams, V2: float, t):
    """Closed-form width of the Caldirola-Kanai packet (``sigma0_dot = 0``)."""
    if init.sigma0_dot != 0:
        raise ValueError("closed CK width requires sigma0_dot == 0")
    Omega = big_omega(params, V2)
    C, S = damped_hyperbolics(Omega, params.gamma, t)
    hb = scaled_hbar(params)
    ratio = hb * hb / (4.0 * params.m ** 2 * init.sigma0 ** 4)
    lead = C + 0.5 * params.gamma * S
    return init.sigma0 * np.sqrt(lead * lead + ratio * S * S)


def momentum_width_classical(init: PacketInit, params: SystemParams, omega: float, t):
    """Width ``m*d(sigma_cl)/dt`` of the classical actual-momentum distribution."""
    if init.sigma0_dot != 0:
        raise ValueError("momentum_width_classical requires sigma0_dot == 0")
    Omega = big_omega(params, -params.m * omega * omega)
    _, S = damped_hyperbolics(Omega, params.gamma, t)
    return params.m * init.sigma0 * omega * omega * S
