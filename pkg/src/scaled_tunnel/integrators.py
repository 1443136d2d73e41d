"""Adaptive Dormand-Prince 5(4) integration of the center and width equations.

The stepper exposes its own error estimates in :class:`OdeSolution.stats`,
which is why it is written here rather than borrowed.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import (Approach, BarrierField, PacketInit, PacketState,
                    SystemParams, scaled_hbar)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


class IntegrationError(RuntimeError):
    """Base class for numerical failures of the ODE integrator."""


class StiffnessError(IntegrationError):
    """The step size collapsed below the underflow threshold."""


class DivergenceError(IntegrationError):
    """The right-hand side produced a non-finite value."""


class WidthCollapseError(IntegrationError):
    """The packet width reached zero or became negative."""


# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# Continuous extension (Shampine); row i gives the weight polynomial of stage i
# in powers x, x^2, x^3, x^4 of the normalized step fraction.
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


@dataclass
class OdeSolution:
    """Samples of an integrated system plus a dense interpolant over the span.

    ``y`` has shape ``(len(times), dim)``. Calling the solution evaluates the
    fourth-order interpolant at arbitrary times inside the integrated span.
    """

    times: np.ndarray
    y: np.ndarray
    stats: dict
    _t_nodes: np.ndarray = field(repr=False, default=None)
    _y_nodes: np.ndarray = field(repr=False, default=None)
    _q: np.ndarray = field(repr=False, default=None)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        nodes = self._t_nodes
        forward = nodes[-1] >= nodes[0]
        key = nodes if forward else -nodes
        tk = tt if forward else -tt
        idx = np.clip(np.searchsorted(key, tk, side="right") - 1, 0, len(nodes) - 2)
        h = nodes[idx + 1] - nodes[idx]
        x = (tt - nodes[idx]) / h
        powers = np.stack([x, x * x, x ** 3, x ** 4], axis=-1)
        out = self._y_nodes[idx] + h[:, None] * np.einsum("nij,nj->ni", self._q[idx], powers)
        exact = tt == nodes[idx]
        out[exact] = self._y_nodes[idx[exact]]
        return out[0] if scalar else out


def _initial_step(f, t0, y0, f0, direction, rtol, atol, span):
    scale = atol + np.abs(y0) * rtol
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    f1 = f(t0 + direction * h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate_rk(rhs: Callable, y0, t_span, tol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL, t_eval=None,
                 guard: Callable | None = None, max_steps: int = 1_000_000) -> OdeSolution:
    """Integrate ``y' = rhs(t, y)`` with an embedded 5(4) Runge-Kutta pair.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y) -> array``. Second-order systems are passed in first-order
        form, see :func:`second_order`.
    y0 : array_like
        Initial state.
    t_span : (float, float)
        Start and end time; integration runs backwards if ``end < start``.
    tol, atol : float
        Relative and absolute local error tolerances.
    t_eval : array_like, optional
        Output times (monotone in the integration direction). Defaults to the
        accepted step nodes.
    guard : callable, optional
        ``guard(t, y)`` called after every accepted step; may raise.

    Raises
    ------
    StiffnessError
        If the step size drops below ``1e-14`` times the span.
    DivergenceError
        If ``rhs`` returns a non-finite value.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    t0, t1 = float(t_span[0]), float(t_span[1])
    span = abs(t1 - t0)
    direction = 1.0 if t1 >= t0 else -1.0
    y = np.array(y0, dtype=float).reshape(-1)
    dim = y.size

    def f(t, yy):
        out = np.asarray(rhs(t, yy), dtype=float)
        if not np.all(np.isfinite(out)):
            raise DivergenceError(f"non-finite right-hand side at t={t}: {out}")
        return out

    t_nodes, y_nodes, qs = [t0], [y.copy()], []
    stats = {"n_steps": 0, "n_rejected": 0, "n_fev": 0, "max_error_estimate": 0.0}
    if span == 0:
        sol = OdeSolution(np.array([t0]), y[None, :].copy(), stats)
        sol._t_nodes, sol._y_nodes = np.array([t0, t0 + 1.0]), np.array([y, y])
        sol._q = np.zeros((1, dim, 4))
        return sol

    K = np.empty((7, dim))
    K[0] = f(t0, y)
    stats["n_fev"] += 1
    h = _initial_step(f, t0, y, K[0], direction, tol, atol, span)
    stats["n_fev"] += 1
    h_min = 1e-14 * span
    t = t0
    while direction * (t1 - t) > 0:
        if stats["n_steps"] + stats["n_rejected"] >= max_steps:
            raise StiffnessError(f"exceeded {max_steps} steps at t={t}")
        h = min(h, abs(t1 - t))
        if h < h_min:
            raise StiffnessError(f"step size {h:g} underflow at t={t}")
        hs = direction * h
        for i in range(1, 7):
            K[i] = f(t + _C[i] * hs, y + hs * (_A[i, :i] @ K[:i]))
        stats["n_fev"] += 6
        y_new = y + hs * (_B @ K)
        err = hs * (_E @ K)
        scale = atol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            t_new = t + hs if abs(t1 - (t + hs)) > 1e-15 * span else t1
            qs.append(K.T @ _P)
            t, y = t_new, y_new
            t_nodes.append(t)
            y_nodes.append(y.copy())
            stats["n_steps"] += 1
            stats["max_error_estimate"] = max(stats["max_error_estimate"], err_norm * tol)
            if guard is not None:
                guard(t, y)
            K[0] = K[6]
            factor = 10.0 if err_norm == 0 else min(10.0, 0.9 * err_norm ** -0.2)
        else:
            stats["n_rejected"] += 1
            factor = max(0.2, 0.9 * err_norm ** -0.2)
        h *= factor

    sol = OdeSolution(np.array(t_nodes), np.array(y_nodes), stats)
    sol._t_nodes = sol.times
    sol._y_nodes = sol.y
    sol._q = np.array(qs)
    if t_eval is not None:
        te = np.asarray(t_eval, dtype=float)
        ys = sol(te)
        if te.size and te[0] == t0:
            ys[0] = np.array(y0, dtype=float).reshape(-1)
        sol.times, sol.y = te, ys
    return sol


def second_order(accel: Callable) -> Callable:
    """Wrap ``accel(t, x, v) -> a`` as a first-order right-hand side on ``(x, v)``."""
    def rhs(t, y):
        return np.array([y[1], accel(t, y[0], y[1])])
    return rhs


@dataclass
class PacketSeries:
    """Center and width of the packet sampled on a time grid, with dense access."""

    times: np.ndarray
    x_t: np.ndarray
    v_t: np.ndarray
    sigma: np.ndarray
    sigma_dot: np.ndarray
    center: OdeSolution | None = None
    width: OdeSolution | None = None

    def state(self, i: int) -> PacketState:
        return PacketState(float(self.times[i]), float(self.x_t[i]), float(self.v_t[i]),
                           float(self.sigma[i]), float(self.sigma_dot[i]))

    def states(self) -> list[PacketState]:
        return [self.state(i) for i in range(len(self.times))]

    def at(self, t: float) -> PacketState:
        """Interpolated state at an arbitrary time inside the span."""
        xc, vc = self.center(t)
        s, sd = self.width(t)
        return PacketState(float(t), float(xc), float(vc), float(s), float(sd))

    def arrays_at(self, t):
        """Vectorized dense evaluation: ``(x_t, v_t, sigma, sigma_dot)``."""
        c = self.center(t)
        w = self.width(t)
        return c[..., 0], c[..., 1], w[..., 0], w[..., 1]


def _check_grid(t_grid):
    tg = np.asarray(t_grid, dtype=float)
    if tg.ndim != 1 or tg.size < 1:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if tg.size > 1 and not np.all(np.diff(tg) > 0):
        raise ValueError("t_grid must be strictly increasing")
    return tg


def evolve_center(init: PacketInit, params: SystemParams, bf: BarrierField, t_grid,
                  tol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> OdeSolution:
    """Integrate ``x'' + gamma x' - omega^2 x = -(q E0/m) cos(omega0 t + phi)``.

    The solution columns are ``(x_t, v_t)``. Epsilon does not enter.
    """
    tg = _check_grid(t_grid)
    m, g, w2 = params.m, params.gamma, bf.omega ** 2
    drive = params.q * bf.E0 / m
    w0, phi = bf.omega0, bf.phi
    cos = np.cos

    def rhs(t, y):
        return np.array([y[1], -g * y[1] + w2 * y[0] - drive * cos(w0 * t + phi)])

    return integrate_rk(rhs, [init.x0, init.p0 / m], (0.0, tg[-1]), tol, atol, t_eval=tg)


def _width_guard(t, y):
    if not y[0] > 0:
        raise WidthCollapseError(f"packet width {y[0]} <= 0 at t={t}")


def evolve_width(approach: Approach | str, init: PacketInit, params: SystemParams,
                 V2: float, t_grid, tol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL) -> OdeSolution:
    """Integrate the width equation of the chosen approach.

    ``sigma'' = -gamma sigma' + hbar_s^2/(4 m^2 sigma^3) F(t) - (V2/m) sigma``
    with ``F = 1`` for Kostin and ``F = exp(-2 gamma t)`` for Caldirola-Kanai.
    Solution columns are ``(sigma, sigma_dot)``.
    """
    approach = Approach.parse(approach)
    tg = _check_grid(t_grid)
    m, g = params.m, params.gamma
    quantum = scaled_hbar(params) ** 2 / (4.0 * m * m)
    curv = V2 / m
    exp = np.exp

    if approach is Approach.CK:
        def rhs(t, y):
            s = y[0]
            return np.array([y[1], -g * y[1] + quantum * exp(-2.0 * g * t) / s ** 3 - curv * s])
    else:
        def rhs(t, y):
            s = y[0]
            return np.array([y[1], -g * y[1] + quantum / s ** 3 - curv * s])

    return integrate_rk(rhs, [init.sigma0, init.sigma0_dot], (0.0, tg[-1]), tol, atol,
                        t_eval=tg, guard=_width_guard)


@functools.lru_cache(maxsize=256)
def _cached_width(approach, init, params, V2, t_max, n, tol, atol):
    return evolve_width(approach, init, params, V2, np.linspace(0.0, t_max, n), tol, atol)


@functools.lru_cache(maxsize=256)
def _cached_center(init, params, bf, t_max, n, tol, atol):
    return evolve_center(init, params, bf, np.linspace(0.0, t_max, n), tol, atol)


def evolve_packet(approach: Approach | str, init: PacketInit, params: SystemParams,
                  bf: BarrierField, t_max: float, dt: float = 0.1,
                  tol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> PacketSeries:
    """Center and width on the uniform grid ``0, dt, ..., t_max``.

    Widths do not depend on the field, so width runs are cached per
    ``(approach, init, params, omega)`` and shared across field sweeps.
    """
    approach = Approach.parse(approach)
    n = int(round(t_max / dt)) + 1
    if n < 2 or abs((n - 1) * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError("t_max must be a positive multiple of dt")
    V2 = -params.m * bf.omega ** 2
    csol = _cached_center(init, params, bf, float(t_max), n, tol, atol)
    wsol = _cached_width(approach, init, params, V2, float(t_max), n, tol, atol)
    return PacketSeries(csol.times.copy(), csol.y[:, 0].copy(), csol.y[:, 1].copy(),
                        wsol.y[:, 0].copy(), wsol.y[:, 1].copy(), csol, wsol)
