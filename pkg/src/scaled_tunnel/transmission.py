"""Transmission probabilities through the barrier top and their parameter scans."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize
from scipy.special import erfc

from .closed_form import center_driven
from .integrators import PacketSeries, evolve_packet
from .model import (Approach, BarrierField, PacketInit, PacketState,
                    SystemParams)

T_EVAL = 150.0
T_EVAL_SHORT = 50.0
PLATEAU_WINDOW = 10.0
PLATEAU_THRESHOLD = 1e-4
SWEEP_PARAMS = ("epsilon", "gamma", "E0", "omega0", "phi")
_SQRT2 = math.sqrt(2.0)


class PlateauWarning(UserWarning):
    """No stationary window was found before the end of the run."""


@dataclass
class TransmissionCurve:
    """``T(t)`` sampled on a time grid."""

    times: np.ndarray
    T: np.ndarray
    metadata: dict = field(default_factory=dict)


@dataclass
class StationaryTransmission:
    T_inf: float
    t_plateau: float
    plateau_found: bool
    curve: TransmissionCurve


@dataclass
class SweepResult:
    """Stationary transmission over a one-parameter grid."""

    param: str
    values: np.ndarray
    T: np.ndarray
    t_plateau: np.ndarray
    argmax: float
    T_max: float
    at_boundary: bool
    metadata: dict = field(default_factory=dict)

    @property
    def argmax_index(self) -> int:
        return int(np.argmax(self.T))


@dataclass
class ResonanceResult:
    param: str
    argmax: float
    T_max: float
    refined: bool
    sweep: SweepResult | None = None

    def summary(self) -> dict:
        return {"param": self.param, "argmax": self.argmax,
                "T_max": self.T_max, "refined": self.refined}


def _erf_difference(a, b):
    # erf(a) - erf(b) written with erfc of negated arguments: both arguments
    # are large and negative here, so this keeps full relative precision.
    return erfc(-a) - erfc(-b)


def transmission_erf(state: PacketState, init: PacketInit):
    """``T(t)`` for a detector at the barrier top, in closed erf form."""
    return transmission_from_arrays(state.x_t, state.sigma, init)


def transmission_from_arrays(x_t, sigma, init: PacketInit):
    """Vectorized erf-form transmission for center and width arrays."""
    a = np.asarray(x_t, dtype=float) / (_SQRT2 * np.asarray(sigma, dtype=float))
    b = init.x0 / (_SQRT2 * init.sigma0)
    out = _erf_difference(a, b) / erfc(b)
    return float(out) if np.ndim(out) == 0 else out


def _left_mass(init: PacketInit) -> float:
    # probability initially left of the barrier top
    return 0.5 * erfc(init.x0 / (_SQRT2 * init.sigma0))


def transmission_flux(t: float, x_d: float, series: PacketSeries, init: PacketInit,
                      route: str = "spatial", quad_tol: float = 1e-8) -> float:
    """Transmission recorded by a detector at ``x_d``.

    ``route="spatial"`` uses the density gained beyond ``x_d`` since t = 0;
    ``route="flux"`` integrates the probability current ``rho*v`` at ``x_d``
    over ``[0, t]`` with adaptive quadrature on the dense packet series.
    """
    norm = _left_mass(init)
    if route == "spatial":
        st = series.at(t)
        gained = 0.5 * (erfc((x_d - st.x_t) / (_SQRT2 * st.sigma))
                        - erfc((x_d - init.x0) / (_SQRT2 * init.sigma0)))
        return float(gained / norm)
    if route == "flux":
        if t == 0:
            return 0.0

        def current(tp):
            x, v, s, sd = series.arrays_at(tp)
            z = (x_d - x) / s
            rho = math.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * s)
            return rho * ((sd / s) * (x_d - x) + v)

        total, _ = integrate.quad(current, 0.0, t, epsabs=quad_tol * norm,
                                  epsrel=quad_tol, limit=500)
        return float(total / norm)
    raise ValueError(f"unknown route {route!r}")


def transmission_curve(series: PacketSeries, init: PacketInit, x_d: float = 0.0,
                       metadata: dict | None = None) -> TransmissionCurve:
    """``T(t)`` on the sample times of ``series`` (spatial route)."""
    if x_d == 0.0:
        T = transmission_from_arrays(series.x_t, series.sigma, init)
    else:
        gained = 0.5 * (erfc((x_d - series.x_t) / (_SQRT2 * series.sigma))
                        - erfc((x_d - init.x0) / (_SQRT2 * init.sigma0)))
        T = gained / _left_mass(init)
    T = np.asarray(T, dtype=float)
    T[0] = 0.0 if series.times[0] == 0 else T[0]
    return TransmissionCurve(series.times.copy(), T, dict(metadata or {}))


def plateau_onset(times, T, window: float = PLATEAU_WINDOW,
                  threshold: float = PLATEAU_THRESHOLD) -> float | None:
    """Start of the first window of length ``window`` over which ``T`` varies
    by less than ``threshold``; ``None`` if there is none."""
    times = np.asarray(times, dtype=float)
    T = np.asarray(T, dtype=float)
    eps = 1e-9 * max(1.0, window)
    ends = np.searchsorted(times, times + window + eps, side="right")
    for i, j in enumerate(ends):
        if times[j - 1] < times[i] + window - eps:
            break
        seg = T[i:j]
        if seg.max() - seg.min() < threshold:
            return float(times[i])
    return None


def stationary_transmission(init: PacketInit, params: SystemParams, bf: BarrierField,
                            approach: Approach | str = Approach.KOSTIN,
                            t_max: float = T_EVAL, window: float = PLATEAU_WINDOW,
                            threshold: float = PLATEAU_THRESHOLD, dt: float = 0.1,
                            x_d: float = 0.0) -> StationaryTransmission:
    """Stationary transmission ``T(t_max)`` and the plateau onset time.

    A missing plateau is reported through ``plateau_found = False`` and a
    :class:`PlateauWarning`, never as an exception.
    """
    approach = Approach.parse(approach)
    series = evolve_packet(approach, init, params, bf, t_max, dt)
    curve = transmission_curve(series, init, x_d,
                               {"approach": approach.value, "x_d": x_d, "t_max": t_max})
    onset = plateau_onset(curve.times, curve.T, window, threshold)
    found = onset is not None
    if not found:
        warnings.warn(f"no transmission plateau before t={t_max}", PlateauWarning, stacklevel=2)
    return StationaryTransmission(float(curve.T[-1]), onset if found else math.nan, found, curve)


def _with_value(param: str, value: float, params: SystemParams, bf: BarrierField):
    if param in ("epsilon", "gamma"):
        return replace(params, **{param: float(value)}), bf
    if param in ("E0", "omega0", "phi"):
        return params, replace(bf, **{param: float(value)})
    raise ValueError(f"cannot sweep {param!r}; choose one of {SWEEP_PARAMS}")


def _stationary_point(args):
    param, value, init, params, bf, approach, t_max, window, threshold, dt = args
    p, b = _with_value(param, value, params, bf)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PlateauWarning)
        res = stationary_transmission(init, p, b, approach, t_max, window, threshold, dt)
    i_short = int(round(min(T_EVAL_SHORT, t_max) / dt))
    return res.T_inf, res.t_plateau, float(res.curve.T[i_short])


def sweep(param: str, grid, init: PacketInit, params: SystemParams, bf: BarrierField,
          approach: Approach | str = Approach.KOSTIN, t_max: float = T_EVAL,
          window: float = PLATEAU_WINDOW, threshold: float = PLATEAU_THRESHOLD,
          dt: float = 0.1, workers: int | None = None) -> SweepResult:
    """Stationary transmission at every value of ``param`` on ``grid``.

    Points are independent; ``workers > 1`` evaluates them in a process pool.
    The metadata carries the values at ``t = 50`` next to those at ``t_max``.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param!r}; choose one of {SWEEP_PARAMS}")
    values = np.asarray(grid, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("sweep grid must be a non-empty 1-d array")
    if values.size > 1 and not np.all(np.diff(values) > 0):
        raise ValueError("sweep grid must be strictly increasing")
    approach = Approach.parse(approach)
    tasks = [(param, v, init, params, bf, approach, t_max, window, threshold, dt) for v in values]
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_stationary_point, tasks))
    else:
        rows = [_stationary_point(task) for task in tasks]
    T = np.array([r[0] for r in rows])
    i = int(np.argmax(T))
    meta = {"approach": approach.value, "t_max": t_max, "t_short": T_EVAL_SHORT,
            "T_short": [r[2] for r in rows],
            "argmax_short": float(values[int(np.argmax([r[2] for r in rows]))])}
    return SweepResult(param, values, T, np.array([r[1] for r in rows]),
                       float(values[i]), float(T[i]), i in (0, len(values) - 1), meta)


def _refine_tolerance(param: str, bf: BarrierField) -> float:
    if param == "omega0":
        return 1e-3 * bf.omega
    return 1e-3 * math.pi


def find_resonance(param: str, grid, init: PacketInit, params: SystemParams,
                   bf: BarrierField, approach: Approach | str = Approach.KOSTIN,
                   t_max: float = T_EVAL, refine: bool = True,
                   workers: int | None = None) -> ResonanceResult:
    """Locate the maximum of stationary transmission over ``omega0`` or ``phi``.

    The coarse-grid argmax is refined by golden-section search inside its
    neighbouring grid cells. A maximum on the grid edge is returned unrefined.
    """
    if param not in ("omega0", "phi"):
        raise ValueError("resonance search is defined for 'omega0' or 'phi'")
    coarse = sweep(param, grid, init, params, bf, approach, t_max, workers=workers)
    i = coarse.argmax_index
    if coarse.at_boundary or not refine:
        return ResonanceResult(param, coarse.argmax, coarse.T_max, False, coarse)

    def objective(value):
        return -_stationary_point((param, value, init, params, bf, Approach.parse(approach),
                                   t_max, PLATEAU_WINDOW, PLATEAU_THRESHOLD, 0.1))[0]

    lo, mid, hi = coarse.values[i - 1], coarse.values[i], coarse.values[i + 1]
    tol = _refine_tolerance(param, bf)
    res = optimize.minimize_scalar(objective, bracket=(lo, mid, hi), method="golden",
                                   options={"xtol": 0.25 * tol / max(abs(mid), tol)})
    x_best, T_best = float(res.x), float(-res.fun)
    if T_best < coarse.T_max:
        x_best, T_best = coarse.argmax, coarse.T_max
    return ResonanceResult(param, x_best, T_best, True, coarse)


def center_resonance(param: str, grid, init: PacketInit, params: SystemParams,
                     bf: BarrierField, t1: float = T_EVAL) -> float:
    """Grid value of ``param`` that maximizes the center position at ``t1``,
    refined the same way as :func:`find_resonance`."""
    values = np.asarray(grid, dtype=float)

    def xc(v):
        p, b = _with_value(param, v, params, bf)
        return float(center_driven(init, p, b, t1))

    xs = np.array([xc(v) for v in values])
    i = int(np.argmax(xs))
    if i in (0, len(values) - 1):
        return float(values[i])
    tol = _refine_tolerance(param, bf)
    res = optimize.minimize_scalar(lambda v: -xc(v), bracket=tuple(values[i - 1:i + 2]),
                                   method="golden",
                                   options={"xtol": 0.25 * tol / max(abs(values[i]), tol)})
    return float(res.x)
