"""Split-step Fourier propagation of the scaled wave equations on a periodic grid.

This solver knows nothing about the Gaussian ansatz; it is the independent
check of the center/width machinery. The Caldirola-Kanai equation is linear,
the Kostin equation carries the friction term ``gamma*(S - <S>)`` with the
phase ``S`` recovered by unwrapping the grid wavefunction.

The packet in the inverted barrier grows exponentially, so by default the
grid adapts: it is enlarged by zero padding when density reaches the edge
strip, moved along the lattice to follow it, and refined by spectral
interpolation when the spectrum approaches the Nyquist wavenumber. Both operations are exact for band-limited,
compactly supported data and keep ``n`` a power of two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .model import Approach, BarrierField, PacketInit, SystemParams, scaled_hbar

DENSITY_FLOOR = 1e-10      # below this the phase is not trusted
BOUNDARY_TOL = 1e-8        # density in the edge strip that invalidates a run
EXTEND_TOL = 1e-11         # density in the edge strip that triggers padding
SPECTRAL_TOL = 1e-8        # spectral weight above SPECTRAL_BAND*k_nyq that triggers refinement
SPECTRAL_BAND = 0.75
MAX_PHASE_STEP = 0.9 * math.pi
EDGE_FRACTION = 1 / 32


class GridError(RuntimeError):
    """Base class for failures of the grid propagator."""


class DomainError(GridError):
    """The wavefunction does not fit in the computational box."""


class UnwrapError(GridError):
    """The phase changes too fast between neighbouring points to be unwrapped."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid ``x_j = x_min + j*dx`` with ``n = 2**k`` points."""

    x_min: float = -120.0
    x_max: float = 240.0
    n: int = 2 ** 14

    def __post_init__(self):
        if self.n < 2 ** 10 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 1024, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / (self.x_max - self.x_min)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * math.pi * sfft.fftfreq(self.n, self.dx)


@dataclass
class GridWavefunction:
    grid: Grid
    psi: np.ndarray
    t: float = 0.0

    def density(self) -> np.ndarray:
        return self.psi.real ** 2 + self.psi.imag ** 2

    def norm(self) -> float:
        return float(self.density().sum() * self.grid.dx)


@dataclass
class GridRun:
    """Output of a propagation: snapshots, observable series and diagnostics."""

    snapshots: list
    observables: dict
    metadata: dict = field(default_factory=dict)

    @property
    def final(self) -> GridWavefunction:
        return self.snapshots[-1]


def init_gaussian(grid: Grid, init: PacketInit, params: SystemParams) -> GridWavefunction:
    """Gaussian ``(2 pi sigma0^2)^(-1/4) exp(-(x-x0)^2/(4 sigma0^2) + i p0 (x-x0)/hbar_s)``."""
    hb = scaled_hbar(params)
    if hb == 0:
        raise ValueError("grid propagation needs epsilon > 0")
    x = grid.x
    d = x - init.x0
    amp = (2.0 * math.pi * init.sigma0 ** 2) ** -0.25
    psi = amp * np.exp(-d * d / (4.0 * init.sigma0 ** 2) + 1j * init.p0 * d / hb)
    if init.sigma0_dot != 0:
        # a width rate is a quadratic phase m*sigma0_dot/(2 hbar_s sigma0) (x-x0)^2
        psi = psi * np.exp(1j * params.m * init.sigma0_dot * d * d / (2.0 * hb * init.sigma0))
    rho = psi.real ** 2 + psi.imag ** 2
    if max(rho[0], rho[-1]) > 1e-12:
        raise DomainError("initial packet tail exceeds 1e-12 at the grid boundary")
    return GridWavefunction(grid, psi, 0.0)


def _half_line_mass(x, rho, dx, x_d=0.0):
    """Integral of ``rho`` over ``x > x_d`` with the straddling cell split exactly."""
    frac = np.clip((x + 0.5 * dx - x_d) / dx, 0.0, 1.0)
    return float(np.dot(frac, rho) * dx)


def _moments(x, rho, dx):
    mass = rho.sum() * dx
    mean = float(np.dot(x, rho) * dx / mass)
    var = float(np.dot((x - mean) ** 2, rho) * dx / mass)
    return mass, mean, math.sqrt(var)


def _edge_density(rho):
    w = max(1, int(len(rho) * EDGE_FRACTION))
    return float(rho[:w].max()), float(rho[-w:].max())


def _high_band_weight(psi_hat, band=SPECTRAL_BAND):
    n = len(psi_hat)
    power = psi_hat.real ** 2 + psi_hat.imag ** 2
    cut = int(band * n / 2)
    hi = power[cut: n - cut + 1].sum()
    return float(hi / power.sum())


def _reframe(grid: Grid, psi, rho, support_tol, headroom=1.5):
    """Move (and if needed enlarge) the box around the density support.

    The new box sits on the old lattice, so this is a pure shift plus zero
    padding. Its length is at least ``headroom`` times the support width.
    """
    idx = np.flatnonzero(rho > support_tol)
    a, b = grid.x_min + idx[0] * grid.dx, grid.x_min + idx[-1] * grid.dx
    n = grid.n
    while n * grid.dx < headroom * (b - a):
        n *= 2
    j0 = int(round((0.5 * (a + b) - 0.5 * n * grid.dx - grid.x_min) / grid.dx))
    out = np.zeros(n, complex)
    lo, hi = max(j0, 0), min(j0 + n, grid.n)
    out[lo - j0:hi - j0] = psi[lo:hi]
    x_min = grid.x_min + j0 * grid.dx
    return Grid(x_min, x_min + n * grid.dx, n), out


def _refine(grid: Grid, psi):
    n = grid.n
    ph = sfft.fft(psi)
    out = np.zeros(2 * n, complex)
    half = n // 2
    out[:half] = ph[:half]
    out[-half + 1:] = ph[-half + 1:]
    # split the Nyquist bin symmetrically
    out[half] = 0.5 * ph[half]
    out[-half] = 0.5 * ph[half]
    g = Grid(grid.x_min, grid.x_max, 2 * n)
    return g, sfft.ifft(out) * 2.0


def unwrapped_phase(psi, rho=None, floor: float = DENSITY_FLOOR,
                    max_step: float = MAX_PHASE_STEP):
    """Phase of ``psi`` unwrapped outward from the density maximum.

    Raises :class:`UnwrapError` when two neighbours that both carry density
    above ``floor`` differ in phase by more than ``max_step``.
    """
    if rho is None:
        rho = psi.real ** 2 + psi.imag ** 2
    steps = np.angle(psi[1:] * np.conj(psi[:-1]))
    trusted = (rho[1:] > floor) & (rho[:-1] > floor)
    bad = trusted & (np.abs(steps) > max_step)
    if bad.any():
        j = int(np.argmax(bad))
        raise UnwrapError(f"phase step {steps[j]:.3f} rad between grid points {j} and {j + 1}")
    i0 = int(np.argmax(rho))
    phase = np.empty(len(psi))
    phase[i0] = np.angle(psi[i0])
    phase[i0 + 1:] = phase[i0] + np.cumsum(steps[i0:])
    phase[:i0] = phase[i0] - np.cumsum(steps[:i0][::-1])[::-1]
    return phase


def _kostin_kick(psi, x, kicks, params, bf, hb, mask_floor=DENSITY_FLOOR):
    """Exact flow of ``i hb psi_t = (V + gamma (S - <S>)) psi`` over consecutive
    sub-intervals ``kicks = [(t_mid, h), ...]``.

    The modulus is frozen during a kick, and ``u = S - <S>`` obeys the linear
    equation ``du/dt = -(V - <V>) - gamma*u``, so any sequence of kicks
    composes in closed form from a single phase unwrap.
    Returns the new wavefunction and ``<S>`` before the kicks.
    """
    rho = psi.real ** 2 + psi.imag ** 2
    g = params.gamma
    mask = rho > mask_floor
    w = np.where(mask, rho, 0.0)
    wsum = w.sum()
    if g == 0:
        phase = sum(bf.potential(x, tm, params) * h for tm, h in kicks)
        return psi * np.exp(-1j * phase / hb), math.nan
    S = hb * unwrapped_phase(psi, rho)
    s_mean = float(np.dot(w, S) / wsum)
    u0 = S - s_mean
    u = u0
    global_shift = 0.0
    for tm, h in kicks:
        V = bf.potential(x, tm, params)
        v_mean = float(np.dot(w, V) / wsum)
        decay_m1 = math.expm1(-g * h)
        u = u * (1.0 + decay_m1) + (V - v_mean) * (decay_m1 / g)
        global_shift -= v_mean * h
    return psi * np.exp(1j * ((u - u0) + global_shift) / hb), s_mean


def _ck_kick(psi, x, kicks, params, bf, hb):
    g = params.gamma
    phase = sum(math.exp(g * tm) * bf.potential(x, tm, params) * h for tm, h in kicks)
    return psi * np.exp(-1j * phase / hb)


def propagate(psi0: GridWavefunction, params: SystemParams, bf: BarrierField,
              dt: float, t_end: float, approach: Approach | str,
              snapshot_times=(), observe_every: float | None = None,
              adaptive: bool = True, n_max: int = 2 ** 21,
              check_every: int = 10, extend_tol: float = EXTEND_TOL,
              spectral_tol: float = SPECTRAL_TOL,
              spectral_band: float = SPECTRAL_BAND) -> GridRun:
    """Strang split-step propagation of either scaled wave equation.

    Every step applies half a potential kick, a full kinetic drift in Fourier
    space and another half kick, all evaluated at the step midpoint. For
    Caldirola-Kanai the kinetic factor is ``exp(-gamma t)`` and the potential
    factor ``exp(gamma t)``; for Kostin the kick also carries the friction term.
    The closing half kick of one step is merged with the opening half kick of
    the next whenever the state is not inspected in between.

    Parameters
    ----------
    snapshot_times : sequence of float
        Times at which full wavefunctions are kept (rounded to the step grid).
        The initial and final states are always kept.
    observe_every : float, optional
        Spacing of the observable series; defaults to every step.
    adaptive : bool
        Move, extend and refine the grid as the packet grows. Without it,
        density in the edge strip above ``BOUNDARY_TOL`` raises
        :class:`DomainError`.
    extend_tol, spectral_tol, spectral_band : float
        Regridding triggers: edge-strip density, and spectral weight above
        ``spectral_band`` times the Nyquist wavenumber.
    """
    approach = Approach.parse(approach)
    hb = scaled_hbar(params)
    if hb == 0:
        raise ValueError("grid propagation needs epsilon > 0")
    if not dt > 0 or not t_end >= psi0.t:
        raise ValueError("need dt > 0 and t_end >= start time")
    if dt > 1e-3 / bf.omega * (1 + 1e-12):
        raise ValueError(f"time step {dt} exceeds 1e-3/omega = {1e-3 / bf.omega}")
    m, g = params.m, params.gamma
    n_steps = int(round((t_end - psi0.t) / dt))
    if abs(psi0.t + n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end - t0 must be a multiple of dt")
    obs_stride = 1 if observe_every is None else max(1, int(round(observe_every / dt)))
    snap_steps = {int(round((ts - psi0.t) / dt)) for ts in snapshot_times}

    grid = psi0.grid
    psi = psi0.psi.astype(complex, copy=True)
    x, k = grid.x, grid.k
    rho0 = psi0.density()
    right0 = _half_line_mass(x, rho0, grid.dx)
    left0 = float(rho0.sum() * grid.dx) - right0
    obs = {key: [] for key in ("t", "x_mean", "sigma", "T_grid", "norm",
                               "edge_density", "n", "mean_phase")}
    events = []
    snapshots = [GridWavefunction(grid, psi.copy(), psi0.t)]
    mean_phase = math.nan
    kostin = approach is Approach.KOSTIN

    def record(t):
        rho = psi.real ** 2 + psi.imag ** 2
        mass, mean, sd = _moments(x, rho, grid.dx)
        right = _half_line_mass(x, rho, grid.dx)
        obs["t"].append(t)
        obs["x_mean"].append(mean)
        obs["sigma"].append(sd)
        obs["T_grid"].append((right - right0) / left0)
        obs["norm"].append(float(mass))
        obs["edge_density"].append(max(_edge_density(rho)))
        obs["n"].append(grid.n)
        obs["mean_phase"].append(mean_phase)

    def kick(psi, kicks):
        nonlocal mean_phase
        if kostin:
            psi, mean_phase = _kostin_kick(psi, x, kicks, params, bf, hb)
            return psi
        return _ck_kick(psi, x, kicks, params, bf, hb)

    def kinetic_phase(t_mid):
        factor = 1.0 if kostin else math.exp(-g * t_mid)
        return np.exp(-1j * factor * hb / (2.0 * m) * dt * k * k)

    record(psi0.t)
    static_kin = kinetic_phase(0.0) if (kostin or g == 0) else None
    half = 0.5 * dt
    pending = []
    for step in range(1, n_steps + 1):
        t_mid = psi0.t + (step - 0.5) * dt
        psi = kick(psi, pending + [(t_mid, half)])
        kp = static_kin if static_kin is not None else kinetic_phase(t_mid)
        psi = sfft.ifft(kp * sfft.fft(psi))
        pending = [(t_mid, half)]
        t_now = psi0.t + step * dt
        check = step % check_every == 0 or step == n_steps
        observe = step % obs_stride == 0 or step == n_steps
        if not (check or observe or step in snap_steps):
            continue
        psi = kick(psi, pending)
        pending = []

        if check:
            rho = psi.real ** 2 + psi.imag ** 2
            e_left, e_right = _edge_density(rho)
            if max(e_left, e_right) > BOUNDARY_TOL:
                raise DomainError(f"density {max(e_left, e_right):.2e} reached the grid edge "
                                  f"at t={t_now:.4g}")
            if adaptive:
                changed = False
                if max(e_left, e_right) > extend_tol:
                    new_grid, new_psi = _reframe(grid, psi, rho, 1e-2 * extend_tol)
                    if new_grid.n > n_max:
                        raise DomainError(f"grid would need {new_grid.n} > {n_max} points "
                                          f"at t={t_now:.4g}")
                    grid, psi, changed = new_grid, new_psi, True
                    events.append(("reframe", t_now, grid.n, grid.x_min, grid.x_max))
                if _high_band_weight(sfft.fft(psi), spectral_band) > spectral_tol:
                    if 2 * grid.n > n_max:
                        raise DomainError(f"grid would need {2 * grid.n} > {n_max} points "
                                          f"at t={t_now:.4g}")
                    grid, psi = _refine(grid, psi)
                    changed = True
                    events.append(("refine", t_now, grid.n, grid.x_min, grid.x_max))
                if changed:
                    x, k = grid.x, grid.k
                    if static_kin is not None:
                        static_kin = kinetic_phase(0.0)
        if observe:
            record(t_now)
        if step in snap_steps and step != n_steps:
            snapshots.append(GridWavefunction(grid, psi.copy(), t_now))
    if n_steps > 0:
        snapshots.append(GridWavefunction(grid, psi.copy(), psi0.t + n_steps * dt))
    observables = {key: np.asarray(val) for key, val in obs.items()}
    phases = observables["mean_phase"][np.isfinite(observables["mean_phase"])]
    meta = {"approach": approach.value, "dt": dt, "t_end": t_end, "regrids": events,
            "left_mass0": left0, "right_mass0": right0,
            "global_phase_drift": float(phases[-1] - phases[0]) if phases.size > 1 else 0.0}
    return GridRun(snapshots, observables, meta)


def propagate_ck(psi: GridWavefunction, params: SystemParams, bf: BarrierField,
                 dt: float, t_end: float, **kwargs) -> GridRun:
    """Propagate the scaled Caldirola-Kanai equation (linear)."""
    return propagate(psi, params, bf, dt, t_end, Approach.CK, **kwargs)


def propagate_kostin(psi: GridWavefunction, params: SystemParams, bf: BarrierField,
                     dt: float, t_end: float, **kwargs) -> GridRun:
    """Propagate the scaled Kostin equation (nonlinear, logarithmic)."""
    return propagate(psi, params, bf, dt, t_end, Approach.KOSTIN, **kwargs)


def extract_observables(series):
    """Center, width and grid transmission for a sequence of snapshots.

    The first snapshot is the reference initial state. Returns arrays
    ``(x_t, sigma, T_grid)``.
    """
    series = list(series)
    first = series[0]
    rho0 = first.density()
    right0 = _half_line_mass(first.grid.x, rho0, first.grid.dx)
    left0 = float(rho0.sum() * first.grid.dx) - right0
    xs, ss, Ts = [], [], []
    for snap in series:
        rho = snap.density()
        x = snap.grid.x
        _, mean, sd = _moments(x, rho, snap.grid.dx)
        xs.append(mean)
        ss.append(sd)
        Ts.append((_half_line_mass(x, rho, snap.grid.dx) - right0) / left0)
    return np.array(xs), np.array(ss), np.array(Ts)


def ansatz_density_error(snapshot: GridWavefunction, x_t: float, sigma: float) -> float:
    """L2 norm of ``|psi|^2`` minus the Gaussian ansatz density on the grid."""
    x = snapshot.grid.x
    z = (x - x_t) / sigma
    model = np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * sigma)
    diff = snapshot.density() - model
    return float(math.sqrt(np.dot(diff, diff) * snapshot.grid.dx))
