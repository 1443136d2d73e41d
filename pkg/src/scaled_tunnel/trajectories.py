"""Scaled Bohmian trajectories generated by the Gaussian packet.

Every trajectory is the classical center plus a displacement carried by
the width: ``x(x_init, t) = x_t + (x_init - x0) * sigma(t) / sigma0``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .model import PacketInit, PacketState, SystemParams, scaled_hbar

DEFAULT_UNIFORM_COUNT = 21
_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class Ensemble:
    """Initial positions of a trajectory ensemble and, once propagated, their paths.

    ``paths`` has shape ``(n_trajectories, n_times)``.
    """

    initial_positions: np.ndarray
    weights: np.ndarray
    mode: str
    seed: int | None = None
    times: np.ndarray | None = None
    paths: np.ndarray | None = None


@dataclass(frozen=True)
class MomentumDistribution:
    """Gaussian distribution of the actual (Bohmian) momentum."""

    mean: float
    width: float

    def pdf(self, p):
        s = abs(self.width)
        if s == 0:
            raise ValueError("zero-width momentum distribution has no density")
        p = np.asarray(p, dtype=float)
        return np.exp(-0.5 * ((p - self.mean) / s) ** 2) / (_SQRT_2PI * s)


def scaled_trajectory(x_init, center, width, init: PacketInit):
    """Paths for one or many initial positions.

    ``center`` and ``width`` are time series of equal length. A scalar
    ``x_init`` gives a 1-d path, an array gives one row per trajectory.
    """
    center = np.asarray(center, dtype=float)
    width = np.asarray(width, dtype=float)
    if np.any(width <= 0):
        raise ValueError("width series must be positive")
    offset = np.asarray(x_init, dtype=float) - init.x0
    scale = width / init.sigma0
    if offset.ndim == 0:
        return center + float(offset) * scale
    return center[None, :] + offset[:, None] * scale[None, :]


def velocity_field(x, state: PacketState):
    """Velocity ``(sigma_dot/sigma)(x - x_t) + v_t`` of the Gaussian flow."""
    return (state.sigma_dot / state.sigma) * (np.asarray(x, dtype=float) - state.x_t) + state.v_t


def density(x, state: PacketState):
    """Normalized Gaussian probability density of the packet."""
    z = (np.asarray(x, dtype=float) - state.x_t) / state.sigma
    return np.exp(-0.5 * z * z) / (_SQRT_2PI * state.sigma)


def sample_ensemble(init: PacketInit, n: int,
                    mode: Literal["uniform", "born"] = "uniform",
                    seed: int | None = None) -> Ensemble:
    """Initial positions for a trajectory ensemble.

    ``uniform`` places ``n`` equispaced points on ``[x0 - 3 sigma0, x0 + 3 sigma0]``
    with Born-rule weights attached; ``born`` draws ``n`` positions from the
    initial Gaussian with a 64-bit seed (generated and recorded if omitted).
    """
    if n < 2:
        raise ValueError(f"an ensemble needs at least 2 members, got {n}")
    if mode == "uniform":
        xs = np.linspace(init.x0 - 3.0 * init.sigma0, init.x0 + 3.0 * init.sigma0, n)
        w = density(xs, PacketState(0.0, init.x0, 0.0, init.sigma0, 0.0))
        return Ensemble(xs, w / w.sum(), "uniform")
    if mode == "born":
        if seed is None:
            seed = int(np.random.SeedSequence().entropy) & (2 ** 64 - 1)
        rng = np.random.default_rng(seed)
        xs = rng.normal(init.x0, init.sigma0, size=n)
        return Ensemble(xs, np.full(n, 1.0 / n), "born", seed=int(seed))
    raise ValueError(f"unknown sampling mode {mode!r}")


def propagate_ensemble(ensemble: Ensemble, times, center, width,
                       init: PacketInit) -> Ensemble:
    """Attach paths computed from center and width series to an ensemble."""
    paths = scaled_trajectory(ensemble.initial_positions, center, width, init)
    return replace(ensemble, times=np.asarray(times, dtype=float), paths=paths)


def momentum_distribution(state: PacketState, params: SystemParams) -> MomentumDistribution:
    """Actual-momentum distribution: mean ``m v_t``, width ``m sigma_dot``."""
    return MomentumDistribution(params.m * state.v_t, params.m * state.sigma_dot)


def quantum_potential(x, state: PacketState, params: SystemParams):
    """Scaled quantum potential of the Gaussian packet.

    ``hbar_s^2/(4 m sigma^2) * (1 - (x - x_t)^2/(2 sigma^2))``; vanishes
    identically in the classical limit.
    """
    hb = scaled_hbar(params)
    s2 = state.sigma ** 2
    d = np.asarray(x, dtype=float) - state.x_t
    return hb * hb / (4.0 * params.m * s2) * (1.0 - d * d / (2.0 * s2))
