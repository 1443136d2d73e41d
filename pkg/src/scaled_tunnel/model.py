"""Domain types and the quadratic-potential bookkeeping shared by every module.

Conventions follow the unit system m = hbar = 1, q = -1; every quantity is
still carried explicitly so other unit choices work unchanged.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """Raised when a parameter set violates its domain constraints."""


class Approach(str, enum.Enum):
    """Which dissipative wave equation drives the packet width."""

    KOSTIN = "kostin"
    CK = "ck"

    @classmethod
    def parse(cls, value: "Approach | str") -> "Approach":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {"kostin": cls.KOSTIN, "sl": cls.KOSTIN,
                   "ck": cls.CK, "caldirolakanai": cls.CK}
        try:
            return aliases[key]
        except KeyError:
            raise ParameterError(f"unknown approach {value!r}") from None


@dataclass(frozen=True)
class SystemParams:
    """Particle and environment parameters.

    Parameters
    ----------
    m : float
        Mass, strictly positive.
    hbar : float
        Planck constant, strictly positive.
    q : float
        Charge (signed).
    gamma : float
        Friction rate, non-negative.
    epsilon : float
        Degree of quantumness in [0, 1]; 1 is quantum, 0 classical.
    """

    m: float = 1.0
    hbar: float = 1.0
    q: float = -1.0
    gamma: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise ParameterError(f"mass must be positive, got {self.m}")
        if not self.hbar > 0:
            raise ParameterError(f"hbar must be positive, got {self.hbar}")
        if not self.gamma >= 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ParameterError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not math.isfinite(self.q):
            raise ParameterError("charge must be finite")

    @property
    def hbar_scaled(self) -> float:
        return scaled_hbar(self)


@dataclass(frozen=True)
class BarrierField:
    """Inverted parabolic barrier plus an oscillatory electric field.

    The potential is ``q*E0*cos(omega0*t + phi)*x - m*omega**2*x**2/2``.
    Defaults are the field-on reference values (E0 = 0.1, omega0 = omega = 0.2).
    """

    omega: float = 0.2
    E0: float = 0.1
    omega0: float = 0.2
    phi: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ParameterError(f"barrier frequency must be positive, got {self.omega}")
        if not self.E0 >= 0:
            raise ParameterError(f"field amplitude must be >= 0, got {self.E0}")
        if not self.omega0 >= 0:
            raise ParameterError(f"field frequency must be >= 0, got {self.omega0}")
        if not math.isfinite(self.phi):
            raise ParameterError("phase must be finite")

    def potential(self, x, t: float, params: SystemParams):
        """Evaluate V(x, t) on an array of positions."""
        _, v1, v2 = potential_coeffs(self, params, t)
        x = np.asarray(x, dtype=float)
        return v1 * x + 0.5 * v2 * x * x


@dataclass(frozen=True)
class PacketInit:
    """Initial Gaussian packet: center, momentum, width and width rate."""

    x0: float = -10.0
    p0: float = 1.0
    sigma0: float = 1.0
    sigma0_dot: float = 0.0

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ParameterError(f"sigma0 must be positive, got {self.sigma0}")


@dataclass(frozen=True)
class PacketState:
    """Center and width of the Gaussian packet at one instant."""

    t: float
    x_t: float
    v_t: float
    sigma: float
    sigma_dot: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"packet width must be positive, got {self.sigma}")

    @classmethod
    def initial(cls, init: PacketInit, params: SystemParams) -> "PacketState":
        return cls(0.0, init.x0, init.p0 / params.m, init.sigma0, init.sigma0_dot)


def scaled_hbar(params: SystemParams) -> float:
    """Return the scaled Planck constant ``hbar*sqrt(epsilon)``."""
    return params.hbar * math.sqrt(params.epsilon)


def potential_coeffs(bf: BarrierField, params: SystemParams, t):
    """Taylor coefficients ``(V0, V1, V2)`` of the potential about x = 0.

    ``V1`` follows the field, ``V2 = -m*omega**2`` is constant and ``V0``
    is identically zero. ``t`` may be an array, in which case ``V1`` is too.
    """
    v1 = params.q * bf.E0 * np.cos(bf.omega0 * np.asarray(t, dtype=float) + bf.phi)
    if np.ndim(v1) == 0:
        v1 = float(v1)
    return 0.0, v1, -params.m * bf.omega ** 2
