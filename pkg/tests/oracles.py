"""Independent reference solutions used by the tests.

Everything here is written from the equations of motion directly with
scipy's DOP853 integrator, so it shares no code with the package.
"""
import math

import numpy as np
from scipy.integrate import solve_ivp

RTOL = 1e-13
ATOL = 1e-14


def center_ode(t_eval, x0=-10.0, p0=1.0, m=1.0, gamma=0.0, omega=0.2,
               q=-1.0, E0=0.1, omega0=0.2, phi=0.0):
    """x'' + gamma x' - omega^2 x = (q E0 / m) ... sign as in V1 = q E0 cos."""
    def rhs(t, y):
        force = -q * E0 * math.cos(omega0 * t + phi) / m
        return [y[1], -gamma * y[1] + omega ** 2 * y[0] + force]

    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    sol = solve_ivp(rhs, (0.0, t_eval[-1]), [x0, p0 / m], method="DOP853",
                    t_eval=t_eval, rtol=RTOL, atol=ATOL)
    return sol.y[0], sol.y[1]


def width_ode(t_eval, approach, sigma0=1.0, sigma0_dot=0.0, m=1.0, hbar=1.0,
              epsilon=1.0, gamma=0.0, omega=0.2):
    hb2 = hbar ** 2 * epsilon

    def rhs(t, y):
        factor = 1.0 if approach == "kostin" else math.exp(-2.0 * gamma * t)
        quantum = hb2 / (4.0 * m ** 2 * y[0] ** 3) * factor
        return [y[1], -gamma * y[1] + quantum + omega ** 2 * y[0]]

    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    sol = solve_ivp(rhs, (0.0, t_eval[-1]), [sigma0, sigma0_dot], method="DOP853",
                    t_eval=t_eval, rtol=RTOL, atol=ATOL)
    return sol.y[0], sol.y[1]


def rk4(rhs, y0, t_end, n):
    """Fixed-step classical Runge-Kutta, the textbook oracle."""
    y = np.array(y0, dtype=float)
    h = t_end / n
    t = 0.0
    for _ in range(n):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y
