"""Transmission through the driven barrier and its resonance in omega0.

Run with ``python demos/02_transmission_and_resonance.py`` (about half a minute).
"""
# %% [markdown]
# The transmission probability is the packet mass that crossed the barrier
# top. With the Gaussian ansatz it is an erf of x_t / sigma(t); it settles on
# a plateau after a few barrier times and the value at t = 150 is taken as
# the stationary transmission.

# %%
import math

import numpy as np

from scaled_tunnel import (BarrierField, PacketInit, SystemParams, find_resonance,
                           stationary_transmission)

init = PacketInit()
w = 0.2

res = stationary_transmission(init, SystemParams(), BarrierField())
print(f"field on, no friction: T_inf = {res.T_inf:.5f}, plateau from t = {res.t_plateau}")
i = int(np.argmax(res.curve.T))
print(f"  transient maximum T = {res.curve.T[i]:.5f} at t = {res.curve.times[i]}")

# %% [markdown]
# Friction lowers the transmission, and Kostin always lets more through than
# Caldirola-Kanai.

# %%
print("\ngamma/w   T_Kostin   T_CK")
for g in (0.0, 0.1, 0.2, 0.3):
    params = SystemParams(gamma=g * w)
    k = stationary_transmission(init, params, BarrierField(), "kostin").T_inf
    c = stationary_transmission(init, params, BarrierField(), "ck").T_inf
    print(f"{g:7.1f}   {k:.5f}    {c:.5f}")

# %% [markdown]
# Scanning the driving frequency at phi = -pi/2: without friction the
# maximum sits at omega0 = omega, with gamma = 0.3 omega it moves down to
# about 0.86 omega.

# %%
grid = np.linspace(0.05 * w, 3 * w, 60)
for g in (0.0, 0.3):
    r = find_resonance("omega0", grid, init, SystemParams(gamma=g * w),
                       BarrierField(phi=-math.pi / 2))
    print(f"gamma = {g} w: omega0_res = {r.argmax / w:.4f} w, T_max = {r.T_max:.5f}")
