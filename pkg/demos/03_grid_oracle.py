"""Checking the Gaussian machinery against a full wave-equation solver.

Run with ``python demos/03_grid_oracle.py`` (about 20 seconds).
"""
# %% [markdown]
# For a quadratic potential the Gaussian ansatz is exact in the linear
# (Caldirola-Kanai) equation, so a split-step Fourier solution of the wave
# equation must reproduce the ODE center and width to the solver's accuracy.

# %%
from scaled_tunnel import BarrierField, PacketInit, SystemParams, evolve_packet
from scaled_tunnel.grid_oracle import (Grid, ansatz_density_error, init_gaussian,
                                       propagate_ck, propagate_kostin)

init = PacketInit()
params = SystemParams(gamma=0.06)
field = BarrierField()

run = propagate_ck(init_gaussian(Grid(), init, params), params, field, 0.005, 10.0,
                   observe_every=2.0)
series = evolve_packet("ck", init, params, field, 10.0)
print(" t    <x> grid     x_t ODE      sigma grid   sigma ODE")
for t, xm, sd in zip(run.observables["t"], run.observables["x_mean"], run.observables["sigma"]):
    st = series.at(t)
    print(f"{t:4.0f} {xm:11.7f} {st.x_t:11.7f} {sd:11.7f} {st.sigma:11.7f}")
end = series.at(10.0)
print("L2 distance to the Gaussian at t=10:",
      f"{ansatz_density_error(run.final, end.x_t, end.sigma):.2e}")

# %% [markdown]
# The Kostin equation is nonlinear (its friction term acts on the phase), so
# the check is on the width only, over a shorter stretch.

# %%
run = propagate_kostin(init_gaussian(Grid(), init, params), params, field, 0.005, 8.0,
                       observe_every=2.0)
series = evolve_packet("kostin", init, params, field, 8.0)
for t, sd in zip(run.observables["t"], run.observables["sigma"]):
    print(f"t = {t:3.0f}: grid sigma {sd:.7f}  ODE sigma {series.at(t).sigma:.7f}")
