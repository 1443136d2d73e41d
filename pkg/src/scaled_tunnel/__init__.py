"""Dissipative tunnelling of a Gaussian packet through a driven inverted
parabolic barrier, in the scaled Kostin and Caldirola-Kanai pictures."""

__version__ = "0.1.0"

from .model import (Approach, BarrierField, PacketInit, PacketState, ParameterError,
                    SystemParams, potential_coeffs, scaled_hbar)
from .closed_form import (big_omega, center_driven, center_static, momentum_width_classical,
                          sinh_over_omega, width_ck_closed, width_classical,
                          width_frictionless)
from .integrators import (IntegrationError, OdeSolution, PacketSeries, evolve_center,
                          evolve_packet, evolve_width, integrate_rk)
from .trajectories import (Ensemble, MomentumDistribution, density, momentum_distribution,
                           propagate_ensemble, quantum_potential, sample_ensemble,
                           scaled_trajectory, velocity_field)
from .transmission import (SweepResult, TransmissionCurve, find_resonance,
                           stationary_transmission, sweep, transmission_curve,
                           transmission_erf, transmission_flux)
from .grid_oracle import (Grid, GridWavefunction, extract_observables, init_gaussian,
                          propagate_ck, propagate_kostin)

__all__ = [name for name in dir() if not name.startswith("_")]
