"""Photon transport in a Kerr-nonlinear coupled-cavity array with a central two-level atom."""

__version__ = "0.1.0"

from .errors import (BandEdge, CavityArrayError, DimensionMismatch, EigenFailure, NonFinite,
                     NotLinear, PoleAtResonance, SiteOutOfRange, StepUnderflow)
from .model import (ModelParams, check_mode, detuning_coefficient, dispersion_omega_k,
                    effective_coupling)
from .scattering import (ScatterOptions, TransmissionRoot, candidate_roots, reflection_of,
                         residual_eq9, transmission_linear, transmission_roots)
from .dynamics import (DynOptions, FieldState, Trajectory, derivative, first_local_max,
                       first_sync_time, initial_all_in_site, integrate, observables,
                       rescale_params, vacuum_state)
from .stability import (FluctuationMatrix, StabilityReport, build_heff, open_chain_energies,
                        root_stability, stability_spectrum, stationary_background)
from .sweep import Axis, Cell, SweepGrid, sweep1d, sweep2d, sweep_stability
