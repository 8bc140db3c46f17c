"""Transverse-field Ising chain ramped linearly to its critical point, then evolved freely there."""
from .driven import (IntegrationError, ModeAmplitudes, QuenchProtocol, drive_to_critical,
                     landau_zener_map)
from .free import CriticalPropagator, dispersion, evolve
from .lattice import MomentumGrid, build_grid, equilibrium_modes, kz_scales
from .observables import (TimeSeries, echo_series, excitation_probability,
                          ground_probability_per_mode, ground_state_probability,
                          loschmidt_echo, sz_series, transverse_magnetization)

__all__ = [
    "CriticalPropagator", "IntegrationError", "ModeAmplitudes", "MomentumGrid", "QuenchProtocol",
    "TimeSeries", "build_grid", "dispersion", "drive_to_critical", "echo_series",
    "equilibrium_modes", "evolve", "excitation_probability", "ground_probability_per_mode",
    "ground_state_probability", "kz_scales", "landau_zener_map", "loschmidt_echo", "sz_series",
    "transverse_magnetization",
]
