"""Viscous-dispersive shock profiles of quantum hydrodynamics with nonlinear
viscosity: profile computation, linearized spectra and energy certificates."""

from qhdshock.hydro import (
    DegenerateShockError,
    DomainError,
    GasParams,
    ShockData,
    build_shock,
    enthalpy,
    kappa,
    lax_classify,
    sonic_classify,
    sound_speed,
    speed_bound,
)
from qhdshock.profile import ProfileGrid, solve_profile

__all__ = [
    "DegenerateShockError",
    "DomainError",
    "GasParams",
    "ProfileGrid",
    "ShockData",
    "build_shock",
    "enthalpy",
    "kappa",
    "lax_classify",
    "solve_profile",
    "sonic_classify",
    "sound_speed",
    "speed_bound",
]

__version__ = "0.1.0"
