"""Thermodynamics of the isentropic gas and Rankine-Hugoniot shock algebra.

Pressure law p(rho) = rho**gamma.  All functions accept scalars or numpy
arrays unless stated otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RH_TOL = 1e-12
SONIC_BAND = 1e-10


class DomainError(ValueError):
    """Argument outside the domain of a thermodynamic function."""


class DegenerateShockError(ValueError):
    """End states that cannot carry a shock (equal densities)."""


@dataclass(frozen=True)
class GasParams:
    gamma: float = 1.5
    mu: float = 1.0
    k: float = math.sqrt(2.0)

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise DomainError(f"gamma must be >= 1, got {self.gamma}")
        if not self.mu > 0.0:
            raise DomainError(f"mu must be > 0, got {self.mu}")
        if not self.k > 0.0:
            raise DomainError(f"k must be > 0, got {self.k}")


def _check_density(rho):
    if np.any(np.asarray(rho) <= 0.0):
        raise DomainError("density must be strictly positive")


def enthalpy(rho, gamma):
    """h(rho): ln(rho) for gamma = 1, gamma/(gamma-1) rho**(gamma-1) otherwise."""
    _check_density(rho)
    if gamma < 1.0:
        raise DomainError(f"gamma must be >= 1, got {gamma}")
    if gamma == 1.0:
        return np.log(rho)
    return gamma / (gamma - 1.0) * np.power(rho, gamma - 1.0)


def enthalpy_prime(rho, gamma):
    _check_density(rho)
    return gamma * np.power(rho, gamma - 2.0)


def enthalpy_second(rho, gamma):
    _check_density(rho)
    return gamma * (gamma - 2.0) * np.power(rho, gamma - 3.0)


def pressure(rho, gamma):
    _check_density(rho)
    return np.power(rho, gamma)


def sound_speed(rho, gamma):
    """c_s(rho) = sqrt(rho h'(rho)) = sqrt(gamma rho**(gamma-1))."""
    _check_density(rho)
    return np.sqrt(gamma * np.power(rho, gamma - 1.0))


def kappa(gamma: float) -> float:
    """Speed-bound coefficient: (5 - sqrt(7 - 2 gamma))/2 on [1, 3], 2 beyond."""
    if gamma < 1.0:
        raise DomainError(f"gamma must be >= 1, got {gamma}")
    if gamma <= 3.0:
        return 0.5 * (5.0 - math.sqrt(7.0 - 2.0 * gamma))
    return 2.0


def speed_bound(r_minus: float, gamma: float) -> float:
    """Largest admissible shock speed min(2 c_s, kappa c_s) at the left state."""
    c = float(sound_speed(r_minus, gamma))
    return min(2.0 * c, kappa(gamma) * c)


def kappa_comparison_table(gamma_grid) -> np.ndarray:
    """Rows (gamma, kappa(gamma), (gamma+1)/2) for the nonlinear vs linear viscosity bound."""
    g = np.asarray(gamma_grid, dtype=float)
    return np.column_stack([g, [kappa(x) for x in g], 0.5 * (g + 1.0)])


@dataclass(frozen=True)
class ShockData:
    """End states, speed and integration constants of one Lax shock.

    ``a_const`` is the mass flux A = (s - U)R, ``b_const`` the Bernoulli
    constant B = -sU + U**2/2 + h(R), both evaluated at either end state.
    """

    gas: GasParams
    r_minus: float
    r_plus: float
    u_minus: float
    u_plus: float
    s: float
    a_const: float
    b_const: float

    @property
    def eps(self) -> float:
        return self.r_minus - self.r_plus

    @property
    def gamma(self) -> float:
        return self.gas.gamma

    def rh_residuals(self) -> tuple[float, float]:
        """Relative residuals of both jump conditions."""
        g = self.gamma
        rm, rp, um, up, s = self.r_minus, self.r_plus, self.u_minus, self.u_plus, self.s
        hm, hp = float(enthalpy(rm, g)), float(enthalpy(rp, g))
        r1 = s * (rp - rm) - (rp * up - rm * um)
        r2 = s * (up - um) - (0.5 * up**2 - 0.5 * um**2 + hp - hm)
        scale1 = max(abs(s * rp), abs(s * rm), abs(rp * up), abs(rm * um), 1e-300)
        scale2 = max(abs(s * up), abs(s * um), 0.5 * up**2, 0.5 * um**2, abs(hp), abs(hm), 1e-300)
        return abs(r1) / scale1, abs(r2) / scale2

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "mu": self.gas.mu,
            "k": self.gas.k,
            "r_minus": self.r_minus,
            "r_plus": self.r_plus,
            "u_minus": self.u_minus,
            "u_plus": self.u_plus,
            "s": self.s,
            "A": self.a_const,
            "B": self.b_const,
            "eps": self.eps,
        }


def mass_flux(r_minus: float, r_plus: float, gamma: float) -> float:
    """Positive root A = R+ R- sqrt(2 (h(R+) - h(R-)) / (R+^2 - R-^2))."""
    if r_minus == r_plus:
        raise DegenerateShockError("equal densities force equal velocities: no shock")
    ratio = enthalpy_jump(r_minus, r_plus, gamma) / (r_plus - r_minus) / (r_plus + r_minus)
    return r_plus * r_minus * math.sqrt(2.0 * ratio)


def enthalpy_jump(r_minus: float, r_plus: float, gamma: float) -> float:
    """h(R+) - h(R-), evaluated without cancellation for nearby states."""
    _check_density(r_minus)
    _check_density(r_plus)
    lr = math.log1p((r_plus - r_minus) / r_minus)
    if gamma == 1.0:
        return lr
    return gamma / (gamma - 1.0) * r_minus ** (gamma - 1.0) * math.expm1((gamma - 1.0) * lr)


def build_shock(r_minus: float, r_plus: float, s: float, gas: GasParams) -> ShockData:
    """Shock with prescribed densities and speed; velocities follow from A > 0."""
    _check_density(r_minus)
    _check_density(r_plus)
    if r_minus == r_plus:
        raise DegenerateShockError("equal densities force equal velocities: no shock")
    if not s > 0.0:
        raise DomainError("only s > 0 (decreasing profiles) is supported")
    g = gas.gamma
    a = mass_flux(r_minus, r_plus, g)
    um = s - a / r_minus
    up = s - a / r_plus
    bm = -s * um + 0.5 * um**2 + float(enthalpy(r_minus, g))
    bp = -s * up + 0.5 * up**2 + float(enthalpy(r_plus, g))
    if abs(bm - bp) > 1e-10 * max(1.0, abs(bm)):
        raise ArithmeticError(f"Bernoulli constants disagree: {bm} vs {bp}")
    sd = ShockData(gas, float(r_minus), float(r_plus), um, up, float(s), a, bm)
    res = sd.rh_residuals()
    if max(res) > RH_TOL:
        raise ArithmeticError(f"Rankine-Hugoniot residuals too large: {res}")
    return sd


def shock_from_states(r_minus, u_minus, r_plus, u_plus, s, gas: GasParams) -> ShockData:
    """Accept (R, U) end states, re-validating them against the A formula."""
    sd = build_shock(r_minus, r_plus, s, gas)
    for given, built in ((u_minus, sd.u_minus), (u_plus, sd.u_plus)):
        if abs(given - built) > 1e-10 * max(1.0, abs(built)):
            raise ValueError(
                f"end-state velocities inconsistent with Rankine-Hugoniot: {given} vs {built}"
            )
    return sd


def characteristic_speeds(rho, u, gamma):
    c = sound_speed(rho, gamma)
    return u - c, u + c


def lax_classify(sd: ShockData) -> str:
    """'Lax-1', 'Lax-2' or 'none' from lambda_k(R+,U+) < s < lambda_k(R-,U-)."""
    l1p, l2p = characteristic_speeds(sd.r_plus, sd.u_plus, sd.gamma)
    l1m, l2m = characteristic_speeds(sd.r_minus, sd.u_minus, sd.gamma)
    if l1p < sd.s < l1m:
        return "Lax-1"
    if l2p < sd.s < l2m:
        return "Lax-2"
    return "none"


def sonic_classify(rho, u, gamma) -> str:
    c = float(sound_speed(rho, gamma))
    ratio = abs(u) / c
    if abs(1.0 - ratio) <= SONIC_BAND:
        return "sonic"
    return "subsonic" if ratio < 1.0 else "supersonic"
