"""Coefficients of the integrated, Gamma-transformed spectral problem and the
pointwise inequalities that close its energy estimate.

Every field is evaluated twice: from its definition along the profile and
from a closed form in (A, R) multiplied by R'.  Derivatives go through the
chain rule on (R, R', R''), never through finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qhdshock.hydro import ShockData, enthalpy_prime, sound_speed
from qhdshock.profile import TAIL_CUTOFF, ProfileGrid


class SupersonicCoefficientError(ValueError):
    """f1 <= 0 somewhere: the weighted energy is not defined."""


class CertificateInfeasibleError(ValueError):
    """No admissible Young weight eta exists."""


# closed forms in (A, R) --------------------------------------------------------


def F1(A, R, s, gamma):
    return gamma * R ** (gamma - 1.0) - (s - A / R) ** 2


def dF1_dR(A, R, s, gamma):
    return gamma * (gamma - 1.0) * R ** (gamma - 2.0) - 2.0 * (s - A / R) * A / R**2


def F2(A, R, s):
    return -s + 2.0 * A / R


def dF2_dR(A, R):
    return -2.0 * A / R**2


def G(A, R, s):
    return (2.0 * A - s * R) / R**2


def dG_dR(A, R, s):
    return -4.0 * A / R**3 + s / R**2


def H(A, R, s, gamma):
    f1, f2 = F1(A, R, s, gamma), F2(A, R, s)
    return -(dF2_dR(A, R) * f1 - f2 * dF1_dR(A, R, s, gamma)) / (2.0 * f1**2) - f2 / (R * f1)


def Bfun(A, R, s, gamma):
    return 1.0 / R - F2(A, R, s) * G(A, R, s) / F1(A, R, s, gamma)


def D(A, R, s, gamma):
    f1 = F1(A, R, s, gamma)
    return (-s * R * dF1_dR(A, R, s, gamma) + 2.0 * f1 * (s - 2.0 * A / R)) / (2.0 * R * f1**2)


# fields along a profile ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientFields:
    f1: np.ndarray
    f2: np.ndarray
    g: np.ndarray
    a: np.ndarray
    b: np.ndarray
    omega: np.ndarray
    df1: np.ndarray
    d2f1: np.ndarray
    dg: np.ndarray
    df2: np.ndarray
    q1: float
    q2: float
    q3: float
    eta: float | None


def coefficient_fields(grid: ProfileGrid, eta: float | None = None, check: bool = True) -> CoefficientFields:
    """f1, f2, g, a, b, omega and derivatives along the profile."""
    sd = grid.shock
    gam, s = sd.gamma, sd.s
    R, R1, R2 = grid.R, grid.dR, grid.d2R
    U, U1, U2 = grid.U, grid.dU, grid.d2U

    f1 = R * enthalpy_prime(R, gam) - U**2
    if check and np.any(f1 <= 0):
        raise SupersonicCoefficientError(f"f1 <= 0 on the profile (min {f1.min():.3e})")
    f2 = s - 2.0 * U
    df2 = -2.0 * U1
    dp = gam * (gam - 1.0) * R ** (gam - 2.0)
    d2p = gam * (gam - 1.0) * (gam - 2.0) * R ** (gam - 3.0)
    df1 = dp * R1 - 2.0 * U * U1
    d2f1 = d2p * R1**2 + dp * R2 - 2.0 * U1**2 - 2.0 * U * U2

    logR1 = R1 / R
    dlogR1 = R2 / R - (R1 / R) ** 2
    g = U1 - U * logR1
    dg = U2 - U1 * logR1 - U * dlogR1

    ratio_d = (df2 * f1 - f2 * df1) / f1**2
    a = 0.5 * ratio_d + logR1 * f2 / f1
    b = logR1 - f2 * g / f1
    omega = -0.5 * s * df1 / f1**2 - g / f1

    try:
        q1, q2, q3 = endpoint_scalars(sd)
    except ValueError:
        if check:
            raise
        q1 = q2 = q3 = math.nan  # diagnostics only: no weak-shock limit for s >= 2 c_s
    return CoefficientFields(f1, f2, g, a, b, omega, df1, d2f1, dg, df2, q1, q2, q3, eta)


def closed_form_fields(grid: ProfileGrid) -> dict[str, np.ndarray]:
    """The same fields from F1, F2, G, H, B, D in (A, R) times R'."""
    sd = grid.shock
    A, s, gam = sd.a_const, sd.s, sd.gamma
    R, R1 = grid.R, grid.dR
    return {
        "f1": F1(A, R, s, gam),
        "f2": F2(A, R, s),
        "g": G(A, R, s) * R1,
        "a": -H(A, R, s, gam) * R1,
        "b": Bfun(A, R, s, gam) * R1,
        "omega": D(A, R, s, gam) * R1,
        "dg": G(A, R, s) * grid.d2R + dG_dR(A, R, s) * R1**2,
    }


def endpoint_scalars(sd: ShockData) -> tuple[float, float, float]:
    """(q1, q2, q3) = (G, H, B) at the weak-shock limit A- = R- c_s(R-)."""
    s, rm = sd.s, sd.r_minus
    c = float(sound_speed(rm, sd.gamma))
    return endpoint_scalars_raw(rm, c, s, sd.gamma)


def endpoint_scalars_raw(r_minus: float, c: float, s: float, gamma: float) -> tuple[float, float, float]:
    if not 0.0 < s < 2.0 * c:
        raise ValueError(f"endpoint scalars need 0 < s < 2 c_s = {2 * c}, got s={s}")
    q1 = (2.0 * c - s) / r_minus
    q2 = (c * c * (gamma + 1.0) - 4.0 * c * s + 2.0 * s * s) / (2.0 * r_minus * s * s * (2.0 * c - s))
    q3 = -2.0 * (c - s) / (r_minus * s)
    return q1, q2, q3


def eta_interval(q1: float, q2: float, q3: float) -> tuple[float, float]:
    if q3 == 0.0:
        return 0.0, math.inf
    return abs(q3) / (2.0 * q1), 2.0 * q2 / abs(q3)


def eta_select(q1: float, q2: float, q3: float) -> float:
    """Geometric mean of the admissible interval (|q3|/2q1, 2q2/|q3|); 1 when q3 = 0."""
    if q3 == 0.0:
        return 1.0
    lo, hi = eta_interval(q1, q2, q3)
    if not (q1 > 0 and q2 > 0 and lo < hi):
        raise CertificateInfeasibleError(f"empty eta interval ({lo}, {hi})")
    return math.sqrt(lo * hi)


def d_endpoint(sd: ShockData) -> float:
    """D(A-, R-) through the general closed form."""
    c = float(sound_speed(sd.r_minus, sd.gamma))
    return float(D(sd.r_minus * c, sd.r_minus, sd.s, sd.gamma))


def d_endpoint_quadratic(r_minus: float, c: float, s: float, gamma: float) -> float:
    """-(2s^2 - 10 c s + (gamma+9) c^2) / (2 R- s (2c - s)^2)."""
    return -(2.0 * s * s - 10.0 * c * s + (gamma + 9.0) * c * c) / (2.0 * r_minus * s * (2.0 * c - s) ** 2)


# certificates ------------------------------------------------------------------


def _mask(grid: ProfileGrid) -> np.ndarray:
    return grid.ratio_mask(TAIL_CUTOFF)


@dataclass(frozen=True)
class F1GCertificate:
    inf_f1: float
    sup_f1: float
    df1_ratio: float  # sup |f1'| / |R'|
    d2f1_ratio: float  # sup |f1''| / (eps |R'|)
    g_ratio: float  # inf g / R'
    dg_ratio: float  # sup |g'| / (eps |R'|)
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def lemma_f1g_certificate(fields: CoefficientFields, grid: ProfileGrid) -> F1GCertificate:
    m = _mask(grid)
    eps = grid.shock.eps
    adr = np.abs(grid.dR[m])
    vals = dict(
        inf_f1=float(fields.f1.min()),
        sup_f1=float(fields.f1.max()),
        df1_ratio=float(np.max(np.abs(fields.df1[m]) / adr)),
        d2f1_ratio=float(np.max(np.abs(fields.d2f1[m]) / (eps * adr))),
        g_ratio=float(np.min(fields.g[m] / grid.dR[m])),
        dg_ratio=float(np.max(np.abs(fields.dg[m]) / (eps * adr))),
    )
    finite = all(math.isfinite(v) for v in vals.values())
    ok = finite and vals["inf_f1"] > 0 and vals["g_ratio"] > 0 and bool(np.all(fields.g[m] < 0))
    return F1GCertificate(**vals, passed=bool(ok))


@dataclass(frozen=True)
class HyperbolicCertificate:
    eta: float
    C1_emp: float
    C2_emp: float
    C1_limit: float
    C2_limit: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def hyperbolic_certificate(fields: CoefficientFields, eta: float, grid: ProfileGrid) -> HyperbolicCertificate:
    m = _mask(grid)
    adr = np.abs(grid.dR[m])
    ab = np.abs(fields.b[m])
    c1 = float(np.min((-fields.g[m] - ab / (2.0 * eta)) / adr))
    c2 = float(np.min((fields.a[m] - 0.5 * eta * ab) / adr))
    q1, q2, q3 = fields.q1, fields.q2, fields.q3
    return HyperbolicCertificate(
        eta, c1, c2, q1 - abs(q3) / (2.0 * eta), q2 - 0.5 * eta * abs(q3), bool(c1 > 0 and c2 > 0)
    )


@dataclass(frozen=True)
class OmegaCertificate:
    C3_emp: float
    D_endpoint: float
    C3_limit: float  # -D(A-, R-)
    below_kappa: bool
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def omega_certificate(fields: CoefficientFields, grid: ProfileGrid) -> OmegaCertificate:
    from qhdshock.hydro import kappa

    sd = grid.shock
    m = _mask(grid)
    c3 = float(np.min(fields.omega[m] / np.abs(grid.dR[m])))
    dend = d_endpoint(sd)
    c = float(sound_speed(sd.r_minus, sd.gamma))
    below = sd.s < kappa(sd.gamma) * c
    return OmegaCertificate(c3, dend, -dend, bool(below), bool(c3 > 0))


def omega_threshold(r_minus: float, gamma: float, tol: float = 1e-12) -> float:
    """Shock speed in (0, 2 c_s) where D(A-, R-) changes sign, by bisection."""
    c = float(sound_speed(r_minus, gamma))
    a_minus = r_minus * c

    def dval(s):
        return float(D(a_minus, r_minus, s, gamma))

    lo, hi = 1e-9 * c, 2.0 * c * (1.0 - 1e-9)
    if dval(lo) * dval(hi) > 0:
        return math.inf  # no flip: numerator positive on the whole interval (gamma >= 3)
    while hi - lo > tol * c:
        mid = 0.5 * (lo + hi)
        if dval(lo) * dval(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
