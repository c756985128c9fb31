"""Heteroclinic density profiles of the planar travelling-wave ODE

    R'' = (2/k^2) f(R) - (2 s mu / k^2) R' + (R')^2 / (2R),

computed by shooting along the unstable manifold of (R-, 0), together with
the small-amplitude structure checks (monotonicity, derivative scaling,
expansions of R0 and A, leading-order tanh profile).
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from qhdshock.hydro import (
    DomainError,
    ShockData,
    build_shock,
    enthalpy,
    enthalpy_prime,
    enthalpy_second,
    sound_speed,
)

log = logging.getLogger(__name__)

TAIL_CUTOFF = 0.01  # fraction of max|R'| below which ratio statistics are skipped


class NoConnectionError(RuntimeError):
    """The shot trajectory did not reach (R+, 0)."""


class StructureError(RuntimeError):
    """Phase-plane structure needed by an operation is absent."""


# -- the ODE ---------------------------------------------------------------


def f_of_R(R, sd: ShockData):
    """f(R) = R h(R) + A^2/(2R) - s^2 R/2 - R B."""
    if np.any(np.asarray(R) <= 0):
        raise DomainError("f(R) requires R > 0")
    a, b, s = sd.a_const, sd.b_const, sd.s
    return R * enthalpy(R, sd.gamma) + a * a / (2.0 * R) - 0.5 * s * s * R - R * b


def f_long_form(R, sd: ShockData):
    """f(R) written through the end densities only (A, B eliminated)."""
    if np.any(np.asarray(R) <= 0):
        raise DomainError("f(R) requires R > 0")
    g, rp, rm = sd.gamma, sd.r_plus, sd.r_minus
    hp, hm = enthalpy(rp, g), enthalpy(rm, g)
    jump = (hp - hm) / (rp - rm)
    second = (rp * rp * hp - rm * rm * hm) / (rp - rm)
    return R / (rp + rm) * ((rp * rm) ** 2 / R**2 * jump + (rp + rm) * enthalpy(R, g) - second)


def f_prime(R, sd: ShockData):
    a, b, s = sd.a_const, sd.b_const, sd.s
    return enthalpy(R, sd.gamma) + R * enthalpy_prime(R, sd.gamma) - a * a / (2.0 * R**2) - 0.5 * s * s - b


def f_second(R, sd: ShockData):
    g = sd.gamma
    return 2.0 * enthalpy_prime(R, g) + R * enthalpy_second(R, g) + sd.a_const**2 / R**3


def ode_rhs(state, sd: ShockData):
    """(R', R'') for state (R, P = R')."""
    R, P = state
    if np.any(np.asarray(R) <= 0):
        raise DomainError("vacuum reached: R <= 0")
    k2 = sd.gas.k**2
    return P, 2.0 / k2 * f_of_R(R, sd) - 2.0 * sd.s * sd.gas.mu / k2 * P + P * P / (2.0 * R)


def third_derivative(R, P, Q, sd: ShockData):
    """R''' by differentiating the ODE along a solution (Q = R'')."""
    k2 = sd.gas.k**2
    return (
        2.0 / k2 * f_prime(R, sd) * P
        - 2.0 * sd.s * sd.gas.mu / k2 * Q
        + P * Q / R
        - P**3 / (2.0 * R * R)
    )


@dataclass(frozen=True)
class Linearization:
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # unit columns

    @property
    def is_saddle(self) -> bool:
        ev = self.eigenvalues
        return bool(np.all(np.abs(ev.imag) == 0) and np.sum(ev.real > 0) == 1 and np.sum(ev.real < 0) == 1)


def equilibrium_linearization(sd: ShockData, which: str = "-") -> Linearization:
    """Jacobian of the phase-plane field at (R+-, 0) with its eigen-decomposition."""
    if which not in ("-", "+"):
        raise ValueError("which must be '-' or '+'")
    r = sd.r_minus if which == "-" else sd.r_plus
    k2 = sd.gas.k**2
    jac = np.array([[0.0, 1.0], [2.0 / k2 * f_prime(r, sd), -2.0 * sd.s * sd.gas.mu / k2]])
    w, v = np.linalg.eig(jac)
    if np.all(np.abs(w.imag) == 0):
        w, v = w.real, v.real
    order = np.argsort(-w.real)
    w, v = w[order], v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    return Linearization(jac, w, v)


# -- profile grids -----------------------------------------------------------


@dataclass(frozen=True)
class ProfileOptions:
    delta0: float | None = None  # launch offset; default 1e-7 (R- - R+)
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    tail_tol: float = 1e-9
    n_points: int = 2001
    pad: float = 0.2
    max_length: float = 1e6


@dataclass(frozen=True, eq=False)
class ProfileGrid:
    """Profile sampled on a uniform grid with R(0) = (R+ + R-)/2."""

    x: np.ndarray
    R: np.ndarray
    dR: np.ndarray
    d2R: np.ndarray
    d3R: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    d2U: np.ndarray
    shock: ShockData
    tail_residuals: tuple = (0.0, 0.0)
    meta: dict = field(default_factory=dict)
    state_fn: object = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def at(self, x) -> "ProfileGrid":
        """The same profile sampled at other nodes (uniform or not)."""
        if self.state_fn is None:
            raise ValueError("profile carries no continuous representation")
        x = np.asarray(x, dtype=float)
        R, dR = self.state_fn(x)
        return _fill_grid(x, R, dR, self.shock, self.tail_residuals, self.meta, self.state_fn)

    @property
    def length(self) -> float:
        return float(self.x[-1] - self.x[0])

    def ratio_mask(self, cutoff: float = TAIL_CUTOFF) -> np.ndarray:
        a = np.abs(self.dR)
        return a > cutoff * a.max()

    def ode_residual(self) -> float:
        """sup |R'' - rhs| with R'' obtained by differencing the sampled R'."""
        from qhdshock.fd import diff_matrix

        d1 = diff_matrix(self.n, self.dx, 1, order=6)
        d2_fd = d1 @ self.dR
        _, rhs = ode_rhs((self.R, self.dR), self.shock)
        return float(np.max(np.abs(d2_fd - rhs)))

    def to_csv(self, path, header: dict | None = None) -> None:
        write_profile_csv(self, path, header)


def velocity_from_density(x, R, dR, d2R, sd: ShockData):
    """U = s - A/R and its first two derivatives by exact differentiation."""
    if np.any(R <= 0):
        raise DomainError("vacuum in profile")
    a = sd.a_const
    U = sd.s - a / R
    dU = a * dR / R**2
    d2U = a * d2R / R**2 - 2.0 * a * dR**2 / R**3
    return U, dU, d2U


def _launch(sd: ShockData, delta0: float):
    lin = equilibrium_linearization(sd, "-")
    if not lin.is_saddle:
        raise StructureError(f"launch equilibrium is not a saddle: {lin.eigenvalues}")
    lam = float(lin.eigenvalues[0])
    v = np.asarray(lin.eigenvectors[:, 0], dtype=float)
    if v[0] > 0:
        v = -v
    return lam, v, np.array([sd.r_minus, 0.0]) + delta0 * v


def solve_profile(sd: ShockData, opts: ProfileOptions | None = None) -> ProfileGrid:
    """Shoot the unstable manifold of (R-, 0) into (R+, 0) and resample it."""
    opts = opts or ProfileOptions()
    if not sd.r_plus < sd.r_minus:
        raise DomainError("decreasing profiles need R+ < R-")
    delta0 = opts.delta0 if opts.delta0 is not None else 1e-7 * sd.eps
    lam, v, y0 = _launch(sd, delta0)
    rp = sd.r_plus
    floor = 1e-3 * rp

    def rhs(_x, y):
        return ode_rhs(y, sd)

    def arrived(_x, y):
        return math.hypot(y[0] - rp, y[1]) - opts.tail_tol

    def vacuum(_x, y):
        return y[0] - floor

    arrived.terminal = True
    vacuum.terminal = True
    # the arrival event must not fire at the launch point
    arrived.direction = -1

    sol = solve_ivp(
        rhs,
        (0.0, opts.max_length),
        y0,
        method="DOP853",
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        events=(arrived, vacuum),
        dense_output=True,
    )
    if sol.status == -1:
        raise NoConnectionError(f"integration failed: {sol.message}")
    if sol.t_events[1].size:
        raise NoConnectionError("trajectory reached vacuum")
    if not sol.t_events[0].size:
        raise NoConnectionError("trajectory did not approach (R+, 0) within the length budget")
    x_end = float(sol.t_events[0][0])

    # phase condition: first crossing of the mid level from the R- side
    mid = 0.5 * (sd.r_plus + sd.r_minus)
    ts = sol.t
    rs = sol.y[0]
    idx = np.flatnonzero((rs[:-1] - mid) * (rs[1:] - mid) <= 0)
    if not idx.size:
        raise NoConnectionError("profile never crosses the mid level")
    i = int(idx[0])
    x_mid = brentq(lambda t: sol.sol(t)[0] - mid, ts[i], ts[i + 1], xtol=1e-14)

    pad = opts.pad * x_end
    tail = solve_ivp(
        rhs,
        (x_end, x_end + pad),
        sol.y[:, -1],
        method="DOP853",
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        dense_output=True,
    )

    lo, hi = -pad - x_mid, x_end + pad - x_mid
    base = np.array([sd.r_minus, 0.0])

    def state_fn(xq):
        t = np.asarray(xq, dtype=float) + x_mid
        state = np.empty((2, t.size))
        left = t < 0.0
        core = (t >= 0.0) & (t <= x_end)
        right = t > x_end
        # backward continuation of the launch point along the linear unstable manifold
        state[:, left] = base[:, None] + delta0 * v[:, None] * np.exp(lam * t[left])
        state[:, core] = sol.sol(t[core])
        state[:, right] = tail.sol(t[right])
        return state

    x = np.linspace(lo, hi, opts.n_points)
    R, dR = state_fn(x)
    if np.any(R <= 0):
        raise NoConnectionError("vacuum on resampled grid")
    tails = (float(abs(R[0] - sd.r_minus)), float(abs(R[-1] - sd.r_plus)))
    meta = {"x_launch": float(-x_mid), "x_arrival": float(x_end - x_mid), "delta0": delta0, "nfev": int(sol.nfev)}
    return _fill_grid(x, R, dR, sd, tails, meta, state_fn)


def _fill_grid(x, R, dR, sd, tails, meta, state_fn) -> ProfileGrid:
    _, d2R = ode_rhs((R, dR), sd)
    d3R = third_derivative(R, dR, d2R, sd)
    U, dU, d2U = velocity_from_density(x, R, dR, d2R, sd)
    return ProfileGrid(x, R, dR, d2R, d3R, U, dU, d2U, sd, tails, meta, state_fn)


def write_profile_csv(grid: ProfileGrid, path, header: dict | None = None) -> None:
    from qhdshock.io import write_csv

    cols = ["x", "R", "dR", "d2R", "U", "dU", "d2U"]
    rows = np.column_stack([grid.x, grid.R, grid.dR, grid.d2R, grid.U, grid.dU, grid.d2U])
    hdr = dict(grid.shock.to_dict())
    hdr.update(header or {})
    write_csv(path, cols, rows, hdr)


# -- structure diagnostics ---------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    is_monotone: bool
    n_sign_changes: int
    min_R: float


def monotonicity_report(grid: ProfileGrid, tol_mono: float = 1e-6) -> MonotonicityReport:
    """Strictly decreasing on the core; sign changes counted above tol_mono max|R'|."""
    d = grid.dR
    scale = np.abs(d).max()
    big = np.abs(d) > tol_mono * scale
    signs = np.sign(d[big])
    changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
    core = grid.ratio_mask()
    lo, hi = np.flatnonzero(core)[[0, -1]]
    decreasing = bool(np.all(d[lo : hi + 1] < -tol_mono * scale))
    return MonotonicityReport(decreasing and changes == 0, changes, float(grid.R.min()))


@dataclass(frozen=True)
class BoundRatios:
    eps: float
    dR_over_eps2: float
    d2R_over_eps_dR: float
    dU_over_eps2: float
    d2U_over_eps_dR: float


def bound_ratios(grid: ProfileGrid) -> BoundRatios:
    eps = grid.shock.eps
    m = grid.ratio_mask()
    adr = np.abs(grid.dR[m])
    return BoundRatios(
        eps,
        float(np.abs(grid.dR).max() / eps**2),
        float(np.max(np.abs(grid.d2R[m]) / (eps * adr))),
        float(np.abs(grid.dU).max() / eps**2),
        float(np.max(np.abs(grid.d2U[m]) / (eps * adr))),
    )


def derivative_bound_sweep(grids) -> list[BoundRatios]:
    """Ratio rows for every monotone member of a family of profiles."""
    rows = []
    for g in grids:
        if not monotonicity_report(g).is_monotone:
            warnings.warn(f"eps={g.shock.eps}: non-monotone profile excluded from bound sweep")
            continue
        rows.append(bound_ratios(g))
    return rows


def loglog_slope(eps, values) -> float:
    return float(np.polyfit(np.log(np.asarray(eps)), np.log(np.asarray(values)), 1)[0])


@dataclass(frozen=True)
class R0Expansion:
    eps: float
    r0_numeric: float
    r0_expansion: float

    @property
    def gap(self) -> float:
        return abs(self.r0_numeric - self.r0_expansion)


def r0_and_expansion(sd: ShockData) -> R0Expansion:
    """Zero of f' between the end states against R- - eps/2 + (gamma-3) eps^2 / (24 R-)."""
    lo, hi = sd.r_plus, sd.r_minus
    flo, fhi = f_prime(lo, sd), f_prime(hi, sd)
    if not flo < 0.0 < fhi:
        raise StructureError("f' does not change sign between the end states")
    r0 = brentq(lambda r: f_prime(r, sd), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    # one Newton polish on the convex f
    r0 = r0 - f_prime(r0, sd) / f_second(r0, sd)
    eps, g, rm = sd.eps, sd.gamma, sd.r_minus
    return R0Expansion(eps, float(r0), rm - eps / 2.0 + (g - 3.0) / (24.0 * rm) * eps**2)


def a_expansion_residual(sd: ShockData) -> float:
    """|A - (R- c_s(R-) - (gamma+1) c_s(R-) eps / 4)|."""
    c = float(sound_speed(sd.r_minus, sd.gamma))
    return abs(sd.a_const - (sd.r_minus * c - 0.25 * (sd.gamma + 1.0) * c * sd.eps))


def a_expansion_check(shocks) -> dict:
    eps = [sd.eps for sd in shocks]
    res = [a_expansion_residual(sd) for sd in shocks]
    return {"eps": eps, "residual": res, "slope": loglog_slope(eps, res)}


def tanh_rate(sd: ShockData) -> float:
    """c = gamma (gamma+1) R-^(gamma-2) / (2 s mu) of the reduced Riccati equation."""
    g = sd.gamma
    return g * (g + 1.0) * sd.r_minus ** (g - 2.0) / (2.0 * sd.s * sd.gas.mu)


def tanh_reference(sd: ShockData):
    """Leading-order profile x -> (R+ + R-)/2 - (eps/2) tanh(c eps x / 2)."""
    c, eps = tanh_rate(sd), sd.eps
    mid = 0.5 * (sd.r_plus + sd.r_minus)

    def profile(x):
        return mid - 0.5 * eps * np.tanh(0.5 * c * eps * np.asarray(x))

    return profile


def tanh_alignment_error(grid: ProfileGrid) -> tuple[float, float]:
    """(sup |R - R_tanh(. - shift)| at the best shift, best shift)."""
    ref = tanh_reference(grid.shock)
    width = 2.0 / (tanh_rate(grid.shock) * grid.shock.eps)

    def err(shift):
        return float(np.max(np.abs(grid.R - ref(grid.x - shift))))

    res = minimize_scalar(err, bounds=(-width, width), method="bounded", options={"xatol": 1e-6 * width})
    best = min((res.fun, res.x), (err(0.0), 0.0))
    return best


def fig1_shock(eps: float, gamma: float = 1.5, r_minus: float = 0.7, s: float = 1.0, mu: float = 1.0,
               k: float = math.sqrt(2.0)) -> ShockData:
    """Shock of the reference family (gamma=3/2, R-=0.7, s=1, mu=1, k=sqrt 2)."""
    from qhdshock.hydro import GasParams

    return build_shock(r_minus, r_minus - eps, s, GasParams(gamma, mu, k))
