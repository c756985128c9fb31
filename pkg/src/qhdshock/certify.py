"""End-to-end energy-estimate certificate for a shock profile, the quadrature
check of the energy balance on computed eigenpairs, and (eps, s) sweeps.

The certificate replaces "C - C eps > 0 for eps small" by numbers: empirical
lemma constants minus measured perturbation ratios times eps.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from qhdshock.coeffs import (
    CertificateInfeasibleError,
    CoefficientFields,
    SupersonicCoefficientError,
    coefficient_fields,
    eta_select,
    hyperbolic_certificate,
    lemma_f1g_certificate,
    omega_certificate,
)
from qhdshock.fd import diff_matrix
from qhdshock.hydro import GasParams, ShockData, build_shock, kappa, sound_speed, speed_bound
from qhdshock.profile import ProfileGrid, ProfileOptions, monotonicity_report, solve_profile

log = logging.getLogger(__name__)

WORKER_ENV = "QHDSHOCK_MAX_WORKERS"
IDENTITY_TOL = 1e-3


# -- coefficient derivatives shared by the ratios and the identity ------------------


def _aux(fields: CoefficientFields, grid: ProfileGrid) -> dict[str, np.ndarray]:
    f1, df1, d2f1 = fields.f1, fields.df1, fields.d2f1
    lr = grid.dR / grid.R
    dlr = grid.d2R / grid.R - lr**2
    inv1 = -df1 / f1**2
    inv2 = -d2f1 / f1**2 + 2.0 * df1**2 / f1**3
    return {
        "inv_f1": 1.0 / f1,
        "inv_f1_p": inv1,
        "inv_f1_pp": inv2,
        "lr": lr,
        "dlr": dlr,
        "lrf": lr / f1,
        "lrf_p": dlr / f1 - lr * df1 / f1**2,
        "uf": grid.dU / f1,
        "uf_p": grid.d2U / f1 - grid.dU * df1 / f1**2,
    }


def _term_coefficients(fields: CoefficientFields, grid: ProfileGrid) -> dict[str, np.ndarray]:
    """Coefficients c1..c7 of the seven terms of the recast I2."""
    sd = grid.shock
    mu, k2 = sd.gas.mu, sd.gas.k**2
    x = _aux(fields, grid)
    return {
        "c1": mu * (0.5 * x["inv_f1_pp"] + 0.5 * x["lrf_p"] - x["inv_f1"] * x["dlr"]),  # |v|^2
        "c2": 2.0 * mu * x["uf_p"],  # rho v*
        "c3": 2.0 * mu * x["uf"],  # rho (v')*
        "c4": -mu * fields.dg / fields.f1,  # v* rho
        "c5": 0.5 * k2 * (x["inv_f1_pp"] + x["lrf_p"]),  # v* rho'
        "c6": k2 * (x["lrf"] + x["inv_f1_p"]),  # (v')* rho'
        "c7": 0.5 * k2 * fields.dg / fields.f1,  # rho* rho'
    }


# -- perturbation ratios -----------------------------------------------------------------


@dataclass(frozen=True)
class PerturbationRatios:
    """Sup-ratios of the seven I2 coefficients.

    t1, t2, t4, t5, t7: sup |c| / (eps |R'|).  t3, t6: sup |c| / (2 eps^2), the
    |v'|^2 share after Young with weight 1/eps; their companions t3_rho and
    t6_rhop are sup |c| / (2 |R'|), the share landing on |R'||rho|^2 and
    |R'||rho'|^2 respectively.
    """

    eps: float
    t1: float
    t2: float
    t3: float
    t4: float
    t5: float
    t6: float
    t7: float
    t3_rho: float
    t6_rhop: float

    def seven(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("t1", "t2", "t3", "t4", "t5", "t6", "t7")}

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class YoungWeights:
    """Young weights theta for the mixed terms: |c||p||q| <= (theta |p|^2 + |q|^2 / theta) |c| / 2.

    rho_v splits the rho v* terms (T2, T4), rhop_v the v* rho' term (T5),
    rho_rhop the rho* rho' term (T7); the first named variable gets theta.
    """

    rho_v: float = 1.0
    rhop_v: float = 1.0
    rho_rhop: float = 1.0


def perturbation_coefficients(r: PerturbationRatios, w: YoungWeights = YoungWeights()) -> dict[str, float]:
    """eps-scaled perturbation coefficients of the four weights of the final estimate."""
    e = r.eps
    t24 = r.t2 + r.t4
    return {
        "rho": e * (r.t3_rho + 0.5 * w.rho_v * t24 + 0.5 * w.rho_rhop * r.t7),
        "v": e * (r.t1 + 0.5 * t24 / w.rho_v + 0.5 * r.t5 / w.rhop_v),
        "rho_prime": e * (r.t6_rhop + 0.5 * w.rhop_v * r.t5 + 0.5 * r.t7 / w.rho_rhop),
        "v_prime": e * (r.t3 + r.t6),
    }


def perturbation_ratios(fields: CoefficientFields, grid: ProfileGrid, eps: float | None = None) -> PerturbationRatios:
    eps = grid.shock.eps if eps is None else eps
    c = _term_coefficients(fields, grid)
    m = grid.ratio_mask()
    adr = np.abs(grid.dR[m])

    def per_rdr(name):
        return float(np.max(np.abs(c[name][m]) / (eps * adr)))

    def per_eps2(name):
        return float(np.max(np.abs(c[name])) / (2.0 * eps * eps))

    def per_dr(name):
        return float(np.max(np.abs(c[name][m]) / (2.0 * adr)))

    t1, t2, t4, t5, t7 = (per_rdr(k) for k in ("c1", "c2", "c4", "c5", "c7"))
    return PerturbationRatios(eps, t1, t2, per_eps2("c3"), t4, t5, per_eps2("c6"), t7, per_dr("c3"), per_dr("c6"))


# -- energy and the balance identity --------------------------------------------------


def energy_weight(fields: CoefficientFields) -> np.ndarray:
    if np.any(fields.f1 <= 0):
        raise SupersonicCoefficientError("weight needs f1 > 0")
    return 1.0 / np.sqrt(fields.f1)


def _trapz(y, x) -> float:
    return float(np.trapezoid(y, x))


def _derivative(vec, x):
    x = np.asarray(x)
    h = x[1] - x[0]
    if np.allclose(np.diff(x), h, rtol=1e-9, atol=0):
        return diff_matrix(x.size, h, 1) @ vec
    return np.gradient(vec, x, edge_order=2)


def energy(rho, v, x, f1, k: float) -> float:
    """E = int |rho|^2 + int |v|^2 / f1 + (k^2/2) int |rho'|^2 / f1."""
    rho, v, f1 = np.asarray(rho), np.asarray(v), np.asarray(f1)
    drho = _derivative(rho, x)
    return _trapz(np.abs(rho) ** 2 + np.abs(v) ** 2 / f1 + 0.5 * k * k * np.abs(drho) ** 2 / f1, x)


@dataclass(frozen=True)
class IdentityBalance:
    lhs: float
    rhs: float
    scale: float
    terms: dict

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / self.scale


def energy_balance(lam: complex, rho, v, fields: CoefficientFields, grid: ProfileGrid) -> IdentityBalance:
    """Both sides of the energy balance for a pair (lam, rho, v) on the full grid."""
    sd = grid.shock
    mu, k2 = sd.gas.mu, sd.gas.k**2
    x = grid.x
    rho, v = np.asarray(rho, dtype=complex), np.asarray(v, dtype=complex)
    rp, vp = _derivative(rho, x), _derivative(v, x)
    f1 = fields.f1
    c = _term_coefficients(fields, grid)
    a2r, a2v, a2rp, a2vp = (np.abs(z) ** 2 for z in (rho, v, rp, vp))

    lhs_terms = {
        "re_lambda_E": lam.real * _trapz(a2r + a2v / f1 + 0.5 * k2 * a2rp / f1, x),
        "I1_g": -_trapz(fields.g * a2r, x),
        "I1_a": _trapz(fields.a * a2v, x),
        "I1_b": -_trapz(np.real(fields.b * rho * np.conj(v)), x),
        "visc": mu * _trapz(a2vp / f1, x),
        "omega": 0.5 * k2 * _trapz(fields.omega * a2rp, x),
    }
    rhs_terms = {
        "T1": _trapz(c["c1"] * a2v, x),
        "T2": _trapz(np.real(c["c2"] * rho * np.conj(v)), x),
        "T3": _trapz(np.real(c["c3"] * rho * np.conj(vp)), x),
        "T4": _trapz(np.real(c["c4"] * np.conj(v) * rho), x),
        "T5": _trapz(np.real(c["c5"] * np.conj(v) * rp), x),
        "T6": _trapz(np.real(c["c6"] * np.conj(vp) * rp), x),
        "T7": _trapz(np.real(c["c7"] * np.conj(rho) * rp), x),
    }
    lhs, rhs = sum(lhs_terms.values()), sum(rhs_terms.values())
    scale = sum(abs(t) for t in lhs_terms.values()) + sum(abs(t) for t in rhs_terms.values())
    return IdentityBalance(float(lhs), float(rhs), float(scale) or 1.0, {**lhs_terms, **rhs_terms})


def energy_identity_residual(eigenpair, fields: CoefficientFields, grid: ProfileGrid) -> float:
    """|LHS - RHS| / (sum of term magnitudes) for (lam, rho, v) given on the full grid."""
    lam, rho, v = eigenpair
    return energy_balance(complex(lam), rho, v, fields, grid).residual


def interior_to_full(vec_interior) -> np.ndarray:
    return np.concatenate([[0.0], vec_interior, [0.0]])


def eigenpair_on_grid(spec, i: int):
    """(lam, rho, v) of tracked entry i, zero-padded to the full node set."""
    rho, v = spec.vectors[0::2, i], spec.vectors[1::2, i]
    return spec.tracked[i].value, interior_to_full(rho), interior_to_full(v)


# -- the certificate ------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateReport:
    shock: dict
    status: str  # pass | fail | not-applicable
    in_hypothesis: bool
    eta: float | None = None
    f1g: dict | None = None
    hyperbolic: dict | None = None
    omega: dict | None = None
    ratios: dict | None = None
    young_weights: dict | None = None
    margins: dict | None = None
    identity_residual: float | None = None
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self):
        return asdict(self)


def lemma_constants(f1g, hyp, om, mu: float, k: float) -> dict[str, float]:
    """Lower bounds of the four positive terms: C1, C2, C3 k^2/2 and mu / sup f1."""
    return {"rho": hyp.C1_emp, "v": hyp.C2_emp, "rho_prime": 0.5 * k * k * om.C3_emp, "v_prime": mu / f1g.sup_f1}


def combined_margins(consts: dict, ratios: PerturbationRatios, w: YoungWeights = YoungWeights()) -> dict[str, float]:
    """The four bracketed coefficients of the final estimate."""
    pert = perturbation_coefficients(ratios, w)
    return {key: consts[key] - pert[key] for key in consts}


def best_young_weights(consts: dict, ratios: PerturbationRatios, grid_size: int = 49) -> YoungWeights:
    """Weights maximizing the smallest relative margin over a log grid in [1e-3, 1e3]^3."""
    th = np.logspace(-3, 3, grid_size)
    a, b, c = np.meshgrid(th, th, th, indexing="ij")
    w = YoungWeights(a, b, c)
    pert = perturbation_coefficients(ratios, w)
    worst = np.full(a.shape, np.inf)
    for key, const in consts.items():
        scale = abs(const) if const != 0 else 1.0
        worst = np.minimum(worst, (const - pert[key]) / scale)
    i = np.unravel_index(np.argmax(worst), worst.shape)
    return YoungWeights(float(a[i]), float(b[i]), float(c[i]))


def ee_certificate(grid: ProfileGrid, fields: CoefficientFields | None = None, eta: float | None = None,
                   ratios: PerturbationRatios | None = None) -> CertificateReport:
    sd = grid.shock
    in_hyp = bool(sd.s < speed_bound(sd.r_minus, sd.gamma))
    base = {"shock": sd.to_dict(), "in_hypothesis": in_hyp}
    mono = monotonicity_report(grid)
    if not mono.is_monotone:
        return CertificateReport(status="not-applicable", reason="profile is not monotone", **base)
    try:
        fields = fields if fields is not None else coefficient_fields(grid)
        if eta is None:
            eta = eta_select(fields.q1, fields.q2, fields.q3)
    except (SupersonicCoefficientError, CertificateInfeasibleError, ValueError) as exc:
        return CertificateReport(status="not-applicable", reason=str(exc), **base)
    f1g = lemma_f1g_certificate(fields, grid)
    hyp = hyperbolic_certificate(fields, eta, grid)
    om = omega_certificate(fields, grid)
    ratios = ratios if ratios is not None else perturbation_ratios(fields, grid)
    consts = lemma_constants(f1g, hyp, om, sd.gas.mu, sd.gas.k)
    weights = best_young_weights(consts, ratios)
    margins = combined_margins(consts, ratios, weights)
    ok = f1g.passed and all(v > 0 for v in margins.values())
    failing = [k for k, v in margins.items() if not v > 0]
    reason = "" if ok else ("margins not positive: " + ", ".join(failing) if failing else "coefficient lemma failed")
    return CertificateReport(
        status="pass" if ok else "fail",
        eta=float(eta),
        f1g=f1g.to_dict(),
        hyperbolic=hyp.to_dict(),
        omega=om.to_dict(),
        ratios=ratios.to_dict(),
        young_weights=asdict(weights),
        margins=margins,
        reason=reason,
        **base,
    )


def outcome_label(cert_status: str, verdict: str | None) -> str:
    """Cross-tabulation label, e.g. 'certificate-fails / spectrum-stable'."""
    c = {"pass": "certificate-passes", "fail": "certificate-fails"}.get(cert_status, "certificate-not-applicable")
    if verdict is None:
        return c
    v = {"spectrally_stable": "spectrum-stable", "unstable": "spectrum-unstable"}.get(verdict, "spectrum-inconclusive")
    return f"{c} / {v}"


# -- omega threshold --------------------------------------------------------------------


def omega_flip_quadratic(r_minus: float, gamma: float) -> float:
    """Smaller root of 2 s^2 - 10 c s + (gamma + 9) c^2; inf when the roots are complex."""
    c = float(sound_speed(r_minus, gamma))
    roots = np.roots([2.0, -10.0 * c, (gamma + 9.0) * c * c])
    real = roots[np.abs(roots.imag) < 1e-14].real
    real = real[(real > 0) & (real < 2.0 * c)]
    return float(real.min()) if real.size else math.inf


def omega_flip_empirical(eps: float, r_minus: float, gas: GasParams, s_lo: float, s_hi: float,
                         tol: float = 1e-4, opts: ProfileOptions | None = None) -> float:
    """Shock speed where C3_emp (inf omega/|R'| along the computed profile) changes sign."""

    def c3(s):
        sd = build_shock(r_minus, r_minus - eps, s, gas)
        g = solve_profile(sd, opts)
        return omega_certificate(coefficient_fields(g, check=False), g).C3_emp

    lo_v, hi_v = c3(s_lo), c3(s_hi)
    if lo_v * hi_v > 0:
        raise ValueError(f"no sign change of C3 in [{s_lo}, {s_hi}]")
    while s_hi - s_lo > tol:
        mid = 0.5 * (s_lo + s_hi)
        mv = c3(mid)
        if lo_v * mv <= 0:
            s_hi = mid
        else:
            s_lo, lo_v = mid, mv
    return 0.5 * (s_lo + s_hi)


# -- sweeps -------------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    eps: float
    s: float
    in_hypothesis: bool
    certificate: str  # pass | fail | not-applicable | error
    verdict: str | None
    outcome: str
    margins: dict = field(default_factory=dict)
    max_re_border: float = math.nan
    message: str = ""
    report: dict = field(default_factory=dict, repr=False)

    def row(self) -> dict:
        out = {
            "eps": self.eps,
            "s": self.s,
            "in_hypothesis": int(self.in_hypothesis),
            "certificate": self.certificate,
            "verdict": self.verdict or "",
            "outcome": self.outcome,
            "max_re_border": self.max_re_border,
        }
        for k in ("rho", "v", "rho_prime", "v_prime"):
            out[f"margin_{k}"] = self.margins.get(k, math.nan)
        out["message"] = self.message
        return out


SWEEP_COLUMNS = [
    "eps", "s", "in_hypothesis", "certificate", "verdict", "outcome", "max_re_border",
    "margin_rho", "margin_v", "margin_rho_prime", "margin_v_prime", "message",
]


@dataclass(frozen=True)
class SweepSpec:
    gas: GasParams
    r_minus: float
    point_spectrum: bool = False  # dense eigensolves per cell (slow)
    n_spectrum: int = 1000
    scheme: str = "fd4"
    profile: ProfileOptions | None = None


def sweep_cell(spec: SweepSpec, eps: float, s: float) -> SweepCell:
    """One (eps, s) cell; any failure is recorded in the cell, never raised."""
    from qhdshock.spectrum import analyze_spectrum, shock_borders, spectral_verdict

    in_hyp = bool(s < speed_bound(spec.r_minus, spec.gas.gamma))
    try:
        sd = build_shock(spec.r_minus, spec.r_minus - eps, s, spec.gas)
        borders = shock_borders(sd)
        if spec.point_spectrum:
            report = analyze_spectrum(sd, n=spec.n_spectrum, scheme=spec.scheme).report
        else:
            report = spectral_verdict(sd, borders)
        # without point spectra only an essential-spectrum instability is a verdict
        verdict = report.verdict if spec.point_spectrum or report.verdict == "unstable" else None
        cert = ee_certificate(solve_profile(sd, spec.profile))
        return SweepCell(eps, s, in_hyp, cert.status, verdict, outcome_label(cert.status, verdict),
                         cert.margins or {}, report.max_re_border, cert.reason, cert.to_dict())
    except Exception as exc:  # recorded, the sweep goes on
        log.warning("sweep cell eps=%g s=%g failed: %s", eps, s, exc)
        return SweepCell(eps, s, in_hyp, "error", None, "error", {}, math.nan, f"{type(exc).__name__}: {exc}")


def _cell_job(args):
    return sweep_cell(*args)


def max_workers(jobs: int) -> int:
    cap = os.environ.get(WORKER_ENV)
    n = max(1, int(jobs))
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def epsilon_sweep(spec: SweepSpec, eps_list, s_list, jobs: int = 1) -> list[SweepCell]:
    """Cells ordered by eps descending, then s ascending, independent of scheduling."""
    eps_sorted = sorted({float(e) for e in eps_list}, reverse=True)
    s_sorted = sorted({float(s) for s in s_list})
    tasks = [(spec, e, s) for e in eps_sorted for s in s_sorted]
    workers = max_workers(jobs)
    if workers == 1 or len(tasks) == 1:
        return [_cell_job(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_cell_job, tasks))


def empirical_eps_bar(cells: list[SweepCell]) -> dict[float, float]:
    """Per s, the largest eps such that every eps at or below it passes (nan if none)."""
    out = {}
    for s in sorted({c.s for c in cells}):
        col = sorted((c for c in cells if c.s == s), key=lambda c: c.eps)
        bar = math.nan
        for c in col:
            if c.certificate != "pass":
                break
            bar = c.eps
        out[s] = bar
    return out


def kappa_speed(r_minus: float, gamma: float) -> float:
    return kappa(gamma) * float(sound_speed(r_minus, gamma))
