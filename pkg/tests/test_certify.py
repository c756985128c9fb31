from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhdshock.certify import (
    PerturbationRatios,
    SweepCell,
    SweepSpec,
    YoungWeights,
    best_young_weights,
    combined_margins,
    ee_certificate,
    eigenpair_on_grid,
    empirical_eps_bar,
    energy,
    energy_balance,
    energy_identity_residual,
    epsilon_sweep,
    kappa_speed,
    lemma_constants,
    max_workers,
    omega_flip_empirical,
    omega_flip_quadratic,
    outcome_label,
    perturbation_coefficients,
    perturbation_ratios,
)
from qhdshock.coeffs import coefficient_fields, eta_select, hyperbolic_certificate, lemma_f1g_certificate, omega_certificate
from qhdshock.hydro import GasParams, kappa, sound_speed
from qhdshock.profile import fig1_shock, solve_profile

SMALL = (0.05, 0.025, 0.0125)


@pytest.fixture(scope="module")
def ratios(ladder_grids):
    return {e: perturbation_ratios(coefficient_fields(g), g) for e, g in ladder_grids.items()}


@pytest.fixture(scope="module")
def certificates(ladder_grids):
    return {e: ee_certificate(g) for e, g in ladder_grids.items()}


# -- perturbation ratios -------------------------------------------------------------


def test_ratios_are_order_one_in_eps(ratios):
    for key in ("t1", "t2", "t3", "t4", "t5", "t6", "t7", "t3_rho", "t6_rhop"):
        vals = [getattr(ratios[e], key) for e in SMALL]
        assert max(vals) / min(vals) <= 2.0, (key, vals)


def test_g_prime_ratio_is_bracketed_by_the_f1_bounds(ladder_grids, ratios):
    # t4 = sup |mu g' / f1| / (eps |R'|) lies between the lemma's dg ratio over sup f1 and over inf f1
    for e in SMALL:
        g = ladder_grids[e]
        fg = lemma_f1g_certificate(coefficient_fields(g), g)
        mu = g.shock.gas.mu
        assert mu * fg.dg_ratio / fg.sup_f1 <= ratios[e].t4 * (1 + 1e-12)
        assert ratios[e].t4 <= mu * fg.dg_ratio / fg.inf_f1 * (1 + 1e-12)


def test_perturbation_coefficients_by_hand():
    r = PerturbationRatios(0.1, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0)
    w = YoungWeights(2.0, 0.5, 4.0)
    p = perturbation_coefficients(r, w)
    assert p["rho"] == pytest.approx(0.1 * (8.0 + 0.5 * 2.0 * 6.0 + 0.5 * 4.0 * 7.0))
    assert p["v"] == pytest.approx(0.1 * (1.0 + 0.5 * 6.0 / 2.0 + 0.5 * 5.0 / 0.5))
    assert p["rho_prime"] == pytest.approx(0.1 * (9.0 + 0.5 * 0.5 * 5.0 + 0.5 * 7.0 / 4.0))
    assert p["v_prime"] == pytest.approx(0.1 * (3.0 + 6.0))
    assert set(r.seven()) == {f"t{i}" for i in range(1, 8)}


@settings(max_examples=40)
@given(st.floats(0.01, 100.0), st.floats(0.01, 100.0), st.floats(0.01, 100.0))
def test_optimized_weights_beat_any_weights(ladder_grids, ratios, a, b, c):
    g = ladder_grids[0.05]
    f = coefficient_fields(g)
    eta = eta_select(f.q1, f.q2, f.q3)
    consts = lemma_constants(lemma_f1g_certificate(f, g), hyperbolic_certificate(f, eta, g),
                             omega_certificate(f, g), g.shock.gas.mu, g.shock.gas.k)
    best = best_young_weights(consts, ratios[0.05])

    def worst(w):
        m = combined_margins(consts, ratios[0.05], w)
        return min(m[k] / abs(consts[k]) for k in m)

    # the log grid is 49 points per decade-6 span, so allow one grid step of slack
    assert worst(best) >= worst(YoungWeights(a, b, c)) - 0.02


# -- energy and the balance identity --------------------------------------------------------


def test_energy_of_gaussian_with_unit_weight():
    x = np.linspace(-60, 60, 4001)
    w, k = 5.0, math.sqrt(2.0)
    rho = np.exp(-((x / w) ** 2))
    v = 0.5 * rho
    e = energy(rho, v, x, np.ones_like(x), k)
    exact = w * math.sqrt(math.pi / 2) * (1 + 0.25) + 0.5 * k * k * math.sqrt(math.pi / 2) / w
    assert e == pytest.approx(exact, rel=1e-10)


@settings(max_examples=30)
@given(st.integers(0, 2**31 - 1))
def test_energy_is_positive(seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(0, 10, 200)
    f1 = rng.uniform(0.1, 2.0, x.size)
    rho = rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size)
    v = rng.standard_normal(x.size)
    assert energy(rho, v, x, f1, 1.0) > 0
    assert energy(np.zeros(x.size), np.zeros(x.size), x, f1, 1.0) == 0


def test_identity_on_eigenpairs(small_run):
    g = small_run.op_A.grid
    fields = coefficient_fields(g)
    spec = small_run.spec_A
    assert spec.localized
    for i in spec.localized:
        pair = eigenpair_on_grid(spec, i)
        assert energy_identity_residual(pair, fields, g) <= 1e-3


def test_identity_balance_is_linear_in_re_lambda(small_run):
    g = small_run.op_A.grid
    fields = coefficient_fields(g)
    lam, rho, v = eigenpair_on_grid(small_run.spec_A, small_run.spec_A.localized[0])
    b0 = energy_balance(lam, rho, v, fields, g)
    b1 = energy_balance(lam + 0.3, rho, v, fields, g)
    e = energy(rho, v, g.x, fields.f1, g.shock.gas.k)
    assert b1.lhs - b0.lhs == pytest.approx(0.3 * e, rel=1e-10)
    assert b1.rhs == b0.rhs
    assert len(b0.terms) == 13


def test_identity_rejects_a_non_eigenpair(small_run):
    g = small_run.op_A.grid
    fields = coefficient_fields(g)
    x = g.x
    w = np.exp(-((x / (0.05 * g.length)) ** 2))
    rho, v = w * (1 + 0.3 * np.cos(x / 7)), 0.5 * w * np.cos(x / 13)
    assert energy_identity_residual((0.0, rho, v), fields, g) >= 0.1


# -- the certificate ---------------------------------------------------------------------------


def test_certificate_passes_for_small_eps(certificates):
    for e in SMALL:
        c = certificates[e]
        assert c.passed and c.in_hypothesis, (e, c.reason)
        assert all(v > 0 for v in c.margins.values())
    assert certificates[0.1].status == "fail" and "margins" in certificates[0.1].reason


def test_margins_improve_as_eps_decreases(certificates):
    for key in ("rho", "v", "rho_prime", "v_prime"):
        vals = [certificates[e].margins[key] for e in SMALL]
        for a, b in zip(vals, vals[1:]):
            assert b >= a - 0.05 * abs(a), (key, vals)


def test_margins_approach_the_endpoint_constants(certificates, ratios):
    # margin = constant - eps * (ratio combination): the gap to the constant shrinks with eps
    gaps = []
    for e in SMALL:
        c = certificates[e]
        consts = {"rho": c.hyperbolic["C1_emp"], "v": c.hyperbolic["C2_emp"]}
        gaps.append(max(abs(consts[k] - c.margins[k]) for k in consts))
    assert gaps[0] > gaps[1] > gaps[2]


def test_certificate_not_applicable():
    osc = ee_certificate(solve_profile(fig1_shock(0.6)))
    assert osc.status == "not-applicable" and "monotone" in osc.reason
    from qhdshock.hydro import build_shock

    sup = ee_certificate(solve_profile(build_shock(0.7, 0.65, 2.3, GasParams())))
    assert sup.status == "not-applicable" and not sup.in_hypothesis


def test_certificate_record_is_serializable(certificates):
    import json

    from qhdshock.io import _jsonable

    d = certificates[0.05].to_dict()
    assert json.loads(json.dumps(_jsonable(d)))["status"] == "pass"
    assert set(d["young_weights"]) == {"rho_v", "rhop_v", "rho_rhop"}


def test_outcome_labels():
    assert outcome_label("pass", "spectrally_stable") == "certificate-passes / spectrum-stable"
    assert outcome_label("fail", "spectrally_stable") == "certificate-fails / spectrum-stable"
    assert outcome_label("not-applicable", "unstable") == "certificate-not-applicable / spectrum-unstable"
    assert outcome_label("pass", "inconclusive") == "certificate-passes / spectrum-inconclusive"
    assert outcome_label("pass", None) == "certificate-passes"


# -- omega threshold ----------------------------------------------------------------------------


@pytest.mark.parametrize("gamma", [1.0, 1.2, 1.5, 2.0, 2.5])
def test_quadratic_flip_is_kappa_speed(gamma):
    assert omega_flip_quadratic(0.7, gamma) == pytest.approx(kappa_speed(0.7, gamma), rel=1e-8)
    assert kappa_speed(0.7, gamma) == pytest.approx(kappa(gamma) * float(sound_speed(0.7, gamma)))


def test_quadratic_flip_absent_beyond_three():
    assert omega_flip_quadratic(0.7, 3.5) == math.inf


def test_empirical_flip_converges_to_kappa_speed():
    target = kappa_speed(0.7, 1.5)
    offsets = [abs(omega_flip_empirical(e, 0.7, GasParams(), 1.4, 1.7, tol=1e-4) / target - 1) for e in (0.05, 0.025)]
    # first order in eps: halving eps halves the offset
    assert offsets[1] < 0.6 * offsets[0]
    assert offsets[1] < 0.02
    with pytest.raises(ValueError):
        omega_flip_empirical(0.05, 0.7, GasParams(), 0.8, 1.0)


# -- sweeps -------------------------------------------------------------------------------------


def test_sweep_orders_cells_and_records_errors():
    spec = SweepSpec(GasParams(), 0.7)
    cells = epsilon_sweep(spec, [0.05, 0.8, 0.1], [1.2, 1.0])
    assert [(c.eps, c.s) for c in cells] == [(0.8, 1.0), (0.8, 1.2), (0.1, 1.0), (0.1, 1.2), (0.05, 1.0), (0.05, 1.2)]
    bad = cells[0]
    assert bad.certificate == "error" and bad.outcome == "error" and "DomainError" in bad.message
    assert cells[4].certificate == "pass" and cells[4].verdict is None
    assert set(cells[4].row()) >= {"eps", "s", "certificate", "margin_v", "message"}


def test_parallel_sweep_matches_serial():
    spec = SweepSpec(GasParams(), 0.7)
    serial = epsilon_sweep(spec, [0.1, 0.05], [1.0, 2.3], jobs=1)
    parallel = epsilon_sweep(spec, [0.05, 0.1], [2.3, 1.0], jobs=2)
    assert [c.row() for c in serial] == [c.row() for c in parallel]
    unstable = [c for c in serial if c.s == 2.3]
    assert all(c.verdict == "unstable" for c in unstable)


def test_worker_cap(monkeypatch):
    monkeypatch.delenv("QHDSHOCK_MAX_WORKERS", raising=False)
    assert max_workers(4) == 4
    monkeypatch.setenv("QHDSHOCK_MAX_WORKERS", "2")
    assert max_workers(4) == 2 and max_workers(1) == 1
    monkeypatch.setenv("QHDSHOCK_MAX_WORKERS", "0")
    assert max_workers(4) == 1


def test_empirical_eps_bar():
    def cell(e, s, status):
        return SweepCell(e, s, True, status, None, status)

    cells = [cell(0.1, 1.0, "fail"), cell(0.05, 1.0, "pass"), cell(0.025, 1.0, "pass"),
             cell(0.1, 1.5, "pass"), cell(0.05, 1.5, "fail"), cell(0.025, 1.5, "pass"),
             cell(0.1, 2.0, "pass"), cell(0.05, 2.0, "pass"), cell(0.025, 2.0, "pass")]
    bar = empirical_eps_bar(cells)
    assert bar[1.0] == 0.05 and bar[1.5] == 0.025 and bar[2.0] == 0.1
    assert math.isnan(empirical_eps_bar([cell(0.1, 1.0, "fail")])[1.0])
