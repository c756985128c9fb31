from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhdshock.fd import diff_matrix
from qhdshock.hydro import DomainError, GasParams, build_shock
from qhdshock.io import read_csv
from qhdshock.profile import (
    ProfileOptions,
    bound_ratios,
    derivative_bound_sweep,
    equilibrium_linearization,
    f_long_form,
    f_of_R,
    f_prime,
    fig1_shock,
    monotonicity_report,
    ode_rhs,
    r0_and_expansion,
    solve_profile,
    tanh_alignment_error,
    tanh_reference,
    third_derivative,
)

from conftest import LADDER


@settings(max_examples=50)
@given(st.floats(0.02, 0.5), st.floats(0.3, 2.0), st.floats(1.0, 3.0), st.floats(0.05, 1.5))
def test_f_two_forms_agree(eps, s, gamma, r):
    sd = build_shock(0.7, 0.7 - eps, s, GasParams(gamma))
    assert f_of_R(r, sd) == pytest.approx(f_long_form(r, sd), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("eps", LADDER)
def test_end_states_are_equilibria(eps):
    sd = fig1_shock(eps)
    assert abs(f_of_R(sd.r_minus, sd)) < 1e-13
    assert abs(f_of_R(sd.r_plus, sd)) < 1e-13
    assert equilibrium_linearization(sd, "-").is_saddle
    # the right state is a sink: f'(R+) < 0 and the friction term damps
    right = equilibrium_linearization(sd, "+")
    assert not right.is_saddle and np.all(right.eigenvalues.real < 0)
    with pytest.raises(ValueError):
        equilibrium_linearization(sd, "0")


def test_f_prime_matches_difference():
    sd = fig1_shock(0.1)
    r = np.linspace(0.55, 0.75, 7)
    h = 1e-6
    assert np.allclose(f_prime(r, sd), (f_of_R(r + h, sd) - f_of_R(r - h, sd)) / (2 * h), atol=1e-8)


def test_third_derivative_matches_difference():
    sd = fig1_shock(0.1)
    g = solve_profile(sd)
    d = diff_matrix(g.n, g.dx, 1, order=6)
    # differencing the sampled R'' is limited by the integrator's absolute noise / h
    assert np.abs(d @ g.d2R - third_derivative(g.R, g.dR, g.d2R, sd)).max() < 1e-4 * np.abs(g.d3R).max()


@pytest.mark.parametrize("eps", LADDER)
def test_profile_connects_end_states(ladder_grids, eps):
    g = ladder_grids[eps]
    sd = g.shock
    assert max(g.tail_residuals) < 1e-6 * eps
    i0 = np.argmin(np.abs(g.x))
    assert g.x[i0] == pytest.approx(0.0, abs=g.dx)
    mid = 0.5 * (sd.r_minus + sd.r_plus)
    assert abs(g.R[i0] - mid) <= np.abs(g.dR).max() * g.dx
    assert g.ode_residual() < 1e-4 * np.abs(g.d2R).max()


def test_velocity_is_mass_flux_consistent(ladder_grids):
    g = ladder_grids[0.05]
    sd = g.shock
    assert np.allclose((sd.s - g.U) * g.R, sd.a_const, rtol=1e-13)
    d = diff_matrix(g.n, g.dx, 1, order=6)
    assert np.abs(d @ g.U - g.dU).max() < 1e-6 * np.abs(g.dU).max()
    assert np.abs(d @ g.dU - g.d2U).max() < 1e-4 * np.abs(g.d2U).max()


def test_resampling_reproduces_the_grid(ladder_grids):
    g = ladder_grids[0.1]
    again = g.at(g.x)
    assert np.array_equal(again.R, g.R) and np.array_equal(again.dR, g.dR)
    xs = np.linspace(g.x[0], g.x[-1], 777)
    fine = g.at(xs)
    assert np.allclose(np.interp(g.x, fine.x, fine.R), g.R, atol=1e-5 * g.shock.eps)


def test_monotone_small_and_oscillatory_large():
    assert monotonicity_report(solve_profile(fig1_shock(0.05))).is_monotone
    rep = monotonicity_report(solve_profile(fig1_shock(0.6)))
    assert not rep.is_monotone and rep.n_sign_changes >= 2


def test_decreasing_profiles_only():
    sd = build_shock(0.7, 0.75, 1.0, GasParams())
    with pytest.raises(DomainError):
        solve_profile(sd)


def test_tanh_reference_is_leading_order(ladder_grids):
    errs = [tanh_alignment_error(ladder_grids[e])[0] / e for e in LADDER]
    # relative error shrinks with eps (next order is O(eps))
    assert errs[-1] < errs[0]
    ref = tanh_reference(fig1_shock(0.05))
    assert ref(-1e9) == pytest.approx(0.7) and ref(1e9) == pytest.approx(0.65)


def test_bound_ratios_bounded(ladder_grids):
    rows = derivative_bound_sweep([ladder_grids[e] for e in LADDER])
    assert len(rows) == len(LADDER)
    for key in ("dR_over_eps2", "d2R_over_eps_dR", "dU_over_eps2", "d2U_over_eps_dR"):
        vals = [getattr(r, key) for r in rows]
        assert max(vals) / min(vals) <= 2.0, key


def test_bound_sweep_skips_oscillatory_profiles():
    with pytest.warns(UserWarning):
        rows = derivative_bound_sweep([solve_profile(fig1_shock(0.6))])
    assert rows == []


@pytest.mark.parametrize("eps", LADDER)
def test_r0_is_root_of_f_prime(eps):
    sd = fig1_shock(eps)
    x = r0_and_expansion(sd)
    assert abs(f_prime(x.r0_numeric, sd)) < 1e-14
    assert sd.r_plus < x.r0_numeric < sd.r_minus


def test_profile_csv_header(tmp_path, ladder_grids):
    g = ladder_grids[0.1]
    path = tmp_path / "p.csv"
    g.to_csv(path, {"note": "x"})
    header, names, rows = read_csv(path)
    assert names == ["x", "R", "dR", "d2R", "U", "dU", "d2U"]
    assert float(header["eps"]) == pytest.approx(0.1) and header["note"] == "x"
    assert len(rows) == g.n
    assert float(rows[3][1]) == g.R[3]


def test_looser_options_still_connect():
    g = solve_profile(fig1_shock(0.1), ProfileOptions(rel_tol=1e-8, abs_tol=1e-10, n_points=301))
    assert g.n == 301 and max(g.tail_residuals) < 1e-6


def test_ode_rhs_rejects_vacuum():
    with pytest.raises(DomainError):
        ode_rhs((np.array([0.1, -0.1]), np.zeros(2)), fig1_shock(0.1))


def test_bound_ratios_of_reference():
    r = bound_ratios(solve_profile(fig1_shock(0.05)))
    assert r.eps == pytest.approx(0.05) and r.dR_over_eps2 > 0
