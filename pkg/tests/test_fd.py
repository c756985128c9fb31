from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhdshock.fd import chebyshev_matrix, chebyshev_nodes, diff_matrix, periodic_diff_matrix, stencil_weights


@pytest.mark.parametrize("deriv", [1, 2, 3])
def test_exact_on_polynomials(deriv):
    # fourth-order stencils (central and one-sided) differentiate degree <= deriv + 3 exactly
    n, h = 30, 0.1
    x = np.arange(n) * h - 1.0
    d = diff_matrix(n, h, deriv)
    for degree in range(deriv + 4):
        p = np.polynomial.Polynomial(np.arange(1, degree + 2, dtype=float))
        assert np.allclose(d @ p(x), p.deriv(deriv)(x), atol=1e-8 * max(1.0, np.abs(p(x)).max()))


@pytest.mark.parametrize("deriv", [1, 2, 3])
def test_fourth_order_rate(deriv):
    errs = []
    for n in (81, 161, 321):
        x = np.linspace(0.0, 2.0, n)
        d = diff_matrix(n, x[1] - x[0], deriv)
        exact = np.imag(1j**deriv * np.exp(3j * x)) * 3**deriv  # d^k sin(3x)
        errs.append(np.abs(d @ np.sin(3 * x) - exact).max())
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 3.5)


@given(st.integers(1, 3), st.integers(0, 6))
def test_stencil_weights_annihilate_constants(deriv, shift):
    offs = tuple(range(-shift, -shift + deriv + 4))
    w = stencil_weights(offs, deriv)
    assert abs(w.sum()) < 1e-9


def test_too_small_grid():
    with pytest.raises(ValueError):
        diff_matrix(4, 0.1, 3)
    with pytest.raises(ValueError):
        diff_matrix(10, 0.1, 0)
    with pytest.raises(ValueError):
        periodic_diff_matrix(4, 0.1, 3)


@pytest.mark.parametrize("deriv", [1, 2, 3])
def test_periodic_fourier_symbol(deriv):
    # a Fourier mode is an exact eigenvector; the eigenvalue converges at fourth order
    errs = []
    for n in (32, 64, 128):
        L = 2 * np.pi
        x = np.arange(n) * L / n
        mode = np.exp(2j * x)
        out = periodic_diff_matrix(n, L / n, deriv) @ mode
        ratio = out / mode
        assert np.allclose(ratio, ratio[0])
        errs.append(abs(ratio[0] - (2j) ** deriv))
    assert np.all(np.log2(np.array(errs[:-1]) / np.array(errs[1:])) > 3.8)


def test_chebyshev_differentiates_polynomials_exactly():
    n = 16
    x = chebyshev_nodes(n, -3.0, 5.0)
    assert x[0] == pytest.approx(-3.0) and x[-1] == pytest.approx(5.0) and np.all(np.diff(x) > 0)
    d = chebyshev_matrix(n, -3.0, 5.0)
    p = np.polynomial.Polynomial([1.0, -2.0, 0.5, 0.1, -0.01])
    assert np.allclose(d @ p(x), p.deriv()(x), atol=1e-10)
    assert np.allclose(d @ np.ones(n), 0.0, atol=1e-12)
