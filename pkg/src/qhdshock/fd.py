"""Differentiation matrices on uniform grids (finite differences) and on
Chebyshev-Gauss-Lobatto grids (spectral collocation)."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.sparse as sp


@lru_cache(maxsize=None)
def stencil_weights(offsets: tuple[int, ...], deriv: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + o_j h) = h^deriv f^(deriv)(x) + O(h^len)."""
    o = np.asarray(offsets, dtype=float)
    m = o.size
    vander = np.vander(o, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(vander, rhs)


def diff_matrix(n: int, h: float, deriv: int, order: int = 4) -> sp.csr_matrix:
    """Sparse d^deriv/dx^deriv on n uniform nodes; one-sided stencils near the ends."""
    if deriv < 1:
        raise ValueError("deriv must be >= 1")
    half = (deriv + 1) // 2 - 1 + order // 2
    width_c = 2 * half + 1
    width_b = order + deriv
    if n < max(width_c, width_b):
        raise ValueError(f"grid too small ({n}) for a {order}-order stencil of derivative {deriv}")
    rows, cols, vals = [], [], []
    for i in range(n):
        if half <= i < n - half:
            start, width = i - half, width_c
        else:
            width = width_b
            start = 0 if i < half else n - width
        offs = tuple(range(start - i, start - i + width))
        w = stencil_weights(offs, deriv)
        rows.extend([i] * width)
        cols.extend(range(start, start + width))
        vals.extend(w)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return mat / h**deriv


def chebyshev_nodes(n: int, lo: float, hi: float) -> np.ndarray:
    """n Gauss-Lobatto points mapped to [lo, hi], increasing."""
    t = -np.cos(np.pi * np.arange(n) / (n - 1))
    return lo + 0.5 * (hi - lo) * (t + 1.0)


def chebyshev_matrix(n: int, lo: float, hi: float) -> np.ndarray:
    """Dense first-derivative collocation matrix on chebyshev_nodes(n, lo, hi)."""
    N = n - 1
    t = -np.cos(np.pi * np.arange(n) / N)
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n)
    dt = t[:, None] - t[None, :]
    D = np.outer(c, 1.0 / c) / (dt + np.eye(n))
    D -= np.diag(D.sum(axis=1))
    return D * (2.0 / (hi - lo))


def periodic_diff_matrix(n: int, h: float, deriv: int, order: int = 4) -> sp.csr_matrix:
    """Central d^deriv/dx^deriv on a periodic uniform grid of n nodes."""
    half = (deriv + 1) // 2 - 1 + order // 2
    if n < 2 * half + 1:
        raise ValueError(f"grid too small ({n}) for a periodic stencil of width {2 * half + 1}")
    w = stencil_weights(tuple(range(-half, half + 1)), deriv)
    rows = np.repeat(np.arange(n), 2 * half + 1)
    cols = (rows + np.tile(np.arange(-half, half + 1), n)) % n
    vals = np.tile(w, n)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n)) / h**deriv
