"""Discretized linearized operator L and integrated operator A on a truncated
line, their filtered point spectra, and the Fredholm borders of the
essential spectrum.

Both operators act on interleaved grid vectors (first0, second0, first1, ...)
at the interior nodes; the boundary nodes carry homogeneous Dirichlet data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from qhdshock.coeffs import CoefficientFields, coefficient_fields
from qhdshock.fd import chebyshev_matrix, chebyshev_nodes, diff_matrix, periodic_diff_matrix
from qhdshock.hydro import GasParams, ShockData, enthalpy_prime, speed_bound, sound_speed
from qhdshock.profile import ProfileGrid, ProfileOptions, solve_profile

log = logging.getLogger(__name__)

SCHEMES = ("fd4", "spectral")
DEFAULT_N = 2000
BORDER_TOL = 1e-10
GAP_TOL = 1e-6
NEAR_ZERO = 1e-4
TRANSLATION_TOL = 1e-5
ASSEMBLY_TAIL_TOL = 1e-6

# the third-derivative stencils amplify integration noise in the profile,
# so spectral work runs the shooting at tighter tolerances
SPECTRAL_PROFILE = ProfileOptions(rel_tol=1e-13, abs_tol=1e-16, n_points=DEFAULT_N)


class AssemblyError(ValueError):
    """The profile grid cannot support the requested discretization."""


class EigenSolveError(RuntimeError):
    """Dense or shift-invert eigensolver failure."""


def spectral_profile(sd: ShockData, n: int = DEFAULT_N, pad: float = 0.2, **kw) -> ProfileGrid:
    return solve_profile(sd, replace(SPECTRAL_PROFILE, n_points=n, pad=pad, **kw))


# -- assembly --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    matrix: sp.csr_matrix  # interleaved components at interior nodes
    which: str  # "L" or "A"
    scheme: str
    x: np.ndarray  # interior nodes
    grid: ProfileGrid  # profile on the full node set
    order: int
    boundary: str = "dirichlet"

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.grid.n

    @property
    def length(self) -> float:
        return self.grid.length

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @staticmethod
    def split(vec):
        vec = np.asarray(vec)
        return vec[0::2], vec[1::2]

    @staticmethod
    def join(first, second):
        out = np.empty(2 * len(first), dtype=np.result_type(first, second))
        out[0::2] = first
        out[1::2] = second
        return out

    def metadata(self) -> dict:
        return {
            "operator": self.which,
            "scheme": self.scheme,
            "order": self.order,
            "n": self.n_nodes,
            "length": self.length,
            "boundary": self.boundary,
            "ordering": "interleaved",
        }

    def refined(self, factor: int = 2) -> "OperatorMatrix":
        """Same operator on the same domain with (n - 1) * factor + 1 nodes."""
        n = (self.n_nodes - 1) * factor + 1
        g = self.grid
        if self.scheme == "fd4":
            g = g.at(np.linspace(g.x[0], g.x[-1], n))
        else:
            g = g.at(chebyshev_nodes(n, g.x[0], g.x[-1]))
        return _assemble(self.which, g, self.scheme)

    def extended(self, factor: float = 1.5) -> "OperatorMatrix":
        """Same operator with the domain stretched by `factor` at fixed spacing."""
        g = self.grid
        core = g.meta["x_arrival"] - g.meta["x_launch"]
        pad = 0.5 * (factor * g.length / core - 1.0)
        n = int(round((g.n - 1) * factor)) + 1
        ng = spectral_profile(g.shock, n=n, pad=pad, delta0=g.meta["delta0"])
        if self.scheme == "spectral":
            ng = ng.at(chebyshev_nodes(n, ng.x[0], ng.x[-1]))
        return _assemble(self.which, ng, self.scheme)


def _check_grid(grid: ProfileGrid) -> None:
    worst = max(grid.tail_residuals)
    if not worst <= ASSEMBLY_TAIL_TOL:
        raise AssemblyError(f"domain too short: tail residual {worst:.2e} > {ASSEMBLY_TAIL_TOL:.0e}")


def _derivatives(grid: ProfileGrid, scheme: str):
    n = grid.n
    if scheme == "fd4":
        h = grid.dx
        if not np.allclose(np.diff(grid.x), h, rtol=1e-9, atol=0):
            raise AssemblyError("fd4 needs a uniform grid")
        return diff_matrix(n, h, 1), diff_matrix(n, h, 2), diff_matrix(n, h, 3), 4
    if scheme == "spectral":
        d1 = chebyshev_matrix(n, grid.x[0], grid.x[-1])
        if not np.allclose(chebyshev_nodes(n, grid.x[0], grid.x[-1]), grid.x, rtol=0, atol=1e-9 * grid.length):
            raise AssemblyError("spectral scheme needs Chebyshev nodes")
        d2 = d1 @ d1
        return sp.csr_matrix(d1), sp.csr_matrix(d2), sp.csr_matrix(d2 @ d1), n - 1
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _nodes_for(grid: ProfileGrid, scheme: str) -> ProfileGrid:
    if scheme == "spectral" and not np.allclose(
        chebyshev_nodes(grid.n, grid.x[0], grid.x[-1]), grid.x, rtol=0, atol=1e-9 * grid.length
    ):
        return grid.at(chebyshev_nodes(grid.n, grid.x[0], grid.x[-1]))
    return grid


def _truncate(blocks, n: int) -> sp.csr_matrix:
    full = sp.bmat(blocks, format="csr")
    m = n - 2
    inner = np.arange(1, n - 1)
    perm = np.empty(2 * m, dtype=int)
    perm[0::2] = inner
    perm[1::2] = n + inner
    return full[perm][:, perm].tocsr()


def lq_matrix(grid: ProfileGrid, scheme: str = "fd4") -> sp.csr_matrix:
    """L_Q rho = rho'''/2 - (R'/R) rho''/2 - (R'/R)' rho'/2 on all nodes."""
    d1, d2, d3, _ = _derivatives(grid, scheme)
    lr = grid.dR / grid.R
    dlr = grid.d2R / grid.R - lr**2
    return (0.5 * d3 - 0.5 * sp.diags(lr) @ d2 - 0.5 * sp.diags(dlr) @ d1).tocsr()


def _blocks_L(grid: ProfileGrid, d1, d2):
    sd = grid.shock
    s, mu, k2 = sd.s, sd.gas.mu, sd.gas.k**2
    R, R1, R2, U = grid.R, grid.dR, grid.d2R, grid.U
    dg = sp.diags
    root2 = R2 / (2.0 * np.sqrt(R)) - R1**2 / (4.0 * R**1.5)  # (R^(1/2))''
    rr = s * d1 - d1 @ dg(U)
    ru = -d1 @ dg(R)
    ur = (
        -d1 @ dg(enthalpy_prime(R, sd.gamma))
        + mu * d1 @ dg(1.0 / R) @ d1 @ dg(U)
        - mu * d1 @ dg(s * R1 / R**2)
        + 0.5 * k2 * d1 @ dg(R**-0.5) @ d2 @ dg(R**-0.5)
        - 0.5 * k2 * d1 @ dg(R**-1.5 * root2)
    )
    uu = s * d1 - d1 @ dg(U) + mu * d1 @ dg(1.0 / R) @ d1 @ dg(R)
    return [[rr, ru], [ur, uu]]


def _blocks_A(grid: ProfileGrid, fields: CoefficientFields, d1, d2, d3):
    sd = grid.shock
    s, mu, k2 = sd.s, sd.gas.mu, sd.gas.k**2
    R, R1, R2 = grid.R, grid.dR, grid.d2R
    dg = sp.diags
    lr = R1 / R
    dlr = R2 / R - lr**2
    lq = 0.5 * d3 - 0.5 * dg(lr) @ d2 - 0.5 * dg(dlr) @ d1
    f1, f2, g = fields.f1, fields.f2, fields.g
    rr = s * d1 + dg(g)
    rv = -d1 + dg(lr)
    vr = -dg(f1) @ d1 - dg(f2 * g) - 2.0 * mu * dg(grid.dU) @ d1 - mu * dg(fields.dg) + k2 * lq
    vv = dg(f2) @ d1 + mu * d2 - dg(lr * f2) - mu * dg(lr) @ d1 - mu * dg(dlr)
    return [[rr, rv], [vr, vv]]


def _assemble(which: str, grid: ProfileGrid, scheme: str, fields: CoefficientFields | None = None):
    _check_grid(grid)
    grid = _nodes_for(grid, scheme)
    d1, d2, d3, order = _derivatives(grid, scheme)
    if which == "L":
        blocks = _blocks_L(grid, d1, d2)
    elif which == "A":
        if fields is None or fields.f1.shape != grid.x.shape:
            fields = coefficient_fields(grid)
        blocks = _blocks_A(grid, fields, d1, d2, d3)
    else:
        raise ValueError("which must be 'L' or 'A'")
    mat = _truncate(blocks, grid.n)
    return OperatorMatrix(mat, which, scheme, grid.x[1:-1], grid, order)


def assemble_L(grid: ProfileGrid, fields: CoefficientFields | None = None, scheme: str = "fd4") -> OperatorMatrix:
    """Linearized operator in the perturbation variables (rho_hat, u_hat)."""
    return _assemble("L", grid, scheme)


def assemble_A(grid: ProfileGrid, fields: CoefficientFields | None = None, scheme: str = "fd4") -> OperatorMatrix:
    """Integrated, Gamma-transformed operator in the variables (rho, v)."""
    return _assemble("A", grid, scheme, fields)


def translation_residual(op: OperatorMatrix) -> float:
    """||L (R', U')|| / ||(R', U')|| at the interior nodes.

    The discretized L acts on (R', U') at all nodes: the translation mode is not
    zero at the truncation boundary, and dropping its boundary values would
    measure the Dirichlet cut (amplified by the third-derivative columns)
    instead of the consistency of the scheme."""
    if op.which != "L":
        raise ValueError("translation mode belongs to L")
    g = op.grid
    d1, d2, _, _ = _derivatives(g, op.scheme)
    blocks = _blocks_L(g, d1, d2)
    r1 = blocks[0][0] @ g.dR + blocks[0][1] @ g.dU
    r2 = blocks[1][0] @ g.dR + blocks[1][1] @ g.dU
    res = op.join(r1[1:-1], r2[1:-1])
    vec = op.join(g.dR[1:-1], g.dU[1:-1])
    return float(np.linalg.norm(res) / np.linalg.norm(vec))


def frozen_operator(r: float, u: float, gas: GasParams, s: float, n: int, length: float) -> sp.csr_matrix:
    """Constant-coefficient L on a periodic patch (fd4), interleaved ordering."""
    h = length / n
    d1, d2, d3 = (periodic_diff_matrix(n, h, d) for d in (1, 2, 3))
    a = s - u
    hp = float(enthalpy_prime(r, gas.gamma))
    blocks = [
        [a * d1, -r * d1],
        [-hp * d1 + gas.mu * u / r * d2 + gas.k**2 / (2.0 * r) * d3, a * d1 + gas.mu * d2],
    ]
    full = sp.bmat(blocks, format="csr")
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = n + np.arange(n)
    return full[perm][:, perm].tocsr()


# -- Gamma transform ---------------------------------------------------------------


def gamma_transform(rho, u, grid: ProfileGrid):
    """(rho, u) -> (rho, U rho + R u)."""
    rho = np.asarray(rho)
    return rho, grid.U * rho + grid.R * np.asarray(u)


def gamma_inverse(rho, v, grid: ProfileGrid):
    """(rho, v) -> (rho, (v - U rho) / R)."""
    rho = np.asarray(rho)
    return rho, (np.asarray(v) - grid.U * rho) / grid.R


# -- essential spectrum --------------------------------------------------------------


def symbol(r: float, u: float, gas: GasParams, s: float, xi) -> np.ndarray:
    """2x2 symbol of the asymptotic operator at (r, u) for each xi; shape (len(xi), 2, 2)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    hp = float(enthalpy_prime(r, gas.gamma))
    a = s - u
    out = np.empty((xi.size, 2, 2), dtype=complex)
    out[:, 0, 0] = 1j * xi * a
    out[:, 0, 1] = -1j * xi * r
    out[:, 1, 0] = -1j * xi * hp - gas.mu * xi**2 * u / r - 1j * xi**3 * gas.k**2 / (2.0 * r)
    out[:, 1, 1] = 1j * xi * a - gas.mu * xi**2
    return out


def default_xi_grid(xi_max: float = 50.0, n: int = 2001) -> np.ndarray:
    return np.linspace(-xi_max, xi_max, n)


@dataclass(frozen=True, eq=False)
class BorderCurves:
    label: str
    r: float
    u: float
    xi: np.ndarray
    lam: np.ndarray  # (2, len(xi)), continuously sorted branches
    max_re: float

    def maximizers(self, tol: float = BORDER_TOL) -> np.ndarray:
        """xi values where the larger real part is within tol of the maximum."""
        top = self.lam.real.max(axis=0)
        return self.xi[top >= self.max_re - tol]

    def rows(self):
        for branch in (0, 1):
            for x, lam in zip(self.xi, self.lam[branch]):
                yield (self.label, branch, float(x), float(lam.real), float(lam.imag))


def fredholm_borders(r: float, u: float, gas: GasParams, s: float, xi=None, label: str = "") -> BorderCurves:
    """Symbol eigenvalues lambda_1,2(xi), sorted continuously along the xi grid."""
    if r <= 0:
        raise ValueError("end-state density must be positive")
    xi = default_xi_grid() if xi is None else np.asarray(xi, dtype=float)
    ev = np.linalg.eigvals(symbol(r, u, gas, s, xi))
    lam = np.empty((2, xi.size), dtype=complex)
    lam[:, 0] = ev[0]
    for j in range(1, xi.size):
        a, b = ev[j]
        p0, p1 = lam[:, j - 1]
        if abs(a - p0) + abs(b - p1) <= abs(a - p1) + abs(b - p0):
            lam[:, j] = (a, b)
        else:
            lam[:, j] = (b, a)
    return BorderCurves(label, float(r), float(u), xi, lam, float(lam.real.max()))


def shock_borders(sd: ShockData, xi=None) -> tuple[BorderCurves, BorderCurves]:
    return (
        fredholm_borders(sd.r_minus, sd.u_minus, sd.gas, sd.s, xi, "minus"),
        fredholm_borders(sd.r_plus, sd.u_plus, sd.gas, sd.s, xi, "plus"),
    )


def dispersion_coefficients(r: float, u: float, gas: GasParams, s: float, lam: complex) -> np.ndarray:
    """det(symbol(nu) - lam) as a quartic in the spatial rate nu (highest degree first)."""
    a = s - u
    c2 = float(sound_speed(r, gas.gamma)) ** 2
    return np.array([0.5 * gas.k**2, gas.mu * s, a * a - c2 - gas.mu * lam, -2.0 * a * lam, lam * lam], dtype=complex)


def fredholm_index(sd: ShockData, lam: complex, tol: float = 1e-9) -> int | None:
    """Unstable spatial dimension at x = -inf minus that at x = +inf; None on a border."""
    counts = []
    for r, u in ((sd.r_minus, sd.u_minus), (sd.r_plus, sd.u_plus)):
        nu = np.roots(dispersion_coefficients(r, u, sd.gas, sd.s, lam))
        if np.any(np.abs(nu.real) <= tol):
            return None
        counts.append(int(np.sum(nu.real > 0)))
    return counts[0] - counts[1]


# -- point spectrum -------------------------------------------------------------------


@dataclass(frozen=True)
class FilterOptions:
    filter_tol: float = 1e-4  # allowed move under grid doubling
    tail_mass_tol: float = 0.01
    tail_band: float = 0.1  # fraction of interior nodes at each end counted as tail
    max_track: int = 40
    near_zero: float = NEAR_ZERO
    check_domain: bool = False  # also stretch the domain by domain_factor
    domain_factor: float = 1.5

    def __post_init__(self):
        for name in ("filter_tol", "tail_mass_tol", "tail_band", "near_zero", "domain_factor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_track < 1:
            raise ValueError("max_track must be >= 1")


@dataclass(frozen=True)
class Eigen:
    value: complex
    tail_mass: float
    refine_shift: float
    domain_shift: float
    index: int | None
    tag: str  # translation | point | essential-cluster | spurious

    @property
    def kept(self) -> bool:
        return self.tag in ("translation", "point")

    @property
    def localized(self) -> bool:
        return self.tag != "spurious"


@dataclass(frozen=True, eq=False)
class PointSpectrum:
    which: str
    eigenvalues: np.ndarray  # full dense spectrum
    tracked: tuple[Eigen, ...]
    vectors: np.ndarray  # columns match `tracked`
    meta: dict = field(default_factory=dict)

    @property
    def filtered(self) -> list[Eigen]:
        return [e for e in self.tracked if e.kept]

    @property
    def localized(self) -> list[int]:
        """Positions in `tracked` of grid-converged, tail-decaying eigenpairs."""
        return [i for i, e in enumerate(self.tracked) if e.localized]

    def near_zero(self, window: float = NEAR_ZERO) -> list[Eigen]:
        return [e for e in self.filtered if abs(e.value) <= window]

    def rows(self):
        for e in self.tracked:
            yield (float(e.value.real), float(e.value.imag), e.tag, e.tail_mass, e.refine_shift)


def tail_mass(vec, band: float = 0.1) -> float:
    first, second = OperatorMatrix.split(vec)
    dens = np.abs(first) ** 2 + np.abs(second) ** 2
    k = max(1, int(band * dens.size))
    total = dens.sum()
    return float((dens[:k].sum() + dens[-k:].sum()) / total) if total > 0 else 1.0


def nearest_eigenpair(op: OperatorMatrix, sigma: complex):
    """Eigenvalue of op closest to sigma and its vector, by shift-invert."""
    mat = op.matrix.astype(complex)
    n = mat.shape[0]
    opinv = None
    if mat.nnz > 0.1 * n * n:
        # collocation matrices are dense: a dense LU beats the sparse factorization
        lu = sla.lu_factor(mat.toarray() - sigma * np.eye(n), check_finite=False)
        opinv = spla.LinearOperator((n, n), matvec=lambda b: sla.lu_solve(lu, b, check_finite=False), dtype=complex)
    try:
        w, v = spla.eigs(mat, k=1, sigma=sigma, which="LM", tol=1e-12, OPinv=opinv)
    except (RuntimeError, spla.ArpackError) as exc:
        raise EigenSolveError(f"shift-invert at {sigma} failed on a {mat.shape[0]}-matrix: {exc}") from exc
    return complex(w[0]), v[:, 0]


def dense_eigenvalues(op: OperatorMatrix) -> np.ndarray:
    mat = op.dense()
    if not np.all(np.isfinite(mat)):
        raise EigenSolveError("matrix has non-finite entries")
    try:
        return sla.eigvals(mat, check_finite=False)
    except sla.LinAlgError as exc:
        raise EigenSolveError(
            f"dense eigensolve failed: size {mat.shape[0]}, norm {np.linalg.norm(mat, 1):.3e}"
        ) from exc


def point_spectrum(op: OperatorMatrix, opts: FilterOptions | None = None, refined: OperatorMatrix | None = None):
    """Dense eigenvalues, then the rightmost max_track of them filtered by tail
    mass and stability under grid doubling; kept ones are tagged by the
    Fredholm index of the end states."""
    opts = opts or FilterOptions()
    ev = dense_eigenvalues(op)
    ev = ev[np.isfinite(ev)]
    order = np.argsort(-ev.real)
    cand = ev[order[: opts.max_track]]
    fine = refined if refined is not None else op.refined(2)
    wide = op.extended(opts.domain_factor) if opts.check_domain else None
    sd = op.grid.shock
    tracked, vecs = [], []
    for lam in cand:
        _, vec = nearest_eigenpair(op, lam)
        tm = tail_mass(vec, opts.tail_band)
        moved = abs(nearest_eigenpair(fine, lam)[0] - lam)
        dmoved = abs(nearest_eigenpair(wide, lam)[0] - lam) if wide is not None else math.nan
        idx = fredholm_index(sd, lam)
        stable_grid = moved <= opts.filter_tol and not dmoved > opts.filter_tol
        if tm > opts.tail_mass_tol or not stable_grid:
            tag = "spurious"
        elif op.which == "L" and abs(lam) <= opts.near_zero:
            tag = "translation"
        elif idx != 0:
            tag = "essential-cluster"
        else:
            tag = "point"
        tracked.append(Eigen(complex(lam), tm, float(moved), float(dmoved), idx, tag))
        vecs.append(vec / np.linalg.norm(vec))
    meta = dict(op.metadata(), refined_n=fine.n_nodes, max_track=opts.max_track)
    return PointSpectrum(op.which, ev, tuple(tracked), np.array(vecs).T, meta)


# -- verdict -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    borders: tuple[BorderCurves, ...]
    eigenvalues_L: list[Eigen]
    eigenvalues_A: list[Eigen]
    translation_residual: float
    max_re_border: float
    max_re_point: float
    verdict: str
    in_hypothesis: bool  # s < s_bar at the left state
    reasons: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def eig(e):
            return {"re": e.value.real, "im": e.value.imag, "tag": e.tag, "tail_mass": e.tail_mass}

        return {
            "verdict": self.verdict,
            "in_hypothesis": self.in_hypothesis,
            "max_re_border": self.max_re_border,
            "max_re_point": self.max_re_point,
            "translation_residual": self.translation_residual,
            "eigenvalues_L": [eig(e) for e in self.eigenvalues_L],
            "eigenvalues_A": [eig(e) for e in self.eigenvalues_A],
            "reasons": list(self.reasons),
            "meta": self.meta,
        }


def spectral_verdict(
    sd: ShockData,
    borders,
    spec_L: PointSpectrum | None = None,
    spec_A: PointSpectrum | None = None,
    trans_res: float = math.nan,
    border_tol: float = BORDER_TOL,
    gap_tol: float = GAP_TOL,
    translation_tol: float = TRANSLATION_TOL,
) -> SpectrumReport:
    """stable needs stable borders, a clean translation mode and a point-spectrum gap;
    any unresolved eigenvalue near the imaginary axis makes the verdict inconclusive."""
    c = float(sound_speed(sd.r_minus, sd.gamma))
    in_hyp = bool(sd.s < speed_bound(sd.r_minus, sd.gamma)) and c > 0
    borders = tuple(borders)
    max_border = max(b.max_re for b in borders)
    reasons = []
    pts = []
    for spec in (spec_L, spec_A):
        if spec is not None:
            pts += [e for e in spec.tracked if e.tag == "point"]
    max_pt = max((e.value.real for e in pts), default=-math.inf)

    if max_border > border_tol:
        verdict = "unstable"
        reasons.append(f"essential border reaches Re = {max_border:.3e}")
    elif max_pt > gap_tol:
        verdict = "unstable"
        reasons.append(f"point eigenvalue at Re = {max_pt:.3e}")
    else:
        verdict = "spectrally_stable"
        if spec_L is None or spec_A is None:
            verdict = "inconclusive"
            reasons.append("point spectrum not computed")
        else:
            if not trans_res <= translation_tol:
                verdict = "inconclusive"
                reasons.append(f"translation residual {trans_res:.3e} above {translation_tol:.0e}")
            n_trans = len([e for e in spec_L.tracked if e.tag == "translation"])
            if n_trans != 1:
                verdict = "inconclusive"
                reasons.append(f"{n_trans} translation eigenvalues of L")
            loose = [e for s_ in (spec_L, spec_A) for e in s_.tracked if e.tag == "spurious" and e.value.real >= -gap_tol]
            if loose:
                verdict = "inconclusive"
                reasons.append(f"{len(loose)} unresolved eigenvalues with Re >= -{gap_tol:.0e}")
            if max_pt >= -gap_tol:
                verdict = "inconclusive"
                reasons.append(f"point eigenvalue within the gap: Re = {max_pt:.3e}")
    return SpectrumReport(
        borders,
        spec_L.filtered if spec_L is not None else [],
        spec_A.filtered if spec_A is not None else [],
        float(trans_res),
        float(max_border),
        float(max_pt),
        verdict,
        in_hyp,
        tuple(reasons),
        {"s": sd.s, "eps": sd.eps, "border_tol": border_tol, "gap_tol": gap_tol},
    )


@dataclass(frozen=True, eq=False)
class SpectrumRun:
    report: SpectrumReport
    op_L: OperatorMatrix | None
    op_A: OperatorMatrix | None
    spec_L: PointSpectrum | None
    spec_A: PointSpectrum | None


def analyze_spectrum(
    sd: ShockData,
    n: int = DEFAULT_N,
    scheme: str = "fd4",
    opts: FilterOptions | None = None,
    xi=None,
    grid: ProfileGrid | None = None,
    border_tol: float = BORDER_TOL,
    gap_tol: float = GAP_TOL,
) -> SpectrumRun:
    """Borders, both point spectra and the verdict for one shock."""
    tols = {"border_tol": border_tol, "gap_tol": gap_tol}
    borders = shock_borders(sd, xi)
    if max(b.max_re for b in borders) > border_tol:
        return SpectrumRun(spectral_verdict(sd, borders, **tols), None, None, None, None)
    grid = grid if grid is not None else spectral_profile(sd, n)
    op_L = assemble_L(grid, scheme=scheme)
    op_A = assemble_A(grid, scheme=scheme)
    spec_L = point_spectrum(op_L, opts)
    spec_A = point_spectrum(op_A, opts)
    report = spectral_verdict(sd, borders, spec_L, spec_A, translation_residual(op_L), **tols)
    return SpectrumRun(report, op_L, op_A, spec_L, spec_A)


def backmap_residual(op_L: OperatorMatrix, lam: complex, rho, v, band: float = 0.1) -> float:
    """Map an A-eigenpair (rho, v), given on all nodes of op_L's grid, back through
    Gamma^-1 and d/dx, and return ||(L - lam) w|| / ||w|| over the core nodes
    (the `band` fraction at each end, where the truncation layer sits, is excluded)."""
    g = op_L.grid
    d1, _, _, _ = _derivatives(g, op_L.scheme)
    _, u = gamma_inverse(rho, v, g)
    w = op_L.join((d1 @ rho)[1:-1], (d1 @ u)[1:-1])
    r = op_L.matrix @ w - lam * w
    m = w.size // 2
    k = int(band * m)
    core = slice(2 * k, 2 * (m - k))
    return float(np.linalg.norm(r[core]) / np.linalg.norm(w[core]))
