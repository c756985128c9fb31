"""PNG figures for the CLI report path.  Everything here reads the same arrays
that go into the CSV files; nothing is computed in this module."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PARAMS = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.2,
    "figure.dpi": 100,
    "savefig.dpi": 150,
}


def _save(fig, path):
    fig.tight_layout()
    # no timestamp in the PNG text chunks, so reruns are byte-stable
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def plot_profiles(grids, path, labels=None):
    """Density profiles R(x) of a shock family."""
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots(figsize=(6.0, 3.6))
        for i, g in enumerate(grids):
            lab = labels[i] if labels else f"eps = {g.shock.eps:g}"
            ax.plot(g.x, g.R, label=lab)
        ax.set_xlabel("x")
        ax.set_ylabel("R(x)")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_kappa(table, path):
    """kappa(gamma) against the linear-viscosity bound (gamma + 1)/2."""
    table = np.asarray(table)
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        ax.plot(table[:, 0], table[:, 1], label="kappa(gamma)")
        ax.plot(table[:, 0], table[:, 2], "--", label="(gamma + 1)/2")
        ax.set_xlabel("gamma")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_spectrum(report, spec_L, spec_A, path, xi_window: float = 2.0):
    """Fredholm borders (|xi| <= xi_window) and the tracked eigenvalues of L and A, by tag."""
    markers = {"translation": "*", "point": "o", "essential-cluster": ".", "spurious": "x"}
    with plt.rc_context(PARAMS):
        fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.8))
        ax = axes[0]
        for color, b in zip(("C0", "C3"), report.borders):
            near = np.abs(b.xi) <= xi_window
            for j, branch in enumerate(b.lam):
                ax.plot(branch.real[near], branch.imag[near], lw=0.8, color=color,
                        label=f"end state {b.label}" if j == 0 else None)
        ax.set_xlabel("Re lambda")
        ax.set_ylabel("Im lambda")
        ax.set_title(f"essential spectrum borders, |xi| <= {xi_window:g}")
        ax.legend(frameon=False)
        ax = axes[1]
        for spec, color in ((spec_L, "C0"), (spec_A, "C3")):
            if spec is None:
                continue
            for tag, mk in markers.items():
                vals = np.array([e.value for e in spec.tracked if e.tag == tag])
                if vals.size:
                    ax.plot(vals.real, vals.imag, mk, color=color, ls="none", label=f"{spec.which}: {tag}")
        ax.axvline(0.0, color="k", lw=0.5)
        ax.set_xlabel("Re lambda")
        ax.set_title("tracked eigenvalues")
        ax.legend(frameon=False, fontsize=7)
        _save(fig, path)


def plot_sweep(cells, path):
    """Certificate outcome over the (s, eps) grid."""
    colors = {"pass": "C2", "fail": "C3", "not-applicable": "0.6", "error": "k"}
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for status, col in colors.items():
            sel = [c for c in cells if c.certificate == status]
            if sel:
                ax.plot([c.s for c in sel], [c.eps for c in sel], "s", color=col, ls="none", label=status)
        ax.set_yscale("log")
        ax.set_xlabel("s")
        ax.set_ylabel("eps")
        ax.legend(frameon=False)
        _save(fig, path)
