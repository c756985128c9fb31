"""Command-line front end.

    qhdshock {profile,spectrum,certify,kappa,sweep} [--config PATH] [--out DIR]
             [--jobs N] [--resolution N] [--scheme {fd4,spectral}] [--figures]

Exit codes: 0 pass, 1 failure, 2 usage or configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from qhdshock import config as cfgmod
from qhdshock.certify import SWEEP_COLUMNS, SweepSpec, empirical_eps_bar, epsilon_sweep
from qhdshock.config import ConfigError, RunConfig
from qhdshock.hydro import DegenerateShockError, DomainError, build_shock, kappa_comparison_table
from qhdshock.io import write_csv, write_json
from qhdshock.profile import (
    NoConnectionError,
    ProfileOptions,
    StructureError,
    bound_ratios,
    monotonicity_report,
    solve_profile,
    tanh_alignment_error,
)

log = logging.getLogger("qhdshock")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _numerical_errors():
    from qhdshock.spectrum import AssemblyError, EigenSolveError

    return (NoConnectionError, StructureError, DomainError, DegenerateShockError, AssemblyError, EigenSolveError,
            FloatingPointError, np.linalg.LinAlgError)


def _header(cfg: RunConfig, **extra) -> dict:
    # out_dir is left out so that reruns into another directory stay byte-identical
    hdr = {k: v for k, v in cfg.flat().items() if k != "out_dir"}
    hdr.update(extra)
    return hdr


def _config_record(cfg: RunConfig) -> dict:
    d = cfg.to_dict()
    d.pop("out_dir")
    return d


def _tag(eps: float, s: float) -> str:
    return f"eps{eps:g}_s{s:g}"


def _profile_opts(cfg: RunConfig) -> ProfileOptions:
    d = cfg.discretization
    return ProfileOptions(abs_tol=d.abs_tol, rel_tol=d.rel_tol, tail_tol=d.tail_tol, n_points=d.profile_points,
                          pad=d.pad)


def _cells(cfg: RunConfig):
    if not cfg.eps:
        raise UsageError("eps list is empty")
    return [(e, s) for e in cfg.eps for s in cfg.s]


# -- commands ----------------------------------------------------------------------


def cmd_profile(cfg: RunConfig, out: Path) -> int:
    opts = _profile_opts(cfg)
    summary, grids, failures = [], [], 0
    for eps, s in _cells(cfg):
        rec = {"eps": eps, "s": s}
        try:
            sd = build_shock(cfg.r_minus, cfg.r_minus - eps, s, cfg.gas)
            g = solve_profile(sd, opts)
        except _numerical_errors() as exc:
            failures += 1
            rec.update(status="error", message=f"{type(exc).__name__}: {exc}")
            summary.append(rec)
            continue
        mono = monotonicity_report(g)
        rec.update(
            status="ok",
            monotone=mono.is_monotone,
            sign_changes=mono.n_sign_changes,
            tail_residuals=list(g.tail_residuals),
            ode_residual=g.ode_residual(),
            tanh_error_over_eps=tanh_alignment_error(g)[0] / eps,
        )
        if mono.is_monotone:
            rec["bound_ratios"] = bound_ratios(g).__dict__
        g.to_csv(out / f"profile_{_tag(eps, s)}.csv", _header(cfg, eps=eps, s=s, command="profile"))
        grids.append(g)
        summary.append(rec)
    write_json(out / "profile_summary.json", {"config": _config_record(cfg), "profiles": summary})
    if cfg.figures and grids:
        from qhdshock.plotting import plot_profiles

        plot_profiles(grids, out / "profiles.png", [f"eps = {g.shock.eps:g}, s = {g.shock.s:g}" for g in grids])
    return EXIT_NUMERIC if failures == len(summary) else EXIT_OK


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    from qhdshock.spectrum import FilterOptions, analyze_spectrum, default_xi_grid

    f = cfg.filter
    fopts = FilterOptions(filter_tol=f.filter_tol, tail_mass_tol=f.tail_mass_tol, max_track=f.max_track,
                          near_zero=f.near_zero)
    xi = default_xi_grid(f.xi_max, f.xi_samples)
    all_stable = True
    reports = {}
    for eps, s in _cells(cfg):
        tag = _tag(eps, s)
        sd = build_shock(cfg.r_minus, cfg.r_minus - eps, s, cfg.gas)
        run = analyze_spectrum(sd, n=cfg.discretization.n, scheme=cfg.discretization.scheme, opts=fopts, xi=xi,
                               border_tol=f.border_tol, gap_tol=f.gap_tol)
        rep = run.report
        hdr = _header(cfg, eps=eps, s=s, command="spectrum")
        rows = [(b_re, b_im, f"border-{lab}-{br}", x) for lab, br, x, b_re, b_im in
                (r for b in rep.borders for r in b.rows())]
        write_csv(out / f"borders_{tag}.csv", ["re", "im", "tag", "xi"], rows, hdr)
        eig_rows = []
        for spec in (run.spec_L, run.spec_A):
            if spec is not None:
                eig_rows += [(re, im, tag_, spec.which, tm, sh) for re, im, tag_, tm, sh in spec.rows()]
        write_csv(out / f"eigenvalues_{tag}.csv", ["re", "im", "tag", "operator", "tail_mass", "refine_shift"],
                  eig_rows, hdr)
        payload = rep.to_dict()
        payload["config"] = _config_record(cfg)
        write_json(out / f"spectrum_{tag}.json", payload)
        reports[tag] = rep.verdict
        all_stable &= rep.verdict == "spectrally_stable"
        if cfg.figures:
            from qhdshock.plotting import plot_spectrum

            plot_spectrum(rep, run.spec_L, run.spec_A, out / f"spectrum_{tag}.png")
    write_json(out / "spectrum_summary.json", {"config": _config_record(cfg), "verdicts": reports})
    return EXIT_OK if all_stable else EXIT_FAIL


def _sweep(cfg: RunConfig, jobs: int):
    spec = SweepSpec(cfg.gas, cfg.r_minus, cfg.point_spectrum_in_sweep, cfg.discretization.n,
                     cfg.discretization.scheme, _profile_opts(cfg))
    _cells(cfg)
    return epsilon_sweep(spec, cfg.eps, cfg.s, jobs=jobs)


def _write_sweep(cfg: RunConfig, cells, out: Path, name: str):
    rows = [[c.row()[k] for k in SWEEP_COLUMNS] for c in cells]
    rows = [[str(v) if isinstance(v, str) else v for v in r] for r in rows]
    write_csv(out / f"{name}.csv", SWEEP_COLUMNS, rows, _header(cfg, command=name))
    if cfg.figures:
        from qhdshock.plotting import plot_sweep

        plot_sweep(cells, out / f"{name}.png")


def cmd_certify(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    cells = _sweep(cfg, jobs)
    for c in cells:
        payload = dict(c.report) if c.report else {"status": c.certificate, "reason": c.message}
        payload["outcome"] = c.outcome
        payload["config"] = _config_record(cfg)
        write_json(out / f"certificate_{_tag(c.eps, c.s)}.json", payload)
    _write_sweep(cfg, cells, out, "certify")
    if all(c.certificate == "error" for c in cells):
        return EXIT_NUMERIC
    ok = all(c.certificate == "pass" for c in cells if c.in_hypothesis)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    cells = _sweep(cfg, jobs)
    _write_sweep(cfg, cells, out, "sweep")
    bar = empirical_eps_bar(cells)
    write_json(out / "eps_bar.json", {"config": _config_record(cfg), "eps_bar": {f"{s:g}": v for s, v in bar.items()}})
    return EXIT_NUMERIC if all(c.certificate == "error" for c in cells) else EXIT_OK


def cmd_kappa(cfg: RunConfig, out: Path) -> int:
    k = cfg.kappa
    gam = np.linspace(k.gamma_min, k.gamma_max, k.points)
    table = kappa_comparison_table(gam)
    write_csv(out / "kappa.csv", ["gamma", "kappa", "linear_bound"], table, _header(cfg, command="kappa"))
    if cfg.figures:
        from qhdshock.plotting import plot_kappa

        plot_kappa(table, out / "kappa.png")
    return EXIT_OK if np.all(table[:, 1] >= table[:, 2] - 1e-15) else EXIT_FAIL


COMMANDS = {
    "profile": lambda cfg, out, jobs: cmd_profile(cfg, out),
    "spectrum": lambda cfg, out, jobs: cmd_spectrum(cfg, out),
    "certify": cmd_certify,
    "kappa": lambda cfg, out, jobs: cmd_kappa(cfg, out),
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qhdshock", description="Dispersive shock profiles of quantum hydrodynamics: "
                                "structure, spectra and energy-estimate certificates.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="YAML run configuration")
    p.add_argument("--out", type=Path, help="output directory (overrides out_dir)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--resolution", type=int, help="grid points n for spectral work")
    p.add_argument("--scheme", choices=["fd4", "spectral"])
    p.add_argument("--figures", action="store_true", help="also write PNG figures")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args) -> RunConfig:
    cfg = cfgmod.load(args.config) if args.config else RunConfig()
    disc = cfg.discretization
    if args.resolution is not None:
        disc = replace(disc, n=args.resolution)
    if args.scheme is not None:
        disc = replace(disc, scheme=args.scheme)
    kw = {"discretization": disc}
    if args.out is not None:
        kw["out_dir"] = str(args.out)
    if args.figures:
        kw["figures"] = True
    return replace(cfg, **kw)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(cfgmod.dumps(replace(cfg, out_dir=".")), encoding="utf-8")
    try:
        code = COMMANDS[args.command](cfg, out, args.jobs)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _numerical_errors() as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{args.command}: exit {code}, outputs in {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
