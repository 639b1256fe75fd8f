"""Command-line front end.

Exit codes: 0 when every report passes, 1 when some report fails, 2 on
config or input errors, 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness
from .average import (
    AgentBelief,
    average_posterior_mean_detailed,
    compare_confidence,
    compare_prior_precision,
    monte_carlo_average,
)
from .config import ExperimentConfig, parse_config, parse_grid
from .densities import make_density
from .errors import (
    DegenerateSignal,
    InadmissibleDensity,
    InvalidParameter,
    ParseError,
    PreconditionFailed,
    QuadratureFailure,
    SearchExhausted,
)
from .output import emit_csv, emit_metadata, emit_plot, emit_summary, slug
from .posterior import SWEEP_COLUMNS, LocationExperiment, posterior_mean_sweep, posterior_moments
from .precision import check_less_precise, negative_slope_intervals
from .quadrature import QuadratureConfig
from .report import ExperimentReport, provenance

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("attenuation")


def _quad(args, cfg: ExperimentConfig | None = None) -> QuadratureConfig:
    quad = cfg.quad if cfg else QuadratureConfig()
    if args.tol is not None:
        quad = replace(quad, rel_tol=args.tol)
    return quad


def _load(args) -> ExperimentConfig | None:
    return parse_config(args.config) if args.config else None


def _out_dir(args, cfg: ExperimentConfig | None, default: str) -> Path:
    if args.out:
        out = Path(args.out)
    elif cfg is not None:
        out = cfg.outputs.directory
    else:
        out = Path(default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _formats(args, cfg: ExperimentConfig | None) -> tuple[str, ...]:
    fmt = args.format or (cfg.outputs.format if cfg else "csv")
    return ("csv", "svg") if fmt == "both" else (fmt,)


def _write(report: ExperimentReport, out: Path, stem: str, formats) -> list[Path]:
    written = []
    if "csv" in formats:
        written.append(emit_csv(report, out / f"{stem}.csv"))
    if "svg" in formats:
        written.append(emit_plot(report, out / f"{stem}.svg"))
    return written


def _experiment(args) -> LocationExperiment:
    believed = make_density(args.believed) if getattr(args, "believed", None) else None
    return LocationExperiment(make_density(args.prior), make_density(args.noise), believed)


# ------------------------------------------------------------- subcommands

def cmd_check_precision(args) -> int:
    tilde, eps = make_density(args.tilde), make_density(args.eps)
    v = check_less_precise(tilde, eps, tol=args.slope_tol)
    print(f"{tilde.name} vs {eps.name}: {v.relation.value} (strict={v.strict})")
    if v.witness_decrease:
        print(f"  steepest decrease of log ratio at x={v.witness_decrease[0]:.6g} slope={v.witness_decrease[1]:.6g}")
    if v.witness_increase:
        print(f"  steepest increase of log ratio at x={v.witness_increase[0]:.6g} slope={v.witness_increase[1]:.6g}")
    for a, b in negative_slope_intervals(v):
        print(f"  ratio decreasing on ({a:.6g}, {b:.6g})")
    if args.profile:
        x, lr, sl = v.profile
        rep = ExperimentReport("precision-profile", {"eps_tilde": tilde.name, "eps": eps.name},
                               ("x", "log_ratio", "slope"), rows=list(zip(x.tolist(), lr.tolist(), sl.tolist())))
        emit_csv(rep, args.profile)
    return EXIT_OK


def cmd_posterior(args) -> int:
    exp = _experiment(args)
    m = posterior_moments(exp, args.signal, _quad(args))
    flag = " (outside-assumptions)" if exp.outside_assumptions else ""
    print(f"E[X | S={args.signal:.17g}] = {m.mean:.17g}  Z = {m.z:.17g}  error ~ {m.error:.3g}{flag}")
    return EXIT_OK


def _sweep_report(exp: LocationExperiment, grid, quad, name: str) -> ExperimentReport:
    rows = posterior_mean_sweep(exp, grid, quad)
    return ExperimentReport(
        name=name,
        inputs={"experiment": exp.describe()},
        columns=SWEEP_COLUMNS,
        rows=[(r.s, r.posterior_mean, r.z, r.status) for r in rows],
        provenance=provenance({"rel_tol": quad.rel_tol}),
        artifacts={"plot": {"x": "s", "y": ["posterior_mean"], "hlines": [exp.prior_mean],
                            "xlabel": "signal s", "ylabel": "E[X | S = s]"}},
    )


def cmd_sweep(args) -> int:
    cfg = _load(args)
    quad = _quad(args, cfg)
    out = _out_dir(args, cfg, "results")
    fmts = _formats(args, cfg)
    if cfg is not None and not args.prior:
        grid = cfg.grids.get("signals")
        for name in cfg.experiments:
            exp = cfg.experiment(name)
            g = grid if grid is not None else harness.signal_grid(exp)
            for p in _write(_sweep_report(exp, g, quad, f"sweep[{name}]"), out, f"sweep_{slug(name)}", fmts):
                print(p)
        return EXIT_OK
    if not (args.prior and args.noise):
        raise ParseError(["sweep needs --prior and --noise, or --config"])
    exp = _experiment(args)
    grid = parse_grid(args.grid) if args.grid else harness.signal_grid(exp)
    for p in _write(_sweep_report(exp, grid, quad, "sweep"), out, "sweep", fmts):
        print(p)
    return EXIT_OK


def cmd_average(args) -> int:
    exp = _experiment(args)
    quad = _quad(args)
    res = average_posterior_mean_detailed(exp, args.state, quad)
    print(f"E[E[X|S] | X={args.state:.17g}] = {res.value:.17g}  error ~ {res.error:.3g}")
    if args.draws:
        seed = args.seed if args.seed is not None else 0
        est, se, ierr = monte_carlo_average(exp, args.state, args.draws, seed, quad)
        z = (est - res.value) / se
        print(f"Monte Carlo ({args.draws} draws, seed {seed}): {est:.17g} +/- {se:.3g} "
              f"(z = {z:.3f}, interpolation error {ierr:.2g})")
        return EXIT_OK if abs(z) <= 4.0 else EXIT_FAIL
    return EXIT_OK


def _states(args, cfg) -> np.ndarray:
    if args.states:
        return parse_grid(args.states)
    if cfg is not None and "states" in cfg.grids:
        return cfg.grids["states"]
    return np.array(harness.SuiteConfig().state_grid)


def _finish(report: ExperimentReport, args, cfg, stem: str) -> int:
    print(report.summary())
    out = _out_dir(args, cfg, "results")
    report.artifacts.setdefault("plot", {"x": "x", "y": ["value_A", "value_B"], "xlabel": "state x",
                                         "ylabel": "average posterior mean"})
    for p in _write(report, out, stem, _formats(args, cfg)):
        print(p)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_compare_confidence(args) -> int:
    cfg = _load(args)
    prior = make_density(args.prior)
    a = AgentBelief("A", make_density(args.believed_a), prior)
    b = AgentBelief("B", make_density(args.believed_b), prior)
    rep = compare_confidence(a, b, make_density(args.noise), _states(args, cfg), _quad(args, cfg))
    return _finish(rep, args, cfg, "compare_confidence")


def cmd_compare_prior(args) -> int:
    cfg = _load(args)
    noise = make_density(args.noise)
    a = AgentBelief("A", noise, make_density(args.prior_a))
    b = AgentBelief("B", noise, make_density(args.prior_b))
    rep = compare_prior_precision(a, b, noise, _states(args, cfg), _quad(args, cfg))
    return _finish(rep, args, cfg, "compare_prior")


def cmd_counterexample(args) -> int:
    eps, tilde = make_density(args.eps), make_density(args.tilde)
    cx = harness.find_counterexample(eps, tilde, _quad(args))
    rep = harness.counterexample_report(cx)
    print(rep.summary())
    print(f"  s* = {cx.s_star:.17g}, delta = {cx.delta:.17g}, prior = {cx.final_prior.name}")
    print(f"  E[X | X+eps=s*] = {cx.means[0]:.17g}, E[X | X+eps_tilde=s*] = {cx.means[1]:.17g}, "
          f"margin = {cx.margin:.6g}")
    print(f"  convergence echo {'settled' if cx.echo_converged else 'did NOT settle'} after d = {cx.echo[-1][0]:g}")
    if args.out:
        out = _out_dir(args, None, "results")
        for p in _write(rep, out, "counterexample", _formats(args, None)):
            print(p)
        print(emit_metadata(rep, out / "counterexample.json"))
    return EXIT_OK if rep.passed else EXIT_FAIL


def suite_config(cfg: ExperimentConfig | None, args) -> harness.SuiteConfig:
    sc = harness.SuiteConfig()
    if cfg is not None:
        priors, noises = [], []
        for prior, noise, _ in cfg.experiments.values():
            for lst, name in ((priors, prior), (noises, noise)):
                spec = cfg.densities[name].canonical()
                if spec not in lst:
                    lst.append(spec)
        sc = replace(sc, priors=tuple(priors), noises=tuple(noises), quad=cfg.quad, tol=cfg.check_tol,
                     seed=cfg.seed, montecarlo_draws=cfg.draws, jobs=cfg.jobs)
        if "signals" in cfg.grids:
            sc = replace(sc, n_signals=len(cfg.grids["signals"]))
        if "states" in cfg.grids:
            sc = replace(sc, state_grid=tuple(float(v) for v in cfg.grids["states"]))
    if args.tol is not None:
        sc = sc.with_rel_tol(args.tol)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    if args.jobs is not None:
        sc = replace(sc, jobs=args.jobs)
    return sc


def cmd_verify(args) -> int:
    cfg = _load(args)
    sc = suite_config(cfg, args)
    suites = harness.SUITES if args.suite == "all" else tuple(s.strip() for s in args.suite.split(","))
    unknown = [s for s in suites if s not in harness.SUITES]
    if unknown:
        raise ParseError([f"unknown suite(s) {unknown}; choose from {', '.join(harness.SUITES)} or 'all'"])
    reports = harness.run_full_suite(sc, suites)
    out = _out_dir(args, cfg, "results")
    fmts = _formats(args, cfg)
    for i, rep in enumerate(reports):
        stem = f"{i:03d}_{slug(rep.name)}"
        _write(rep, out, stem, fmts)
        emit_metadata(rep, out / f"{stem}.json")
        print(rep.summary())
    emit_summary(reports, out / "summary.csv")
    failed = sum(not r.passed for r in reports)
    print(f"{len(reports) - failed}/{len(reports)} reports passed; outputs in {out}")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_plot(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg, "results")
    if cfg is not None:
        names = list(cfg.densities)
        dens = [cfg.density(n) for n in names]
        grid = cfg.grids.get("density")
    else:
        if not args.densities:
            raise ParseError(["plot needs --config or --densities"])
        dens = [make_density(s) for s in args.densities]
        names = [d.name for d in dens]
        grid = None
    if grid is None:
        reach = max(max(abs(v) for v in d.support(1e-4)) for d in dens)
        grid = np.linspace(-reach, reach, 201)
    rows = [(float(x), *(float(d.pdf(np.array([x]))[0]) for d in dens)) for x in grid]
    rep = ExperimentReport("densities", {n: d.name for n, d in zip(names, dens)}, ("x", *names), rows=rows,
                           artifacts={"plot": {"title": "noise densities", "xlabel": "x", "ylabel": "density"}})
    written = [emit_plot(rep, out / "densities.svg")]
    if cfg is not None and cfg.experiments:
        quad = _quad(args, cfg)
        exps = [(name, cfg.experiment(name)) for name in cfg.experiments]
        sgrid = cfg.grids.get("signals")
        if sgrid is None:
            sgrid = harness.signal_grid(exps[0][1]).points()
        cols, rows_by_exp = [], []
        for name, exp in exps:
            cols.append(name)
            rows_by_exp.append([r.posterior_mean for r in posterior_mean_sweep(exp, sgrid, quad)])
        mu = exps[0][1].prior_mean
        rep2 = ExperimentReport("posterior means", {}, ("s", *cols),
                                rows=[(float(s), *vals) for s, *vals in zip(sgrid, *rows_by_exp)],
                                artifacts={"plot": {"title": "posterior means", "xlabel": "signal s",
                                                    "ylabel": "E[X | S = s]", "hlines": [mu]}})
        written.append(emit_plot(rep2, out / "posterior_means.svg"))
    for p in written:
        print(p)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file, or a shipped name such as 'figure1'")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", type=float, default=None, help="quadrature relative tolerance")
    common.add_argument("--seed", type=int, default=None, help="Monte-Carlo seed")
    common.add_argument("--format", choices=("csv", "svg", "both"), default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="attenuation", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-precision", parents=[common], help="classify eps_tilde against eps")
    s.add_argument("--tilde", "--a", dest="tilde", required=True, help="candidate less precise noise, e.g. normal(0,1.5)")
    s.add_argument("--eps", "--b", dest="eps", required=True, help="reference noise")
    s.add_argument("--slope-tol", type=float, default=1e-8)
    s.add_argument("--profile", help="write x, log_ratio, slope CSV here")
    s.set_defaults(func=cmd_check_precision)

    s = sub.add_parser("posterior", parents=[common], help="posterior mean at one signal")
    s.add_argument("--prior", required=True)
    s.add_argument("--noise", required=True)
    s.add_argument("--believed")
    s.add_argument("--signal", type=float, required=True)
    s.set_defaults(func=cmd_posterior)

    s = sub.add_parser("sweep", parents=[common], help="posterior means over a signal grid")
    s.add_argument("--prior")
    s.add_argument("--noise")
    s.add_argument("--believed")
    s.add_argument("--grid", help="linear(lo,hi,n), log(lo,hi,n) or a value list")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("average", parents=[common], help="average posterior mean at a true state")
    s.add_argument("--prior", required=True)
    s.add_argument("--noise", required=True, help="objective noise")
    s.add_argument("--believed")
    s.add_argument("--state", type=float, required=True)
    s.add_argument("--draws", type=int, default=0, help="also run a Monte-Carlo cross-check")
    s.set_defaults(func=cmd_average)

    s = sub.add_parser("compare-confidence", parents=[common], help="agents with different believed noise")
    s.add_argument("--prior", required=True)
    s.add_argument("--noise", required=True, help="objective noise")
    s.add_argument("--believed-a", required=True, help="the more confident agent's believed noise")
    s.add_argument("--believed-b", required=True)
    s.add_argument("--states")
    s.set_defaults(func=cmd_compare_confidence)

    s = sub.add_parser("compare-prior", parents=[common], help="agents with different priors")
    s.add_argument("--prior-a", required=True, help="the less precise prior")
    s.add_argument("--prior-b", required=True)
    s.add_argument("--noise", required=True)
    s.add_argument("--states")
    s.set_defaults(func=cmd_compare_prior)

    s = sub.add_parser("counterexample", parents=[common], help="prior and signal reversing attenuation")
    s.add_argument("--eps", required=True)
    s.add_argument("--tilde", required=True)
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("verify", parents=[common], help="run verification suites")
    s.add_argument("--suite", default="all", help=f"'all' or comma-separated from: {', '.join(harness.SUITES)}")
    s.add_argument("--jobs", type=int, default=None)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("plot", parents=[common], help="SVG plots of densities and posterior means")
    s.add_argument("--densities", nargs="*")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, InvalidParameter, InadmissibleDensity) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PreconditionFailed, SearchExhausted) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (QuadratureFailure, DegenerateSignal) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
