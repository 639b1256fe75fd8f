"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line."""

import itertools
import time

import numpy as np
import pytest

from attenuation import cli
from attenuation.average import AgentBelief, compare_confidence, compare_prior_precision
from attenuation.densities import check_log_exp_concave, check_logconcave, check_symmetry, make_density
from attenuation.harness import SuiteConfig, find_counterexample, run_full_suite
from attenuation.output import read_csv, slug
from attenuation.posterior import LocationExperiment, normal_normal_oracle, posterior_means

D = make_density
CONFIG = SuiteConfig()


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_1_normal_normal_oracle(verdict):
    sds = (0.5, 1.0, 2.0)
    s = np.linspace(-6, 6, 25)

    def run():
        worst = 0.0
        for sx, se in itertools.product(sds, sds):
            exp = LocationExperiment(D(f"normal(0,{sx})"), D(f"normal(0,{se})"))
            worst = max(worst, float(np.max(np.abs(posterior_means(exp, s) - normal_normal_oracle(0, sx, se, s)))))
        return worst

    worst, secs = timed(run)
    verdict(1, worst <= 1e-8 and secs < 10, f"max |quadrature - closed form| = {worst:.2e} over 3x3x25, {secs:.1f}s")


def test_2_betweenness(verdict):
    (report,), secs = timed(lambda: run_full_suite(CONFIG, ("betweenness",)))
    n_exp = len(set(report.column("experiment")))
    ok = report.passed and n_exp == 25 and len(report.rows) == 25 * 25 and secs < 120
    verdict(2, ok, f"{len(report.violations)} violations over {n_exp} experiments x 25 signals, {secs:.1f}s")


def test_3_attenuation_sufficiency(verdict):
    reports, secs = timed(lambda: run_full_suite(CONFIG, ("attenuation",)))
    combos = {(r.inputs["prior"], r.inputs["eps"], r.inputs["eps_tilde"]) for r in reports}
    priors = {p for p, _, _ in combos}
    laplace_ladder = any(e.startswith("doubleexponential") and t.startswith("doubleexponential") for _, e, t in combos)
    failed = [r.summary() for r in reports if not r.passed]
    ok = not failed and len(combos) >= 10 and "logistic(0,1)" in priors and laplace_ladder
    verdict(3, ok, f"{len(combos)} (prior, pair) combinations, {len(failed)} failing, {secs:.1f}s")


def test_4_attenuation_necessity(verdict):
    ok, parts = True, []
    for eps, eps_tilde in CONFIG.counterexample_pairs:
        cx, secs = timed(lambda: find_counterexample(D(eps), D(eps_tilde)))
        prior = cx.final_prior
        shape_ok = check_symmetry(prior).passed and check_logconcave(prior).passed and prior.center == 0.0
        step = abs(cx.echo[-1][1] - cx.echo[-2][1])
        ok &= cx.margin > 1e-5 and cx.s_star > 0 and shape_ok and cx.echo_converged and step < 1e-6 and secs < 60
        parts.append(f"{eps} vs {eps_tilde}: s*={cx.s_star:.4g} margin={cx.margin:.3g} "
                     f"echo step {step:.1e} at d={cx.echo[-1][0]:g} ({secs:.1f}s)")
    verdict(4, ok and len(parts) == 2, "; ".join(parts))


def test_5_scale_families(verdict):
    families = ["normal(0,1)", "logistic(0,1)", "doubleexponential(0,1)", "studentt(0,1,1)", "studentt(0,1,3)",
                "studentt(0,1,10)", "doublepareto(0,1,1)", "doublepareto(0,1,2)"]
    failing = [f for f in families if not check_log_exp_concave(D(f)).passed]
    reports = run_full_suite(CONFIG, ("scale",))
    violations = sum(len(r.violations) for r in reports)
    verdict(5, not failing and violations == 0,
            f"log f(e^u) concave for {len(families) - len(failing)}/{len(families)} families; "
            f"{violations} ladder violations over {len(reports)} ladders")


def test_6_prior_duality(verdict):
    reports = run_full_suite(CONFIG, ("duality",))
    worst_swap = max(abs(v) for r in reports for c in ("swap_residual", "swap_residual_tilde") for v in r.column(c))
    ok = all(r.passed for r in reports) and worst_swap <= 1e-8
    verdict(6, ok, f"{len(reports)} prior pairs ordered; max swap residual {worst_swap:.1e}")


def test_7_average_posterior_means(verdict):
    reports = run_full_suite(CONFIG, ("average", "montecarlo"))
    kinds = {k: [r for r in reports if r.name.startswith(k)]
             for k in ("compare-confidence", "compare-prior", "average-sandwich", "montecarlo")}
    mc = kinds["montecarlo"][0]
    worst_z = max(abs(z) for z in mc.column("z"))
    prior, noise = D("normal(0,1)"), D("normal(0,1)")
    conf = compare_confidence(AgentBelief("A", D("normal(0,0.5)"), prior), AgentBelief("B", noise, prior), noise, [2.0])
    prio = compare_prior_precision(AgentBelief("A", noise, D("normal(0,2)")), AgentBelief("B", noise, prior),
                                   noise, [2.0])
    spots = [conf.rows[0][1] - 1.6, conf.rows[0][2] - 1.0, prio.rows[0][1] - 1.6, prio.rows[0][2] - 1.0]
    ok = (all(r.passed for r in reports)
          and all(len(kinds[k]) >= 3 for k in ("compare-confidence", "compare-prior", "average-sandwich"))
          and mc.inputs["draws"] == "1000000" and worst_z <= 4 and max(map(abs, spots)) <= 1e-6)
    verdict(7, ok, f"{sum(r.passed for r in reports)}/{len(reports)} reports pass; Monte Carlo max |z| = {worst_z:.2f}; "
                   f"spot values within {max(map(abs, spots)):.1e}")


def test_8_posterior_ratio(verdict):
    reports = run_full_suite(CONFIG, ("ratio",))
    priors = [D(p) for p, _ in CONFIG.ratio_cases]
    strict_lc = all(p.center == -0.5 and check_logconcave(p).passed for p in priors)
    slopes = [r.artifacts["min_slope"] for r in reports]
    ok = len(reports) >= 3 and strict_lc and all(s > 0 for s in slopes) and all(r.passed for r in reports)
    verdict(8, ok, "min slopes " + ", ".join(f"{s:.3g}" for s in slopes))


def test_9_determinism_and_round_trip(verdict, tmp_path, capsys):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        code = cli.main(["verify", "--suite", "all", "--out", str(d)])
        capsys.readouterr()
        outs.append((code, {p.name: p.read_bytes() for p in sorted(d.glob("*.csv"))}))
    identical = outs[0][0] == 0 and outs[0][1] == outs[1][1]
    # re-parse the written tables and compare with freshly computed reports
    checked, exact = 0, True
    for r in run_full_suite(CONFIG, ("duality", "ratio")):
        (path,) = (tmp_path / "run0").glob(f"[0-9][0-9][0-9]_{slug(r.name)}.csv")
        header, rows = read_csv(path)
        exact &= header == list(r.columns) and rows == [list(row) for row in r.rows]
        checked += 1
    verdict(9, identical and exact and checked > 0,
            f"{len(outs[0][1])} CSV files byte-identical across runs; {checked} tables re-parse exactly={exact}")
