"""End-to-end verification of the attenuation results over a preset matrix.

Every check returns an :class:`ExperimentReport`; a report passes iff it has
no violations. :func:`find_counterexample` builds a symmetric log-concave
prior that reverses the attenuation ordering for a non-comparable noise pair.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .average import (
    AgentBelief,
    compare_confidence,
    compare_prior_precision,
    average_posterior_mean,
    monte_carlo_average,
    verify_average_sandwich,
)
from .densities import (
    Density,
    check_log_exp_concave,
    check_logconcave,
    check_symmetry,
    make_density,
    make_necessity_prior,
    recenter,
    scale_density,
)
from .errors import PreconditionFailed, SearchExhausted
from .grids import GridSpec, as_points
from .posterior import LocationExperiment, posterior_logpdf, posterior_moments, swap_residual
from .precision import Relation, check_less_precise, negative_slope_intervals
from .quadrature import QuadratureConfig, integrate
from .report import ExperimentReport, provenance

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-7
STRICT_MARGIN = 1e-6
SWAP_TOL = 1e-8
# IQR of N(0,1) is 2 * 0.6745; converts a half-IQR into a normal-equivalent sd
_HALF_IQR_TO_SD = 1.0 / 0.6744897501960817


BETWEENNESS_PLOT = {"x": "s", "y": ["posterior_mean"], "group": "experiment",
                    "xlabel": "signal s", "ylabel": "posterior mean"}


def _sd_equiv(d: Density) -> float:
    return d.spread() * _HALF_IQR_TO_SD


def signal_grid(exp: LocationExperiment, n: int = 25, width: float = 5.0) -> GridSpec:
    """``n`` signals over ``mu +/- width * sigma_eff``, with ``sigma_eff`` from the half-IQRs."""
    sig = math.hypot(_sd_equiv(exp.prior), _sd_equiv(exp.conditioning_noise))
    mu = exp.prior_mean
    return GridSpec(mu - width * sig, mu + width * sig, n)


def _grid_for(exp: LocationExperiment, s_grid) -> np.ndarray:
    return as_points(s_grid if s_grid is not None else signal_grid(exp))


def _loc(**kw) -> str:
    return " ".join(f"{k}={v:.17g}" if isinstance(v, float) else f"{k}={v}" for k, v in kw.items())


# ---------------------------------------------------------------- betweenness

def verify_betweenness(matrix: list[LocationExperiment], s_grid=None, quad: QuadratureConfig | None = None,
                       tol: float = DEFAULT_TOL) -> ExperimentReport:
    """Posterior mean lies weakly between the prior mean and the signal."""
    quad = quad or QuadratureConfig()
    report = ExperimentReport(
        name="betweenness",
        inputs={"experiments": "; ".join(e.describe() for e in matrix)},
        columns=("experiment", "s", "posterior_mean", "slack", "strict", "pass"),
        provenance=provenance({"rel_tol": quad.rel_tol, "tol": tol}),
        artifacts={"plot": BETWEENNESS_PLOT},
    )
    for exp in matrix:
        mu = exp.prior_mean
        for s in _grid_for(exp, s_grid):
            m = posterior_moments(exp, s, quad).mean
            if s == mu:
                slack = -abs(m - mu)
            else:
                sgn = 1.0 if s > mu else -1.0
                slack = min(sgn * (m - mu), sgn * (s - m))
            ok = slack >= -tol
            report.rows.append((exp.describe(), float(s), m, slack, slack > STRICT_MARGIN, ok))
            if not ok:
                report.violations.append((_loc(experiment=exp.describe(), s=float(s)), -slack))
    return report


# ---------------------------------------------------------------- attenuation

def _require_logconcave(d: Density, role: str):
    lc = check_logconcave(d)
    if not lc.passed:
        raise PreconditionFailed(f"{role} {d.name} is not log-concave (near x={lc.witness})")
    return lc


def verify_attenuation(prior: Density, eps: Density, eps_tilde: Density, s_grid=None,
                       quad: QuadratureConfig | None = None, tol: float = DEFAULT_TOL) -> ExperimentReport:
    """The less precise noise gives a posterior mean weakly closer to the prior mean.

    For ``s >= mu``: ``E[X|X+eps=s] >= E[X|X+eps_tilde=s] >= mu``, mirrored
    below ``mu``.
    """
    quad = quad or QuadratureConfig()
    verdict = check_less_precise(eps_tilde, eps)
    if verdict.relation is not Relation.LESS_PRECISE:
        raise PreconditionFailed(
            f"{eps_tilde.name} is {verdict.relation.value} relative to {eps.name}; need LessPrecise"
        )
    lc = _require_logconcave(prior, "prior")
    exp = LocationExperiment(prior, eps)
    exp_t = LocationExperiment(prior, eps_tilde)
    mu = prior.center
    report = ExperimentReport(
        name=f"attenuation[{prior.name} | {eps.name} vs {eps_tilde.name}]",
        inputs={"prior": prior.name, "eps": eps.name, "eps_tilde": eps_tilde.name},
        columns=("s", "mean_eps", "mean_eps_tilde", "slack", "strict", "pass"),
        provenance=provenance({"rel_tol": quad.rel_tol, "tol": tol}),
        notes=[f"precision order strict={verdict.strict}", f"prior strictly log-concave={lc.strict}"],
        artifacts={"plot": {"x": "s", "y": ["mean_eps", "mean_eps_tilde"], "hlines": [mu],
                            "xlabel": "signal s", "ylabel": "posterior mean"}},
    )
    grid = as_points(s_grid if s_grid is not None else signal_grid(exp_t))
    for s in grid:
        m = posterior_moments(exp, s, quad).mean
        mt = posterior_moments(exp_t, s, quad).mean
        if s == mu:
            slack = -max(abs(m - mu), abs(mt - mu))
        else:
            sgn = 1.0 if s > mu else -1.0
            slack = min(sgn * (m - mt), sgn * (mt - mu))
        ok = slack >= -tol
        report.rows.append((float(s), m, mt, slack, slack > STRICT_MARGIN, ok))
        if not ok:
            report.violations.append((_loc(s=float(s)), -slack))
    return report


# ------------------------------------------------------------- counterexample

@dataclass
class Counterexample:
    """A symmetric log-concave prior and signal at which attenuation reverses.

    ``margin = means[1] - means[0] > 0`` with ``s_star > 0 = E[X]``: the less
    precise-looking noise ``eps_tilde`` moves the posterior mean further from
    the prior mean than ``eps`` does.
    """

    noise_pair: tuple[Density, Density]
    s_star: float
    delta: float
    d_schedule: list[float]
    final_prior: Density
    means: tuple[float, float]
    margin: float
    uniform_means: tuple[float, float] = (math.nan, math.nan)
    echo: list[tuple[float, float]] = field(default_factory=list)
    echo_converged: bool = False
    translation: dict = field(default_factory=dict)
    margins: list[float] = field(default_factory=list)
    prior_checks: dict = field(default_factory=dict)

    @property
    def d(self) -> float:
        return self.d_schedule[-1]


def uniform_prior_mean(noise: Density, delta: float, s: float, rel_tol: float = 1e-13) -> float:
    """``E[X | X + eps = s]`` for ``X ~ U[-delta, delta]``."""
    bps = np.linspace(-delta, delta, 17)
    peak = float(np.max(noise.logpdf(s - np.linspace(-delta, delta, 257))))

    def f(x):
        w = np.exp(noise.logpdf(s - x) - peak)
        return np.stack([w, x * w])

    res = integrate(f, bps, rel_tol, 1e-300, 200, reference=[0, 0])
    return float(res.value[1] / res.value[0])


def _uniform_margin(eps: Density, eps_tilde: Density, delta: float, s: float) -> float:
    return uniform_prior_mean(eps_tilde, delta, s) - uniform_prior_mean(eps, delta, s)


def _candidate_windows(interval: tuple[float, float], steepest: float, scale: float, shrink: float):
    # windows wider than a few noise scales push the signal into the joint tail
    a, b = interval
    b = min(b, a + 16.0 * scale)
    caps = [b] + [a + scale * 2.0 ** k for k in range(-4, 5)]
    for cap in sorted({c for c in caps if a < c <= b}):
        yield 0.5 * (a + cap), shrink * 0.5 * (cap - a)
    half = min(steepest - a, b - steepest)
    if half > 0:
        yield steepest, shrink * half


def find_counterexample(eps: Density, eps_tilde: Density, quad: QuadratureConfig | None = None,
                        d_schedule=None, margin_tol: float = 1e-6, shrink: float = 0.95,
                        echo_tol: float = 1e-6, echo_cap: float = 1e16) -> Counterexample:
    """Construct a prior and signal violating the attenuation ordering for ``(eps, eps_tilde)``.

    The log-likelihood-ratio slope of ``eps_tilde`` against ``eps`` must be
    negative on some interval ``(a, b)`` of the positive axis. Candidate
    windows ``[s - delta, s + delta]`` inside that interval are scored by the
    margin they produce under a uniform prior on ``[-delta, delta]``; the best
    one is then approximated by the log-concave flat-topped prior of rate
    ``d`` for ``d`` in the schedule, stopping once the margin is certified.
    The schedule is continued past that point (the convergence echo) until
    the posterior means settle on their uniform-prior limits.
    """
    quad = quad or QuadratureConfig()
    schedule = list(d_schedule or [10.0 ** k for k in range(7)])
    verdict = check_less_precise(eps_tilde, eps)
    intervals = negative_slope_intervals(verdict)
    if not intervals:
        raise SearchExhausted(
            f"no negative log-ratio slope for {eps_tilde.name} vs {eps.name} ({verdict.relation.value})"
        )
    steep_x = verdict.witness_decrease[0] if verdict.witness_decrease else 0.5 * sum(intervals[0])
    interval = next((iv for iv in intervals if iv[0] <= steep_x <= iv[1]), intervals[0])
    scale = min(eps.spread(), eps_tilde.spread())

    best = None
    for s, delta in _candidate_windows(interval, steep_x, scale, shrink):
        if not (s > 0 and delta > 0):
            continue
        um = _uniform_margin(eps, eps_tilde, delta, s)
        if best is None or um > best[0]:
            best = (um, s, delta)
    if best is None or not best[0] > 0:
        raise SearchExhausted(f"no window in {interval} reverses the ordering under a uniform prior")
    _, s_star, delta = best

    uniform = (uniform_prior_mean(eps, delta, s_star), uniform_prior_mean(eps_tilde, delta, s_star))
    tried, margins = [], []
    certified = None
    for d in schedule:
        prior = make_necessity_prior(delta, d, quad)
        a = posterior_moments(LocationExperiment(prior, eps, validate=False), s_star, quad)
        b = posterior_moments(LocationExperiment(prior, eps_tilde, validate=False), s_star, quad)
        margin = b.mean - a.mean
        tried.append(d)
        margins.append(margin)
        floor = max(margin_tol, 10.0 * (a.error + b.error))
        if margin > floor:
            certified = (prior, (a.mean, b.mean), margin)
            break
    if certified is None:
        raise SearchExhausted(
            f"margin not certified for {eps_tilde.name} vs {eps.name} after d={tried[-1]:g} "
            f"(last margin {margins[-1]:.3g})"
        )
    prior, means, margin = certified

    echo = []
    for d in tried:
        echo.append((d, posterior_moments(LocationExperiment(make_necessity_prior(delta, d, quad), eps,
                                                             validate=False), s_star, quad).mean))
    d = tried[-1]
    converged = False
    while True:
        if len(echo) >= 2:
            step = abs(echo[-1][1] - echo[-2][1])
            gap = abs(echo[-1][1] - uniform[0])
            if step < echo_tol and gap < echo_tol:
                converged = True
                break
        d *= 10.0
        if d > echo_cap:
            break
        p = make_necessity_prior(delta, d, quad)
        echo.append((d, posterior_moments(LocationExperiment(p, eps, validate=False), s_star, quad).mean))

    sym, lc = check_symmetry(prior), check_logconcave(prior)
    return Counterexample(
        noise_pair=(eps, eps_tilde),
        s_star=float(s_star),
        delta=float(delta),
        d_schedule=tried,
        final_prior=prior,
        means=means,
        margin=float(margin),
        uniform_means=uniform,
        echo=echo,
        echo_converged=converged,
        translation={
            "prior_flat_region": (-delta, delta),
            "noise_window": (s_star - delta, s_star + delta),
            "negative_slope_interval": interval,
            "shift": 0.0,
        },
        margins=margins,
        prior_checks={"symmetric": sym.passed, "log_concave": lc.passed},
    )


def counterexample_report(cx: Counterexample, tol: float = 1e-6) -> ExperimentReport:
    """Tabulate the d-schedule and echo; fails unless the counterexample is fully certified."""
    eps, eps_tilde = cx.noise_pair
    report = ExperimentReport(
        name=f"counterexample[{eps.name} vs {eps_tilde.name}]",
        inputs={"eps": eps.name, "eps_tilde": eps_tilde.name},
        columns=("d", "mean_eps", "uniform_gap", "margin"),
        provenance=provenance({"tol": tol}),
        artifacts={
            "s_star": cx.s_star,
            "delta": cx.delta,
            "final_prior": cx.final_prior.name,
            "means": cx.means,
            "margin": cx.margin,
            "uniform_means": cx.uniform_means,
            "translation": cx.translation,
            "echo_converged": cx.echo_converged,
        },
    )
    margins = dict(zip(cx.d_schedule, cx.margins))
    for d, m in cx.echo:
        report.rows.append((d, m, m - cx.uniform_means[0], margins.get(d, math.nan)))
    if not cx.margin > 0:
        report.violations.append(("margin", -cx.margin))
    if not cx.s_star > 0:
        report.violations.append(("s_star", -cx.s_star))
    for name, ok in cx.prior_checks.items():
        if not ok:
            report.violations.append((f"prior {name}", 1.0))
    if not cx.echo_converged:
        last = cx.echo[-1][1] - cx.uniform_means[0] if cx.echo else math.inf
        report.violations.append(("convergence echo", abs(last)))
    return report


# -------------------------------------------------------------- scale ladders

def verify_scale_monotonicity(prior: Density, eps: Density, sigma_ladder, s_grid=None,
                              quad: QuadratureConfig | None = None, tol: float = DEFAULT_TOL) -> ExperimentReport:
    """``|E[X | X + sigma*eps = s] - mu|`` is nonincreasing along an increasing ladder of scales."""
    quad = quad or QuadratureConfig()
    ladder = sorted(float(v) for v in sigma_ladder)
    lc_noise = check_logconcave(eps)
    lec = check_log_exp_concave(eps)
    report = ExperimentReport(
        name=f"scale-ladder[{prior.name} | {eps.name} x {ladder}]",
        inputs={"prior": prior.name, "eps": eps.name, "ladder": ",".join(f"{v:g}" for v in ladder)},
        columns=("s", "sigma", "posterior_mean", "distance", "pass"),
        provenance=provenance({"rel_tol": quad.rel_tol, "tol": tol}),
        notes=[f"noise log-concave={lc_noise.passed}", f"noise log f(e^u) concave={lec.passed}"],
        artifacts={"plot": {"x": "s", "y": ["posterior_mean"], "group": "sigma", "hlines": [prior.center],
                            "xlabel": "signal s", "ylabel": "posterior mean"}},
    )
    if not (lc_noise.passed or lec.passed):
        report.notes.append("noise fails both shape conditions; ladder checked without a guarantee")
    mu = prior.center
    exps = [LocationExperiment(prior, scale_density(eps, k), validate=False) for k in ladder]
    grid = as_points(s_grid if s_grid is not None else signal_grid(exps[len(exps) // 2]))
    for s in grid:
        prev = math.inf
        for k, exp in zip(ladder, exps):
            m = posterior_moments(exp, s, quad).mean
            dist = abs(m - mu)
            ok = dist <= prev + tol
            report.rows.append((float(s), k, m, dist, ok))
            if not ok:
                report.violations.append((_loc(s=float(s), sigma=k), dist - prev))
            prev = dist
    return report


# ---------------------------------------------------------------- prior duality

def verify_prior_duality(prior_pair: tuple[Density, Density], eps: Density, s_grid=None,
                         quad: QuadratureConfig | None = None, tol: float = DEFAULT_TOL,
                         swap_tol: float = SWAP_TOL) -> ExperimentReport:
    """A more precise prior ``X_tilde`` gives a posterior mean weakly closer to the prior mean.

    Also checks the swap identity ``E_swap(s - mu) + E_orig(s) - mu = s - mu``
    for both priors at every signal.
    """
    quad = quad or QuadratureConfig()
    x, x_t = prior_pair
    if x.center != x_t.center:
        raise PreconditionFailed(f"prior means differ: {x.center} vs {x_t.center}")
    verdict = check_less_precise(recenter(x), recenter(x_t))
    if verdict.relation is not Relation.LESS_PRECISE:
        raise PreconditionFailed(
            f"{x.name} is {verdict.relation.value} relative to {x_t.name}; the second prior must be more precise"
        )
    _require_logconcave(eps, "noise")
    mu = x.center
    exp, exp_t = LocationExperiment(x, eps), LocationExperiment(x_t, eps)
    report = ExperimentReport(
        name=f"prior-duality[{x.name} vs {x_t.name} | {eps.name}]",
        inputs={"prior": x.name, "prior_tilde": x_t.name, "eps": eps.name},
        columns=("s", "mean_prior", "mean_prior_tilde", "swap_residual", "swap_residual_tilde", "slack", "pass"),
        provenance=provenance({"rel_tol": quad.rel_tol, "tol": tol, "swap_tol": swap_tol}),
        artifacts={"plot": {"x": "s", "y": ["mean_prior", "mean_prior_tilde"], "hlines": [mu],
                            "xlabel": "signal s", "ylabel": "posterior mean"}},
    )
    sx, st = x.spec, x_t.spec
    if sx is not None and st is not None and sx.family == st.family and sx.shape == st.shape:
        report.notes.append(f"scale family: k={sx.scale:g} > k_tilde={st.scale:g}")
    for s in as_points(s_grid if s_grid is not None else signal_grid(exp)):
        m = posterior_moments(exp, s, quad).mean
        mt = posterior_moments(exp_t, s, quad).mean
        if s == mu:
            slack = -max(abs(m - mu), abs(mt - mu))
        else:
            sgn = 1.0 if s > mu else -1.0
            slack = min(sgn * (m - mt), sgn * (mt - mu))
        r, rt = swap_residual(exp, s, quad), swap_residual(exp_t, s, quad)
        ok = bool(slack >= -tol and abs(r) <= swap_tol and abs(rt) <= swap_tol)
        report.rows.append((float(s), m, mt, r, rt, slack, ok))
        if slack < -tol:
            report.violations.append((_loc(s=float(s), check="ordering"), -slack))
        for label, res in (("swap", r), ("swap_tilde", rt)):
            if abs(res) > swap_tol:
                report.violations.append((_loc(s=float(s), check=label), abs(res)))
    return report


# ------------------------------------------------------- posterior ratio

def verify_posterior_ratio_monotone(prior: Density, eps: Density, quad: QuadratureConfig | None = None,
                                    n: int = 400, tol: float = 1e-12, width: float = 5.0) -> ExperimentReport:
    """``log f(-x) - log f(x)`` of the posterior at ``s = 0`` is increasing for ``x > 0``.

    Violations are decreases beyond ``tol``; ``artifacts['strict']`` records
    whether the minimum slope is strictly positive.
    """
    quad = quad or QuadratureConfig()
    exp = LocationExperiment(prior, eps)
    mom = posterior_moments(exp, 0.0, quad)
    # the bulk of the posterior; further out the ratio saturates below float resolution
    hi = width * math.hypot(_sd_equiv(prior), _sd_equiv(eps)) + abs(prior.center)
    x = np.geomspace(1e-3 * prior.fine_scale, hi, n)
    lr = posterior_logpdf(exp, 0.0, -x, log_z=mom.log_z) - posterior_logpdf(exp, 0.0, x, log_z=mom.log_z)
    slope = np.diff(lr) / np.diff(x)
    mid = 0.5 * (x[1:] + x[:-1])
    report = ExperimentReport(
        name=f"posterior-ratio[{prior.name} | {eps.name}]",
        inputs={"prior": prior.name, "eps": eps.name, "signal": "0"},
        columns=("x", "log_ratio_slope", "pass"),
        provenance=provenance({"rel_tol": quad.rel_tol, "tol": tol}),
    )
    scale = np.maximum(1.0, np.abs(lr[1:]) + np.abs(lr[:-1]))
    band = tol * scale / np.diff(x)
    for xi, sl, b in zip(mid, slope, band):
        ok = sl >= -b
        report.rows.append((float(xi), float(sl), bool(ok)))
        if not ok:
            report.violations.append((_loc(x=float(xi)), float(-sl)))
    min_slope = float(np.min(slope))
    report.artifacts.update(min_slope=min_slope, strict=bool(np.all(slope > band)),
                            argmin=float(mid[int(np.argmin(slope))]))
    if prior.center >= 0:
        report.notes.append("prior mean is not negative; the ratio is not expected to increase strictly")
    return report


# ----------------------------------------------------------------- suite

@dataclass(frozen=True)
class SuiteConfig:
    """Inputs for :func:`run_full_suite`; every field has a working default."""

    priors: tuple[str, ...] = (
        "normal(0,1)", "logistic(0,1)", "doubleexponential(0,1)", "smootheduniform(0,1,1,50)", "normal(0,2)",
    )
    noises: tuple[str, ...] = (
        "normal(0,1)", "logistic(0,1)", "doubleexponential(0,1)", "studentt(0,1,3)", "normal(0,0.5)",
    )
    # extra (eps, eps_tilde) pairs for the attenuation check, on top of ordered matrix pairs
    attenuation_pairs: tuple[tuple[str, str], ...] = (
        ("normal(0,1)", "normal(0,1.5)"),
        ("doubleexponential(0,1)", "doubleexponential(0,2)"),
        ("logistic(0,1)", "logistic(0,2)"),
        ("studentt(0,1,3)", "studentt(0,2,3)"),
    )
    counterexample_pairs: tuple[tuple[str, str], ...] = (
        ("normal(0,1)", "doubleexponential(0,1)"),
        ("cauchy(0,1)", "cauchyuniform(0,1,1)"),
    )
    # also run the constructor on every Incomparable pair among ``noises``
    matrix_counterexamples: bool = True
    ladders: tuple[tuple[str, str, tuple[float, ...]], ...] = (
        ("normal(0,1)", "normal(0,1)", (0.5, 1.0, 2.0)),
        ("normal(0,1)", "studentt(0,1,3)", (0.5, 1.0, 2.0, 4.0)),
        ("logistic(0,1)", "doubleexponential(0,1)", (0.5, 1.0, 2.0)),
        ("normal(0,1)", "doublepareto(0,1,2)", (0.5, 1.0, 2.0)),
    )
    prior_pairs: tuple[tuple[str, str, str], ...] = (
        ("normal(0,2)", "normal(0,1)", "normal(0,1)"),
        ("logistic(0,2)", "logistic(0,1)", "normal(0,1)"),
        ("doubleexponential(0,2)", "doubleexponential(0,1)", "logistic(0,1)"),
    )
    ratio_cases: tuple[tuple[str, str], ...] = (
        ("normal(-0.5,1)", "normal(0,1)"),
        ("logistic(-0.5,1)", "logistic(0,1)"),
        ("normal(-0.5,2)", "doubleexponential(0,1)"),
    )
    # (label, prior, objective noise, believed A, believed B)
    confidence_cases: tuple[tuple[str, str, str, str, str], ...] = (
        ("normal", "normal(0,1)", "normal(0,1)", "normal(0,0.5)", "normal(0,1)"),
        ("logistic-prior", "logistic(0,1)", "normal(0,1)", "normal(0,0.7)", "normal(0,1.4)"),
        ("laplace-beliefs", "normal(0,1)", "logistic(0,1)", "doubleexponential(0,0.5)", "doubleexponential(0,1)"),
    )
    # (label, prior A, prior B, noise)
    prior_cases: tuple[tuple[str, str, str, str], ...] = (
        ("normal", "normal(0,2)", "normal(0,1)", "normal(0,1)"),
        ("logistic", "logistic(0,2)", "logistic(0,1)", "normal(0,1)"),
        ("laplace", "doubleexponential(0,1.5)", "doubleexponential(0,1)", "logistic(0,1)"),
    )
    state_grid: tuple[float, ...] = (-3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0)
    montecarlo_cases: tuple[tuple[str, str, str, float], ...] = (
        ("normal(0,1)", "normal(0,1)", "normal(0,0.5)", 2.0),
        ("logistic(0,1)", "studentt(0,1,3)", "", 2.0),
        ("normal(0,1)", "doubleexponential(0,1)", "", -1.0),
    )
    montecarlo_draws: int = 1_000_000
    seed: int = 0
    n_signals: int = 25
    tol: float = DEFAULT_TOL
    quad: QuadratureConfig = QuadratureConfig()
    jobs: int = 1

    def with_rel_tol(self, rel_tol: float) -> "SuiteConfig":
        return replace(self, quad=replace(self.quad, rel_tol=rel_tol))


SUITES = ("betweenness", "attenuation", "counterexample", "scale", "duality", "ratio", "average", "montecarlo")


def _failed(name: str, exc: Exception) -> ExperimentReport:
    return ExperimentReport(name=name, inputs={}, columns=("error",), rows=[(str(exc),)],
                            violations=[(type(exc).__name__, math.inf)], notes=[str(exc)])


def _guard(name: str, fn: Callable[[], ExperimentReport]) -> Callable[[], ExperimentReport]:
    def run():
        try:
            return fn()
        except PreconditionFailed as exc:
            log.warning("%s: precondition failed: %s", name, exc)
            return _failed(name, exc)
        except SearchExhausted as exc:
            return _failed(name, exc)
    return run


def _matrix(cfg: SuiteConfig) -> list[LocationExperiment]:
    return [LocationExperiment(make_density(p), make_density(n)) for p in cfg.priors for n in cfg.noises]


def _ordered_pairs(specs) -> list[tuple[str, str]]:
    """(eps, eps_tilde) pairs with eps_tilde certified less precise than eps."""
    out = []
    for a, b in itertools.permutations(specs, 2):
        if check_less_precise(make_density(b), make_density(a)).relation is Relation.LESS_PRECISE:
            out.append((a, b))
    return out


def _incomparable_pairs(specs) -> list[tuple[str, str]]:
    return [(a, b) for a, b in itertools.permutations(specs, 2)
            if check_less_precise(make_density(b), make_density(a)).relation is Relation.INCOMPARABLE]


def _tasks(cfg: SuiteConfig, suite: str) -> list[tuple[str, Callable[[], ExperimentReport]]]:
    D, q, tol = make_density, cfg.quad, cfg.tol
    tasks: list[tuple[str, Callable[[], ExperimentReport]]] = []

    def sgrid(exp):
        return signal_grid(exp, cfg.n_signals)

    if suite == "betweenness":
        def run_betweenness():
            rep = ExperimentReport(
                name="betweenness", inputs={"priors": ",".join(cfg.priors), "noises": ",".join(cfg.noises)},
                columns=("experiment", "s", "posterior_mean", "slack", "strict", "pass"),
                provenance=provenance({"rel_tol": q.rel_tol, "tol": tol}),
                artifacts={"plot": BETWEENNESS_PLOT},
            )
            for exp in _matrix(cfg):
                sub = verify_betweenness([exp], sgrid(exp), q, tol)
                rep.rows.extend(sub.rows)
                rep.violations.extend(sub.violations)
            return rep
        tasks.append(("betweenness", run_betweenness))

    elif suite == "attenuation":
        pairs = _ordered_pairs(cfg.noises) + [p for p in cfg.attenuation_pairs]
        seen = set()
        for prior in cfg.priors:
            for eps, eps_t in pairs:
                if (prior, eps, eps_t) in seen:
                    continue
                seen.add((prior, eps, eps_t))
                name = f"attenuation[{prior} | {eps} vs {eps_t}]"

                def run(prior=prior, eps=eps, eps_t=eps_t):
                    pd = D(prior)
                    exp = LocationExperiment(pd, D(eps_t))
                    return verify_attenuation(pd, D(eps), D(eps_t), sgrid(exp), q, tol)
                tasks.append((name, run))

    elif suite == "counterexample":
        pairs = list(cfg.counterexample_pairs)
        if cfg.matrix_counterexamples:
            pairs += [p for p in _incomparable_pairs(cfg.noises) if p not in pairs]
        for eps, eps_t in pairs:
            name = f"counterexample[{eps} vs {eps_t}]"
            tasks.append((name, lambda eps=eps, eps_t=eps_t: counterexample_report(
                find_counterexample(D(eps), D(eps_t), q))))

    elif suite == "scale":
        for prior, eps, ladder in cfg.ladders:
            name = f"scale-ladder[{prior} | {eps}]"

            def run(prior=prior, eps=eps, ladder=ladder):
                pd, ed = D(prior), D(eps)
                mid = LocationExperiment(pd, ed, validate=False)
                return verify_scale_monotonicity(pd, ed, ladder, signal_grid(mid, cfg.n_signals), q, tol)
            tasks.append((name, run))

    elif suite == "duality":
        for x, x_t, eps in cfg.prior_pairs:
            name = f"prior-duality[{x} vs {x_t} | {eps}]"

            def run(x=x, x_t=x_t, eps=eps):
                exp = LocationExperiment(D(x), D(eps))
                return verify_prior_duality((D(x), D(x_t)), D(eps), sgrid(exp), q, tol)
            tasks.append((name, run))

    elif suite == "ratio":
        for prior, eps in cfg.ratio_cases:
            name = f"posterior-ratio[{prior} | {eps}]"

            def run(prior=prior, eps=eps):
                rep = verify_posterior_ratio_monotone(D(prior), D(eps), q)
                if not rep.artifacts["strict"]:
                    rep.violations.append(("strictness", -rep.artifacts["min_slope"]))
                return rep
            tasks.append((name, run))

    elif suite == "average":
        xs = list(cfg.state_grid)
        for label, prior, noise, bel_a, bel_b in cfg.confidence_cases:
            name = f"compare-confidence[{label}]"

            def run(prior=prior, noise=noise, bel_a=bel_a, bel_b=bel_b):
                p = D(prior)
                return compare_confidence(AgentBelief("A", D(bel_a), p), AgentBelief("B", D(bel_b), p),
                                          D(noise), xs, q, tol)
            tasks.append((name, run))
        for label, pa, pb, noise in cfg.prior_cases:
            name = f"compare-prior[{label}]"

            def run(pa=pa, pb=pb, noise=noise):
                n = D(noise)
                return compare_prior_precision(AgentBelief("A", n, D(pa)), AgentBelief("B", n, D(pb)), n, xs, q, tol)
            tasks.append((name, run))
        for label, prior, noise, bel_a, _ in cfg.confidence_cases:
            name = f"average-sandwich[{label}]"

            def run(prior=prior, noise=noise, bel_a=bel_a):
                exp = LocationExperiment(D(prior), D(noise), D(bel_a))
                return verify_average_sandwich(exp, xs, q, tol)
            tasks.append((name, run))

    elif suite == "montecarlo":
        def run_mc():
            rep = ExperimentReport(
                name="montecarlo", inputs={"draws": str(cfg.montecarlo_draws), "seed": str(cfg.seed)},
                columns=("experiment", "x", "quadrature", "montecarlo", "std_error", "interp_error", "z", "pass"),
                provenance=provenance({"rel_tol": q.rel_tol, "seed": cfg.seed, "draws": cfg.montecarlo_draws}),
            )
            for i, (prior, noise, believed, x) in enumerate(cfg.montecarlo_cases):
                exp = LocationExperiment(D(prior), D(noise), D(believed) if believed else None)
                quadv = average_posterior_mean(exp, x, q)
                est, se, ierr = monte_carlo_average(exp, x, cfg.montecarlo_draws, cfg.seed + i, q)
                z = (est - quadv) / se
                ok = abs(z) <= 4.0 and ierr < 0.1 * se
                rep.rows.append((exp.describe(), float(x), quadv, est, se, ierr, z, ok))
                if not ok:
                    rep.violations.append((_loc(experiment=exp.describe(), x=float(x)), abs(z)))
            return rep
        tasks.append(("montecarlo", run_mc))

    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    return [(name, _guard(name, fn)) for name, fn in tasks]


def run_full_suite(config: SuiteConfig | None = None, suites=SUITES) -> list[ExperimentReport]:
    """Run the selected suites; precondition failures become failed reports.

    Reports come back in task order regardless of ``config.jobs``.
    """
    config = config or SuiteConfig()
    tasks = [t for suite in suites for t in _tasks(config, suite)]
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(lambda t: t[1](), tasks))
    return [fn() for _, fn in tasks]


__all__ = [
    "Counterexample",
    "SUITES",
    "SuiteConfig",
    "counterexample_report",
    "find_counterexample",
    "run_full_suite",
    "signal_grid",
    "uniform_prior_mean",
    "verify_attenuation",
    "verify_betweenness",
    "verify_posterior_ratio_monotone",
    "verify_prior_duality",
    "verify_scale_monotonicity",
]
