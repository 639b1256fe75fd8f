"""Average posterior means ``E[E[X|S] | X = x]`` and agent comparisons.

The signal is drawn from the *objective* noise around the true state ``x``;
each agent conditions with their own believed noise. The outer integral over
signals nests the posterior engine with a tightened inner tolerance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .densities import Density, check_logconcave, recenter
from .errors import DegenerateSignal, PreconditionFailed
from .grids import GridSpec, as_points
from .posterior import LocationExperiment, posterior_mean, posterior_moments
from .precision import Relation, check_less_precise
from .quadrature import QuadratureConfig, geometric_breakpoints, integrate
from .report import ExperimentReport, provenance

log = logging.getLogger(__name__)

OUTER_TAIL_MASS = 1e-10
INNER_TIGHTENING = 100.0
DEFAULT_SANDWICH_TOL = 1e-7
COMPARE_COLUMNS = ("x", "value_A", "value_B", "margin", "pass")


@dataclass(frozen=True)
class AgentBelief:
    """An agent's prior and the noise they believe the signal carries."""

    label: str
    believed_noise: Density
    prior: Density


@dataclass(frozen=True)
class AverageResult:
    x: float
    value: float
    error: float
    degenerate_mass: float
    n_inner: int


def average_posterior_mean_detailed(exp: LocationExperiment, x: float,
                                    quad: QuadratureConfig | None = None) -> AverageResult:
    quad = quad or QuadratureConfig()
    inner = quad.tightened(INNER_TIGHTENING)
    noise = exp.noise
    x = float(x)
    nlo, nhi = noise.support(OUTER_TAIL_MASS)
    feats = [x, exp.prior.center, *(x + f for f in noise.features)]
    step = min(noise.fine_scale, exp.prior.fine_scale, exp.conditioning_noise.fine_scale)
    bps = geometric_breakpoints(feats, x + nlo, x + nhi, step)
    counters = {"inner": 0, "degenerate": 0.0}

    def integrand(s):
        w = noise.pdf(s - x)
        m = np.empty_like(s)
        for i, si in enumerate(s):
            try:
                m[i] = posterior_moments(exp, si, inner).mean
            except DegenerateSignal:
                m[i] = 0.0
                w[i] = 0.0
                counters["degenerate"] += float(noise.pdf(np.array([si - x]))[0])
        counters["inner"] += s.size
        return np.stack([m * w, np.abs(m - exp.prior.center) * w + np.abs(s - x) * w])

    res = integrate(integrand, bps, quad.rel_tol, quad.abs_tol, quad.max_subdivisions, reference=[1, 1])
    if counters["degenerate"] > 0:
        log.warning("average at x=%g: degenerate inner signals skipped (pdf sum %.3g)", x, counters["degenerate"])
    return AverageResult(x, float(res.value[0]), float(res.error[0]), counters["degenerate"], counters["inner"])


def average_posterior_mean(exp: LocationExperiment, x: float, quad: QuadratureConfig | None = None) -> float:
    """``E[E[X|S] | X = x]``: the posterior mean averaged over signals ``S = x + eps``.

    The weight uses the objective noise; the inner posterior mean uses the
    believed noise when one is set.
    """
    return average_posterior_mean_detailed(exp, x, quad).value


def monte_carlo_average(exp: LocationExperiment, x: float, n: int = 1_000_000, seed: int = 0,
                        quad: QuadratureConfig | None = None, table_size: int = 2001):
    """Monte-Carlo estimate of the average posterior mean.

    Signals are drawn by inverse-cdf sampling from the objective noise. The
    posterior mean is tabulated on a dense grid and interpolated with a cubic
    spline; the interpolation error is measured at the midpoints of the table
    and returned so callers can confirm it is negligible against the standard
    error.

    Returns ``(estimate, standard_error, interpolation_error)``.
    """
    quad = quad or QuadratureConfig()
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    signals = float(x) + exp.noise.quantile(u)

    lo, hi = float(signals.min()), float(signals.max())
    spread = exp.noise.spread() + exp.prior.spread()
    core_lo, core_hi = max(lo, x - 10 * spread), min(hi, x + 10 * spread)
    knots = np.linspace(core_lo, core_hi, table_size)
    if lo < core_lo:
        knots = np.concatenate([core_lo - np.geomspace(1e-2 * spread, core_lo - lo, 200)[::-1], knots])
    if hi > core_hi:
        knots = np.concatenate([knots, core_hi + np.geomspace(1e-2 * spread, hi - core_hi, 200)])
    knots = np.unique(knots)
    values = np.array([posterior_mean(exp, s, quad) for s in knots])
    spline = CubicSpline(knots, values)

    mids = 0.5 * (knots[:-1] + knots[1:])
    probe = mids[:: max(1, mids.size // 200)]
    interp_err = float(np.max(np.abs(spline(probe) - np.array([posterior_mean(exp, s, quad) for s in probe]))))

    draws = spline(signals)
    est = float(np.mean(draws))
    se = float(np.std(draws, ddof=1) / math.sqrt(n))
    return est, se, interp_err


def _sandwich_slacks(x: float, mu: float, v_a: float, v_b: float) -> tuple[float, float]:
    """Worst slack of ``x >= v_a >= v_b >= mu`` (mirrored below ``mu``) and the A-vs-B margin."""
    if x == mu:
        return -max(abs(v_a - mu), abs(v_b - mu)), 0.0
    sgn = 1.0 if x > mu else -1.0
    slacks = (sgn * (x - v_a), sgn * (v_a - v_b), sgn * (v_b - mu))
    return min(slacks), sgn * (v_a - v_b)


def verify_average_sandwich(exp: LocationExperiment, x_grid, quad: QuadratureConfig | None = None,
                            tol: float = DEFAULT_SANDWICH_TOL) -> ExperimentReport:
    """The average posterior mean lies between the state and the prior mean."""
    quad = quad or QuadratureConfig()
    mu = exp.prior_mean
    report = ExperimentReport(
        name=f"average-sandwich[{exp.describe()}]",
        inputs={"prior": exp.prior.name, "noise": exp.noise.name,
                "believed": exp.believed_noise.name if exp.believed_noise else ""},
        columns=("x", "average_posterior_mean", "slack", "pass"),
        provenance=provenance({"rel_tol": quad.rel_tol, "tol": tol}),
    )
    for x in as_points(x_grid):
        v = average_posterior_mean(exp, x, quad)
        slack, _ = _sandwich_slacks(float(x), mu, v, v)
        ok = slack >= -tol
        report.rows.append((float(x), v, slack, ok))
        if not ok:
            report.violations.append((f"x={x:.17g}", -slack))
    return report


def _compare(name: str, exp_a: LocationExperiment, exp_b: LocationExperiment, x_grid,
             quad: QuadratureConfig, tol: float, inputs: dict) -> ExperimentReport:
    mu = exp_a.prior_mean
    report = ExperimentReport(
        name=name,
        inputs=inputs,
        columns=COMPARE_COLUMNS,
        provenance=provenance({"rel_tol": quad.rel_tol, "tol": tol, **inputs}),
    )
    for x in as_points(x_grid):
        va = average_posterior_mean(exp_a, x, quad)
        vb = average_posterior_mean(exp_b, x, quad)
        slack, margin = _sandwich_slacks(float(x), mu, va, vb)
        ok = slack >= -tol
        report.rows.append((float(x), va, vb, margin, ok))
        if not ok:
            report.violations.append((f"x={x:.17g}", -slack))
    return report


def compare_confidence(a: AgentBelief, b: AgentBelief, objective_noise: Density, x_grid,
                       quad: QuadratureConfig | None = None, tol: float = DEFAULT_SANDWICH_TOL) -> ExperimentReport:
    """A (more confident) must average closer to the state than B, both between state and prior mean."""
    quad = quad or QuadratureConfig()
    if a.prior is not b.prior and a.prior.name != b.prior.name:
        raise PreconditionFailed(f"agents must share a prior: {a.prior.name} vs {b.prior.name}")
    verdict = check_less_precise(b.believed_noise, a.believed_noise)
    if verdict.relation is not Relation.LESS_PRECISE:
        raise PreconditionFailed(
            f"{b.label}'s believed noise {b.believed_noise.name} is {verdict.relation.value} "
            f"relative to {a.label}'s {a.believed_noise.name}; need LessPrecise"
        )
    lc = check_logconcave(a.prior)
    if not lc.passed:
        raise PreconditionFailed(f"prior {a.prior.name} is not log-concave (near {lc.witness})")
    exp_a = LocationExperiment(a.prior, objective_noise, a.believed_noise)
    exp_b = LocationExperiment(b.prior, objective_noise, b.believed_noise)
    inputs = {"prior": a.prior.name, "objective_noise": objective_noise.name,
              "believed_A": a.believed_noise.name, "believed_B": b.believed_noise.name}
    report = _compare(f"compare-confidence[{a.label} vs {b.label}]", exp_a, exp_b, x_grid, quad, tol, inputs)
    report.notes.append(f"precision precondition: {verdict.relation.value} (strict={verdict.strict})")
    return report


def compare_prior_precision(a: AgentBelief, b: AgentBelief, objective_noise: Density, x_grid,
                            quad: QuadratureConfig | None = None, tol: float = DEFAULT_SANDWICH_TOL) -> ExperimentReport:
    """A (less precise prior) must average closer to the state than B."""
    quad = quad or QuadratureConfig()
    if a.prior.center != b.prior.center:
        raise PreconditionFailed(f"prior means differ: {a.prior.center} vs {b.prior.center}")
    for agent in (a, b):
        if agent.believed_noise.name != objective_noise.name:
            raise PreconditionFailed(f"{agent.label} must use the objective noise {objective_noise.name}")
    verdict = check_less_precise(recenter(a.prior), recenter(b.prior))
    if verdict.relation is not Relation.LESS_PRECISE:
        raise PreconditionFailed(
            f"{a.label}'s prior {a.prior.name} is {verdict.relation.value} relative to "
            f"{b.label}'s {b.prior.name}; need LessPrecise"
        )
    lc = check_logconcave(objective_noise)
    if not lc.passed:
        raise PreconditionFailed(f"noise {objective_noise.name} is not log-concave (near {lc.witness})")
    exp_a = LocationExperiment(a.prior, objective_noise)
    exp_b = LocationExperiment(b.prior, objective_noise)
    inputs = {"prior_A": a.prior.name, "prior_B": b.prior.name, "objective_noise": objective_noise.name}
    report = _compare(f"compare-prior[{a.label} vs {b.label}]", exp_a, exp_b, x_grid, quad, tol, inputs)
    report.notes.append(f"precision precondition: {verdict.relation.value} (strict={verdict.strict})")
    return report


__all__ = [
    "AgentBelief",
    "AverageResult",
    "COMPARE_COLUMNS",
    "average_posterior_mean",
    "average_posterior_mean_detailed",
    "compare_confidence",
    "compare_prior_precision",
    "monte_carlo_average",
    "verify_average_sandwich",
]
