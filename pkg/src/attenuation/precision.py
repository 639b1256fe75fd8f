"""Precision order between symmetric noise densities.

``eps_tilde`` is less precise than ``eps`` when the likelihood ratio
``f_tilde / f`` is nondecreasing on the positive half-line. The order is
decided from the slope of the log likelihood ratio on a log-spaced grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .densities import (
    Density,
    check_log_exp_concave,
    check_quasiconcave,
    check_symmetry,
    scale_density,
)
from .errors import InadmissibleDensity, InvalidParameter
from .grids import CheckResult, GridSpec, as_points


class Relation(str, enum.Enum):
    LESS_PRECISE = "LessPrecise"
    MORE_PRECISE = "MorePrecise"
    EQUAL = "Equal"
    INCOMPARABLE = "Incomparable"

    def flipped(self) -> "Relation":
        return {
            Relation.LESS_PRECISE: Relation.MORE_PRECISE,
            Relation.MORE_PRECISE: Relation.LESS_PRECISE,
        }.get(self, self)


@dataclass(frozen=True)
class OrderVerdict:
    """Result of comparing ``eps_tilde`` against ``eps``.

    Witnesses are ``(x, slope)`` pairs for the most negative and most positive
    slope of ``log(f_tilde / f)`` on the grid; a witness is only reported when
    it exceeds the tolerance. ``strict`` is true when every slope is strictly
    positive (LessPrecise) or strictly negative (MorePrecise) beyond tolerance.
    """

    relation: Relation
    witness_decrease: tuple[float, float] | None
    witness_increase: tuple[float, float] | None
    grid_used: GridSpec | None
    strict: bool = False
    basis: str = "grid"
    details: dict = field(default_factory=dict)
    profile: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    slope_band: np.ndarray | None = field(default=None, repr=False)

    @property
    def less_precise(self) -> bool:
        return self.relation is Relation.LESS_PRECISE


DEFAULT_SLOPE_TOL = 1e-8


def likelihood_ratio(eps_tilde: Density, eps: Density, x):
    """``f_tilde(x) / f(x)`` evaluated through the log-pdf difference."""
    x = np.asarray(x, dtype=float)
    return np.exp(eps_tilde.logpdf(x) - eps.logpdf(x))


def order_grid(eps_tilde: Density, eps: Density, n: int = 4096, upper_mass: float = 1e-10) -> GridSpec:
    """Log-spaced positive grid up to the ``1 - upper_mass`` quantile of the heavier tail."""
    hi = max(-float(d.quantile(np.array([upper_mass]))[0]) for d in (eps_tilde, eps))
    lo = 1e-4 * min(d.spread() for d in (eps_tilde, eps))
    return GridSpec(lo, hi, n, "log")


def log_ratio_slope(eps_tilde: Density, eps: Density, x, method: str = "auto") -> np.ndarray:
    """Slope of ``log f_tilde - log f`` at ``x``.

    ``method="analytic"`` uses the families' log-pdf derivatives, ``"numeric"``
    a central difference with step proportional to ``|x|``. ``"auto"`` picks
    the analytic route when both densities provide it.
    """
    x = np.asarray(x, dtype=float)
    if method == "auto":
        method = "analytic" if (eps_tilde.dlogpdf and eps.dlogpdf) else "numeric"
    if method == "analytic":
        return eps_tilde.dlogpdf(x) - eps.dlogpdf(x)
    h = 1e-5 * np.maximum(np.abs(x), 1e-3 * min(eps_tilde.fine_scale, eps.fine_scale))
    lr = lambda t: eps_tilde.logpdf(t) - eps.logpdf(t)  # noqa: E731
    return (lr(x + h) - lr(x - h)) / (2.0 * h)


def _slope_tolerance(eps_tilde: Density, eps: Density, x: np.ndarray, tol: float, method: str) -> np.ndarray:
    if method == "numeric" or not (eps_tilde.dlogpdf and eps.dlogpdf):
        ga, gb = np.abs(_numeric_dlog(eps_tilde, x)), np.abs(_numeric_dlog(eps, x))
    else:
        ga, gb = np.abs(eps_tilde.dlogpdf(x)), np.abs(eps.dlogpdf(x))
    return tol * np.maximum(ga, gb) + 1e-300


def _numeric_dlog(d: Density, x: np.ndarray) -> np.ndarray:
    h = 1e-5 * np.maximum(np.abs(x), 1e-3 * d.fine_scale)
    return (d.logpdf(x + h) - d.logpdf(x - h)) / (2.0 * h)


def _require_admissible(d: Density, role: str):
    if d.center != 0.0:
        raise InadmissibleDensity(f"{role} {d.name} is not centered at 0")
    sym = check_symmetry(d)
    qc = check_quasiconcave(d)
    if not sym.passed:
        raise InadmissibleDensity(f"{role} {d.name} fails symmetry at x={sym.witness}")
    if not qc.passed:
        raise InadmissibleDensity(f"{role} {d.name} fails quasi-concavity near {qc.witness}")


def check_less_precise(
    eps_tilde: Density,
    eps: Density,
    grid: GridSpec | None = None,
    tol: float = DEFAULT_SLOPE_TOL,
    method: str = "auto",
    validate: bool = True,
) -> OrderVerdict:
    """Classify ``eps_tilde`` relative to ``eps`` in the precision order.

    All slopes >= -tol gives LessPrecise, all <= tol MorePrecise, all within
    +/-tol Equal, and strict violations in both directions Incomparable. The
    tolerance is relative to the local log-pdf slope magnitude.
    """
    if validate:
        _require_admissible(eps_tilde, "eps_tilde")
        _require_admissible(eps, "eps")
    grid = grid or order_grid(eps_tilde, eps)
    x = as_points(grid)
    slope = log_ratio_slope(eps_tilde, eps, x, method)
    band = _slope_tolerance(eps_tilde, eps, x, tol, method)
    neg = slope < -band
    pos = slope > band

    i_min, i_max = int(np.argmin(slope)), int(np.argmax(slope))
    w_dec = (float(x[i_min]), float(slope[i_min])) if neg.any() else None
    w_inc = (float(x[i_max]), float(slope[i_max])) if pos.any() else None

    if not neg.any() and not pos.any():
        relation, strict = Relation.EQUAL, False
    elif not neg.any():
        relation, strict = Relation.LESS_PRECISE, bool(pos.all())
    elif not pos.any():
        relation, strict = Relation.MORE_PRECISE, bool(neg.all())
    else:
        relation, strict = Relation.INCOMPARABLE, False

    log_ratio = eps_tilde.logpdf(x) - eps.logpdf(x)
    return OrderVerdict(
        relation=relation,
        witness_decrease=w_dec,
        witness_increase=w_inc,
        grid_used=grid if isinstance(grid, GridSpec) else None,
        strict=strict,
        details={
            "eps_tilde": eps_tilde.name,
            "eps": eps.name,
            "min_slope": float(slope[i_min]),
            "max_slope": float(slope[i_max]),
            "negative_points": int(neg.sum()),
            "positive_points": int(pos.sum()),
        },
        profile=(x, log_ratio, slope),
        slope_band=band,
    )


def negative_slope_intervals(verdict: OrderVerdict) -> list[tuple[float, float]]:
    """Maximal grid intervals on which the log-ratio slope is negative beyond tolerance."""
    if verdict.profile is None:
        return []
    x, _, slope = verdict.profile
    band = verdict.slope_band if verdict.slope_band is not None else 0.0
    neg = slope < -band
    out = []
    i = 0
    while i < x.size:
        if neg[i]:
            j = i
            while j + 1 < x.size and neg[j + 1]:
                j += 1
            lo = 0.0 if i == 0 else float(x[i - 1])
            hi = float(x[j + 1]) if j + 1 < x.size else float(x[j])
            out.append((lo, hi))
            i = j + 1
        else:
            i += 1
    return out


def check_scale_less_precise(
    eps: Density,
    sigma: float,
    sigma_prime: float,
    cross_validate: bool = False,
    tol: float = DEFAULT_SLOPE_TOL,
) -> OrderVerdict:
    """Is ``sigma_prime * eps`` less precise than ``sigma * eps``?

    When ``log f(exp(u))`` is concave the answer is yes for every
    ``sigma_prime > sigma`` without a grid scan; otherwise the scaled pair is
    compared directly. ``cross_validate`` runs the direct scan as well and
    records whether the two routes agree.
    """
    if not (sigma > 0 and sigma_prime >= sigma):
        raise InvalidParameter(f"need sigma_prime >= sigma > 0, got sigma={sigma}, sigma_prime={sigma_prime}")
    if sigma_prime == sigma:
        return OrderVerdict(Relation.EQUAL, None, None, None, basis="identical scale")
    small = scale_density(eps, sigma)
    large = scale_density(eps, sigma_prime)
    shortcut = check_log_exp_concave(eps)
    if shortcut.passed:
        verdict = OrderVerdict(
            Relation.LESS_PRECISE, None, None, None, strict=True, basis="log-exp-concavity",
            details={"eps": eps.name, "sigma": sigma, "sigma_prime": sigma_prime},
        )
        if cross_validate:
            direct = check_less_precise(large, small, tol=tol)
            verdict.details["direct"] = direct.relation.value
            verdict.details["agrees"] = direct.relation is Relation.LESS_PRECISE
        return verdict
    direct = check_less_precise(large, small, tol=tol)
    direct.details["shortcut"] = "log-exp-concavity failed"
    return direct


def check_mean_preserving_spread(
    eps_tilde: Density,
    eps: Density,
    grid: GridSpec | None = None,
    tol: float = 1e-10,
) -> CheckResult:
    """``cdf_tilde - cdf`` must change sign exactly once (zeros allowed in between).

    A ``+ ... 0 ... -`` pattern means ``eps_tilde`` spreads ``eps`` (direction
    ``direct``); ``- ... +`` is reported as ``reversed``; an all-zero
    difference is the equal case.
    """
    for role, d in (("eps_tilde", eps_tilde), ("eps", eps)):
        if not d.admissible_as_noise:
            return CheckResult("mean-preserving-spread", False, details={"reason": f"{role} {d.name} not admissible as noise"})
    if grid is None:
        lo = min(d.support(1e-12)[0] for d in (eps_tilde, eps))
        inner = 4.0 * max(d.spread() for d in (eps_tilde, eps))
        grid = GridSpec(lo, -lo, 4097, "composite", center=0.0, inner=min(inner, -lo))
    x = as_points(grid)
    diff = eps_tilde.cdf(x) - eps.cdf(x)
    sign = np.where(diff > tol, 1, np.where(diff < -tol, -1, 0))
    nz = sign[sign != 0]
    if nz.size == 0:
        return CheckResult("mean-preserving-spread", True, magnitude=0.0, details={"direction": "equal"})
    changes = int(np.count_nonzero(np.diff(nz)))
    passed = changes == 1
    direction = None
    crossing = None
    if passed:
        direction = "direct" if nz[0] > 0 else "reversed"
        first_after = np.nonzero(sign == nz[-1])[0][0]
        last_before = np.nonzero(sign == nz[0])[0]
        last_before = last_before[last_before < first_after][-1]
        crossing = 0.5 * float(x[last_before + 1] + x[first_after - 1])
    return CheckResult(
        "mean-preserving-spread",
        passed,
        witness=crossing,
        magnitude=float(np.max(np.abs(diff))),
        details={"direction": direction, "sign_changes": changes},
    )


__all__ = [
    "OrderVerdict",
    "Relation",
    "check_less_precise",
    "check_mean_preserving_spread",
    "check_scale_less_precise",
    "likelihood_ratio",
    "log_ratio_slope",
    "negative_slope_intervals",
    "order_grid",
]
