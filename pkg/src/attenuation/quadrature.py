"""Vectorised adaptive Gauss-Kronrod (G10/K21) integration.

The integrand is evaluated on all nodes of all active panels in one call, and
may return several components at once (e.g. the normaliser and the first
moment of a posterior), which then share nodes and refinement decisions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParameter, QuadratureFailure

# QUADPACK qk21 abscissae (non-negative half) and weights.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# full 21-node rule on [-1, 1]
NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
GAUSS_WEIGHTS = np.zeros(21)
GAUSS_WEIGHTS[1:10:2] = _WG
GAUSS_WEIGHTS[11:20:2] = _WG[::-1]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances governing every integral in the package."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    tail_mass: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.tail_mass > 0):
            raise InvalidParameter("rel_tol, abs_tol and tail_mass must be positive")
        if self.tail_mass >= 0.5:
            raise InvalidParameter("tail_mass must be below 1/2")
        if int(self.max_subdivisions) < 1:
            raise InvalidParameter("max_subdivisions must be at least 1")

    def tightened(self, factor: float) -> "QuadratureConfig":
        """Same config with ``rel_tol`` divided by ``factor`` (floored near machine precision)."""
        return QuadratureConfig(
            rel_tol=max(self.rel_tol / factor, 1e-13),
            abs_tol=max(self.abs_tol / factor, 1e-300),
            tail_mass=self.tail_mass,
            max_subdivisions=self.max_subdivisions,
        )


@dataclass(frozen=True)
class IntegralResult:
    value: np.ndarray
    error: np.ndarray
    n_panels: int
    n_evals: int
    roundoff_limited: bool = False


def _apply_rule(func, a: np.ndarray, b: np.ndarray):
    """Evaluate the G10/K21 pair on every panel [a_i, b_i]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    fx = np.asarray(func(x), dtype=float)
    if fx.ndim == 1:
        fx = fx[None, :]
    fx = fx.reshape(fx.shape[0], a.size, 21)
    kron = np.einsum("mpn,n->mp", fx, KRONROD_WEIGHTS) * half
    gauss = np.einsum("mpn,n->mp", fx, GAUSS_WEIGHTS) * half
    abs_half = np.abs(half)
    resabs = np.einsum("mpn,n->mp", np.abs(fx), KRONROD_WEIGHTS) * abs_half
    mean = kron / np.where(half == 0, 1.0, half) * 0.5
    resasc = np.einsum("mpn,n->mp", np.abs(fx - mean[:, :, None]), KRONROD_WEIGHTS) * abs_half
    diff = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(
            resasc > 0, resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5), diff
        )
    floor = 50.0 * _EPS * resabs
    return kron, np.maximum(scaled, floor), floor


def integrate(
    func: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-14,
    max_subdivisions: int = 200,
    reference: Sequence[int] | None = None,
) -> IntegralResult:
    """Integrate ``func`` over [breakpoints[0], breakpoints[-1]].

    ``func`` maps a 1-D array of nodes to an array of shape ``(m, n)`` (or
    ``(n,)`` for a scalar integrand). Component ``j`` converges when its error
    is below ``max(abs_tol, rel_tol * |I[reference[j]]|)``; by default each
    component is its own reference. ``max_subdivisions`` caps the number of
    panel bisections beyond the initial partition.
    """
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    if bp.size < 2:
        raise InvalidParameter("need at least two distinct breakpoints")
    a, b = bp[:-1], bp[1:]
    est, err, floor = _apply_rule(func, a, b)
    m = est.shape[0]
    ref = np.arange(m) if reference is None else np.asarray(reference, dtype=int)
    n_evals = 21 * a.size
    bisections = 0

    while True:
        total = est.sum(axis=1)
        target = np.maximum(abs_tol, rel_tol * np.abs(total[ref]))
        tot_err = err.sum(axis=1)
        if np.all(tot_err <= target):
            return IntegralResult(total, tot_err, a.size, n_evals)

        # panels whose error is already at the round-off floor cannot improve
        width_ok = (b - a) > 64 * _EPS * np.maximum(np.abs(a), np.abs(b))
        improvable = np.any(err > floor * 1.0000001, axis=0) & width_ok
        ratio = np.max(err / target[:, None], axis=0)
        ratio = np.where(improvable, ratio, 0.0)
        if not np.any(ratio > 0):
            return IntegralResult(total, tot_err, a.size, n_evals, roundoff_limited=True)
        if bisections >= max_subdivisions:
            raise QuadratureFailure(
                f"no convergence after {bisections} bisections "
                f"(error {tot_err.max():.3g} > target {target.min():.3g})",
                value=total,
                error=tot_err,
            )

        # bisect the worst panels until the untouched ones fit in half the budget
        order = np.argsort(-ratio, kind="stable")
        excess = np.max(tot_err / target) - 0.5
        cum = np.cumsum(ratio[order])
        n_split = int(np.searchsorted(cum, excess) + 1)
        n_split = max(1, min(n_split, int(np.count_nonzero(ratio > 0)), max_subdivisions - bisections))
        chosen = np.sort(order[:n_split])
        bisections += n_split

        mid = 0.5 * (a[chosen] + b[chosen])
        na = np.concatenate([a[chosen], mid])
        nb = np.concatenate([mid, b[chosen]])
        e2, r2, f2 = _apply_rule(func, na, nb)
        n_evals += 21 * na.size

        keep = np.ones(a.size, dtype=bool)
        keep[chosen] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        est = np.concatenate([est[:, keep], e2], axis=1)
        err = np.concatenate([err[:, keep], r2], axis=1)
        floor = np.concatenate([floor[:, keep], f2], axis=1)
        srt = np.argsort(a, kind="stable")
        a, b = a[srt], b[srt]
        est, err, floor = est[:, srt], err[:, srt], floor[:, srt]


def geometric_breakpoints(
    features: Sequence[float], lo: float, hi: float, step: float, ratio: float = 2.0
) -> np.ndarray:
    """Breakpoints at ``features`` and at ``feature +/- step * ratio**k`` inside [lo, hi].

    Points crowding each other far from every feature are thinned so heavy-tailed
    domains stay at a few dozen panels.
    """
    feats = np.asarray([f for f in features if lo < f < hi], dtype=float)
    span = max(hi - lo, step)
    kmax = int(np.ceil(np.log(span / step) / np.log(ratio))) + 1
    offsets = step * ratio ** np.arange(kmax + 1)
    pts = [np.array([lo, hi]), feats]
    for f in feats:
        pts.append(f + offsets)
        pts.append(f - offsets)
    if feats.size == 0:
        c = 0.5 * (lo + hi)
        pts.append(np.array([c]))
    allp = np.unique(np.clip(np.concatenate(pts), lo, hi))

    ref = feats if feats.size else np.array([0.5 * (lo + hi)])
    dist = np.min(np.abs(allp[:, None] - ref[None, :]), axis=1)
    spacing = np.maximum(0.5 * step, 0.25 * dist)
    kept = [allp[0]]
    for p, sp in zip(allp[1:-1], spacing[1:-1]):
        if p - kept[-1] >= sp or np.any(p == feats):
            kept.append(p)
    if allp[-1] > kept[-1]:
        kept.append(allp[-1])
    return np.asarray(kept)
