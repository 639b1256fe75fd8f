"""Posterior densities and posterior means for location experiments ``S = X + eps``."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .densities import Density, check_quasiconcave, check_symmetry, recenter
from .errors import DegenerateSignal, InadmissibleDensity, QuadratureFailure
from .grids import GridSpec, as_points
from .quadrature import QuadratureConfig, geometric_breakpoints, integrate

log = logging.getLogger(__name__)

# marginal likelihoods below this are reported as degenerate
Z_UNDERFLOW = 1e-280
_LOG_Z_UNDERFLOW = math.log(Z_UNDERFLOW)


@dataclass(frozen=True)
class LocationExperiment:
    """Prior ``f_X`` and noise ``f_eps`` for ``S = X + eps``.

    ``believed_noise`` replaces the noise in the conditioning step only,
    modelling an agent who updates as if ``S = X + eps_i``.
    """

    prior: Density
    noise: Density
    believed_noise: Density | None = None
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if not self.validate:
            return
        for role, d in (("noise", self.noise), ("believed noise", self.believed_noise)):
            if d is None:
                continue
            if d.center != 0.0:
                raise InadmissibleDensity(f"{role} {d.name} must be centered at 0")
            _require_shape(d, role)
        _require_shape(self.prior, "prior")

    @property
    def conditioning_noise(self) -> Density:
        return self.believed_noise if self.believed_noise is not None else self.noise

    @property
    def prior_mean(self) -> float:
        return self.prior.center

    @property
    def outside_assumptions(self) -> bool:
        """True when some density lacks a finite first moment."""
        dens = [self.prior, self.noise] + ([self.believed_noise] if self.believed_noise else [])
        return not all(d.has_finite_first_moment for d in dens)

    def with_believed(self, believed: Density | None) -> "LocationExperiment":
        return LocationExperiment(self.prior, self.noise, believed, validate=False)

    def swapped(self) -> "LocationExperiment":
        """Noise as prior and centered prior as noise; see :func:`swap_residual`."""
        return LocationExperiment(self.conditioning_noise, recenter(self.prior), validate=False)

    def describe(self) -> str:
        out = f"prior={self.prior.name} noise={self.noise.name}"
        if self.believed_noise is not None:
            out += f" believed={self.believed_noise.name}"
        return out


def _require_shape(d: Density, role: str):
    sym = check_symmetry(d)
    if not sym.passed:
        raise InadmissibleDensity(f"{role} {d.name} is not symmetric (worst at {sym.witness})")
    qc = check_quasiconcave(d)
    if not qc.passed:
        raise InadmissibleDensity(f"{role} {d.name} is not quasi-concave (near {qc.witness})")


@dataclass(frozen=True)
class PosteriorMoments:
    s: float
    mean: float
    log_z: float
    error: float
    n_evals: int

    @property
    def z(self) -> float:
        return math.exp(self.log_z) if self.log_z > -745 else 0.0


def _breakpoints(prior: Density, noise: Density, s: float, quad: QuadratureConfig) -> np.ndarray:
    plo, phi = prior.support(quad.tail_mass)
    nlo, nhi = noise.support(quad.tail_mass)
    lo, hi = min(plo, s - nhi), max(phi, s - nlo)
    feats = [prior.center, *prior.features, s - noise.center, *(s - f for f in noise.features)]
    return geometric_breakpoints(feats, lo, hi, min(prior.fine_scale, noise.fine_scale))


def _log_shift(prior: Density, noise: Density, s: float, bps: np.ndarray) -> float:
    a, b = sorted((prior.center, s - noise.center))
    probe = np.concatenate([bps, np.linspace(a, b, 65)])
    vals = prior.logpdf(probe) + noise.logpdf(s - probe)
    return float(np.max(vals[np.isfinite(vals)]))


def posterior_moments(exp: LocationExperiment, s: float, quad: QuadratureConfig | None = None) -> PosteriorMoments:
    """Normaliser and mean of the posterior given ``S = s`` (conditioning noise)."""
    quad = quad or QuadratureConfig()
    prior, noise = exp.prior, exp.conditioning_noise
    s = float(s)
    bps = _breakpoints(prior, noise, s, quad)
    shift = _log_shift(prior, noise, s, bps)
    c = prior.center

    def integrand(x):
        w = np.exp(prior.logpdf(x) + noise.logpdf(s - x) - shift)
        dx = x - c
        return np.stack([w, dx * w, np.abs(dx) * w])

    res = integrate(integrand, bps, quad.rel_tol, quad.abs_tol, quad.max_subdivisions, reference=[0, 2, 2])
    i0, i1, _ = res.value
    if not i0 > 0:
        raise DegenerateSignal(s, -math.inf)
    log_z = shift + math.log(i0)
    if log_z < _LOG_Z_UNDERFLOW:
        raise DegenerateSignal(s, log_z)
    mean = c + i1 / i0
    err = res.error[1] / i0 + abs(i1) * res.error[0] / i0 ** 2
    return PosteriorMoments(s, float(mean), float(log_z), float(err), res.n_evals)


def posterior_mean(exp: LocationExperiment, s: float, quad: QuadratureConfig | None = None) -> float:
    """``E[X | S = s]`` by adaptive quadrature, using the believed noise if set."""
    return posterior_moments(exp, s, quad).mean


def posterior_means(exp: LocationExperiment, signals, quad: QuadratureConfig | None = None) -> np.ndarray:
    """Elementwise :func:`posterior_mean`; errors propagate."""
    quad = quad or QuadratureConfig()
    return np.array([posterior_moments(exp, s, quad).mean for s in np.ravel(signals)]).reshape(np.shape(signals))


def posterior_logpdf(exp: LocationExperiment, s: float, x, quad: QuadratureConfig | None = None,
                     log_z: float | None = None) -> np.ndarray:
    """Log posterior density of ``X`` at ``x`` given ``S = s``."""
    if log_z is None:
        log_z = posterior_moments(exp, s, quad).log_z
    x = np.asarray(x, dtype=float)
    return exp.prior.logpdf(x) + exp.conditioning_noise.logpdf(float(s) - x) - log_z


def posterior_pdf(exp: LocationExperiment, s: float, x, quad: QuadratureConfig | None = None) -> np.ndarray:
    """``f_X(x) f_eps(s - x) / Z(s)``."""
    return np.exp(posterior_logpdf(exp, s, x, quad))


def normal_normal_oracle(mu: float, sigma_x: float, sigma_eps: float, s):
    """Closed-form posterior mean for a normal prior and normal noise."""
    if not (sigma_x > 0 and sigma_eps > 0):
        raise ValueError("standard deviations must be positive")
    w = sigma_x ** 2 / (sigma_x ** 2 + sigma_eps ** 2)
    return w * np.asarray(s, dtype=float) + (1.0 - w) * mu


def swap_residual(exp: LocationExperiment, s: float, quad: QuadratureConfig | None = None) -> float:
    """``E_swap(s - mu) + E_orig(s) - s``, which vanishes by prior/noise duality.

    ``E_swap`` is the posterior mean of the noise when the noise is treated as
    the prior and the centered prior as the noise.
    """
    mu = exp.prior_mean
    orig = posterior_mean(exp, s, quad)
    swap = posterior_mean(exp.swapped(), s - mu, quad)
    return float((swap + (orig - mu)) - (s - mu))


@dataclass(frozen=True)
class SweepRow:
    s: float
    posterior_mean: float
    z: float
    status: str


SWEEP_COLUMNS = ("s", "posterior_mean", "Z", "status")


def posterior_mean_sweep(exp: LocationExperiment, s_grid: GridSpec | np.ndarray,
                         quad: QuadratureConfig | None = None) -> list[SweepRow]:
    """Posterior mean at each grid signal; failures become flagged rows."""
    quad = quad or QuadratureConfig()
    flag = "outside-assumptions" if exp.outside_assumptions else "ok"
    rows = []
    for s in as_points(s_grid):
        try:
            m = posterior_moments(exp, s, quad)
            rows.append(SweepRow(float(s), m.mean, m.z, flag))
        except DegenerateSignal as exc:
            log.warning("degenerate signal in sweep: %s", exc)
            rows.append(SweepRow(float(s), math.nan, 0.0, "degenerate"))
        except QuadratureFailure as exc:
            log.warning("quadrature failure in sweep at s=%g: %s", s, exc)
            rows.append(SweepRow(float(s), math.nan, math.nan, "quadrature-failure"))
    return rows


__all__ = [
    "LocationExperiment",
    "PosteriorMoments",
    "SWEEP_COLUMNS",
    "SweepRow",
    "normal_normal_oracle",
    "posterior_logpdf",
    "posterior_mean",
    "posterior_mean_sweep",
    "posterior_means",
    "posterior_moments",
    "posterior_pdf",
    "swap_residual",
]
