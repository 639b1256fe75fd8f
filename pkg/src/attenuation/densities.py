"""One-dimensional densities used as priors and noise terms.

Every family is implemented in standard form (location 0, scale 1) as
vectorised numpy functions; :func:`make_density` wraps a standard form into a
:class:`Density` with location and scale applied. Densities are immutable and
all of their callables are pure.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import InvalidParameter, ParseError, QuadratureFailure
from .grids import CheckResult, GridSpec, as_points
from .quadrature import QuadratureConfig, geometric_breakpoints, integrate

Array = np.ndarray
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


class Family(str, enum.Enum):
    NORMAL = "normal"
    LOGISTIC = "logistic"
    DOUBLE_EXPONENTIAL = "doubleexponential"
    STUDENT_T = "studentt"
    CAUCHY = "cauchy"
    DOUBLE_PARETO = "doublepareto"
    SMOOTHED_UNIFORM = "smootheduniform"
    CAUCHY_UNIFORM = "cauchyuniform"


_ALIASES = {
    "gaussian": Family.NORMAL,
    "laplace": Family.DOUBLE_EXPONENTIAL,
    "t": Family.STUDENT_T,
    "necessity": Family.SMOOTHED_UNIFORM,
}

# number of shape parameters per family, and defaults when omitted
_SHAPE_ARITY = {
    Family.STUDENT_T: 1,
    Family.DOUBLE_PARETO: 1,
    Family.SMOOTHED_UNIFORM: 2,
    Family.CAUCHY_UNIFORM: 1,
}
_SHAPE_DEFAULTS = {
    Family.STUDENT_T: (3.0,),
    Family.DOUBLE_PARETO: (2.0,),
    Family.SMOOTHED_UNIFORM: (1.0, 10.0),
    Family.CAUCHY_UNIFORM: (1.0,),
}


def _fmt(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


@dataclass(frozen=True)
class DensitySpec:
    """Parametric description of a density.

    ``shape`` is ``(nu,)`` for Student-t, ``(alpha,)`` for double Pareto,
    ``(delta, d)`` for the smoothed uniform and ``(half_width,)`` for the
    Cauchy-plus-uniform convolution.
    """

    family: Family
    location: float = 0.0
    scale: float = 1.0
    shape: tuple[float, ...] | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "scale", float(self.scale))
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise InvalidParameter(f"scale must be positive, got {self.scale}")
        if not math.isfinite(self.location):
            raise InvalidParameter("location must be finite")
        arity = _SHAPE_ARITY.get(family, 0)
        shape = self.shape
        if shape is not None:
            shape = tuple(float(v) for v in np.atleast_1d(shape))
            if len(shape) == 0:
                shape = None
        if arity == 0:
            if shape is not None:
                raise InvalidParameter(f"{family.value} takes no shape parameter")
        else:
            if shape is None:
                shape = _SHAPE_DEFAULTS[family]
            if len(shape) != arity:
                raise InvalidParameter(f"{family.value} takes {arity} shape parameter(s), got {len(shape)}")
            if not all(v > 0 and math.isfinite(v) for v in shape):
                raise InvalidParameter(f"shape parameters must be positive, got {shape}")
        object.__setattr__(self, "shape", shape)

    def canonical(self) -> str:
        parts = [_fmt(self.location), _fmt(self.scale)]
        if self.shape:
            parts.extend(_fmt(v) for v in self.shape)
        return f"{self.family.value}({','.join(parts)})"

    def __str__(self) -> str:
        return self.canonical()


_SPEC_RE = re.compile(r"^\s*([A-Za-z_]+)\s*\(([^()]*)\)\s*$")


def parse_density_spec(text: str) -> DensitySpec:
    """Parse ``family(location, scale[, shape...])``, e.g. ``studentt(0,1,3)``."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ParseError(f"malformed density spec {text!r}; expected family(location, scale[, shape])")
    name = m.group(1).lower().replace("_", "")
    try:
        family = _ALIASES.get(name) or Family(name)
    except ValueError:
        known = ", ".join(f.value for f in Family)
        raise ParseError(f"unknown density family {m.group(1)!r} (known: {known})") from None
    try:
        args = [float(a) for a in m.group(2).split(",") if a.strip()]
    except ValueError:
        raise ParseError(f"non-numeric argument in {text!r}") from None
    if len(args) < 2:
        raise ParseError(f"{text!r}: need at least location and scale")
    shape = tuple(args[2:]) or None
    try:
        return DensitySpec(family, args[0], args[1], shape)
    except InvalidParameter as exc:
        raise ParseError(f"{text!r}: {exc}") from None


@dataclass(frozen=True, eq=False)
class Density:
    """An evaluable density with declared structural properties.

    ``logpdf``/``cdf``/``ppf``/``dlogpdf`` accept numpy arrays. ``features``
    lists points where the density has kinks or fast transitions (used as
    quadrature breakpoints); ``fine_scale`` is the smallest length scale over
    which the density changes appreciably.
    """

    name: str
    logpdf: Callable[[Array], Array]
    cdf: Callable[[Array], Array]
    center: float
    has_finite_first_moment: bool
    ppf: Callable[[Array], Array] | None = None
    dlogpdf: Callable[[Array], Array] | None = None
    log_concave: bool = False
    quasi_concave: bool = True
    features: tuple[float, ...] = ()
    fine_scale: float = 1.0
    spec: DensitySpec | None = None
    notes: tuple[str, ...] = ()
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def pdf(self, x) -> Array:
        return np.exp(self.logpdf(np.asarray(x, dtype=float)))

    @property
    def admissible_as_noise(self) -> bool:
        return self.center == 0.0 and self.has_finite_first_moment

    def quantile(self, q) -> Array:
        q = np.asarray(q, dtype=float)
        if self.ppf is not None:
            return self.ppf(q)
        return invert_cdf(self.cdf, q, self.center, self.fine_scale)

    def support(self, tail_mass: float = 1e-12) -> tuple[float, float]:
        """Interval outside which each tail holds less than ``tail_mass``.

        The lower quantile is computed directly (the left tail of every cdf is
        accurate) and mirrored through the symmetry center.
        """
        key = ("support", tail_mass)
        if key not in self._memo:
            lo = float(self.quantile(np.array([tail_mass]))[0])
            self._memo[key] = (lo, 2.0 * self.center - lo)
        return self._memo[key]

    def spread(self) -> float:
        """Half the interquartile range."""
        if "spread" not in self._memo:
            self._memo["spread"] = 0.5 * float(np.diff(self.quantile(np.array([0.25, 0.75])))[0])
        return self._memo["spread"]

    def check_grid(self, n: int = 2048, tail_mass: float = 1e-12) -> GridSpec:
        """Composite grid over the effective support, linear near the mode."""
        lo, hi = self.support(tail_mass)
        inner = min(4.0 * self.spread(), 0.5 * (hi - lo))
        return GridSpec(lo, hi, n, "composite", center=self.center, inner=inner)

    def __repr__(self) -> str:
        return f"Density({self.name})"


def invert_cdf(cdf, q: Array, start: float = 0.0, width: float = 1.0, iters: int = 200) -> Array:
    """Vectorised bisection for ``cdf(x) = q``, expanding the bracket as needed."""
    q = np.asarray(q, dtype=float)
    lo = np.full(q.shape, start - width)
    hi = np.full(q.shape, start + width)
    for _ in range(2000):
        bad = cdf(lo) > q
        if not bad.any():
            break
        lo = np.where(bad, start - 2.0 * (start - lo), lo)
    for _ in range(2000):
        bad = cdf(hi) < q
        if not bad.any():
            break
        hi = np.where(bad, start + 2.0 * (hi - start), hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# standard forms


@dataclass(frozen=True)
class _Standard:
    logpdf: Callable[[Array], Array]
    dlogpdf: Callable[[Array], Array]
    cdf: Callable[[Array], Array]
    ppf: Callable[[Array], Array] | None
    finite_mean: bool
    log_concave: bool
    features: tuple[float, ...] = (0.0,)
    fine_scale: float = 1.0
    notes: tuple[str, ...] = ()


def _normal() -> _Standard:
    return _Standard(
        logpdf=lambda z: -0.5 * z * z - _LOG_SQRT_2PI,
        dlogpdf=lambda z: -z,
        cdf=special.ndtr,
        ppf=special.ndtri,
        finite_mean=True,
        log_concave=True,
    )


def _logistic() -> _Standard:
    def logpdf(z):
        a = np.abs(z)
        return -a - 2.0 * np.log1p(np.exp(-a))

    return _Standard(
        logpdf=logpdf,
        dlogpdf=lambda z: -np.tanh(0.5 * z),
        cdf=special.expit,
        ppf=special.logit,
        finite_mean=True,
        log_concave=True,
    )


def _double_exponential() -> _Standard:
    def cdf(z):
        z = np.asarray(z, dtype=float)
        return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))

    def ppf(q):
        q = np.asarray(q, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(q < 0.5, np.log(2.0 * q), -np.log(2.0 * (1.0 - q)))

    return _Standard(
        logpdf=lambda z: -np.abs(z) - math.log(2.0),
        dlogpdf=lambda z: -np.sign(z),
        cdf=cdf,
        ppf=ppf,
        finite_mean=True,
        log_concave=True,
    )


def _student_t(nu: float) -> _Standard:
    const = special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu) - 0.5 * math.log(nu * math.pi)
    return _Standard(
        logpdf=lambda z: const - 0.5 * (nu + 1) * np.log1p(z * z / nu),
        dlogpdf=lambda z: -(nu + 1) * z / (nu + z * z),
        cdf=lambda z: special.stdtr(nu, z),
        ppf=lambda q: special.stdtrit(nu, q),
        finite_mean=nu > 1,
        log_concave=False,
    )


def _cauchy() -> _Standard:
    return _Standard(
        logpdf=lambda z: -math.log(math.pi) - np.log1p(z * z),
        dlogpdf=lambda z: -2.0 * z / (1.0 + z * z),
        # atan2 form keeps full relative precision in the left tail
        cdf=lambda z: np.arctan2(1.0, -np.asarray(z, dtype=float)) / math.pi,
        ppf=lambda q: -1.0 / np.tan(math.pi * np.asarray(q, dtype=float)),
        finite_mean=False,
        log_concave=False,
    )


def _double_pareto(alpha: float) -> _Standard:
    # |z|^(-alpha-1) tails for |z| >= 1, C1 quadratic cap A - B z^2 on [-1, 1]
    cap_b = 0.5 * (alpha + 1.0)
    cap_a = 1.0 + cap_b
    k = 1.0 / (2.0 * (cap_a - cap_b / 3.0) + 2.0 / alpha)
    log_k = math.log(k)
    tail_mass = k / alpha

    def logpdf(z):
        a = np.abs(np.asarray(z, dtype=float))
        with np.errstate(divide="ignore"):
            tail = log_k - (alpha + 1.0) * np.log(np.maximum(a, 1.0))
        cap = log_k + np.log(cap_a - cap_b * np.minimum(a, 1.0) ** 2)
        return np.where(a >= 1.0, tail, cap)

    def dlogpdf(z):
        z = np.asarray(z, dtype=float)
        a = np.abs(z)
        inner = -2.0 * cap_b * z / (cap_a - cap_b * np.minimum(a, 1.0) ** 2)
        outer = -(alpha + 1.0) / np.where(a >= 1.0, z, 1.0)
        return np.where(a >= 1.0, outer, inner)

    def left_cdf(z):
        # valid for z <= 0
        a = -z
        tail = k * np.maximum(a, 1.0) ** (-alpha) / alpha
        zc = np.clip(z, -1.0, 0.0)
        cap = tail_mass + k * (cap_a * (zc + 1.0) - cap_b * (zc ** 3 + 1.0) / 3.0)
        return np.where(a >= 1.0, tail, cap)

    def cdf(z):
        z = np.asarray(z, dtype=float)
        return np.where(z <= 0, left_cdf(np.minimum(z, 0.0)), 1.0 - left_cdf(-np.maximum(z, 0.0)))

    def ppf(q):
        q = np.asarray(q, dtype=float)
        qq = np.minimum(q, 1.0 - q)
        tail = -(qq * alpha / k) ** (-1.0 / alpha)
        # the cap mass rounds to just under 1/2, so clip to keep the bracket at z <= 0
        peak = float(left_cdf(np.array(0.0)))
        cap = invert_cdf(left_cdf, np.clip(qq, tail_mass, peak), -0.5, 0.5)
        left = np.where(qq <= tail_mass, tail, cap)
        return np.where(q <= 0.5, left, -left)

    return _Standard(
        logpdf=logpdf,
        dlogpdf=dlogpdf,
        cdf=cdf,
        ppf=ppf,
        finite_mean=alpha > 1,
        log_concave=False,
        features=(-1.0, 0.0, 1.0),
        notes=("power tails spliced to a C1 quadratic cap on [-1, 1] (standardised units)",),
    )


def smoothed_uniform_log_level(delta: float, d: float) -> float:
    """Closed-form log normaliser: flat mass 2*delta plus two half-Gaussian tails."""
    return -math.log(2.0 * delta + math.sqrt(math.pi / d))


def _smoothed_uniform(delta: float, d: float) -> _Standard:
    c = smoothed_uniform_log_level(delta, d)
    sqd = math.sqrt(d)
    half_tail = math.exp(c) * 0.5 * math.sqrt(math.pi / d)

    def logpdf(z):
        over = np.maximum(np.abs(z) - delta, 0.0)
        return c - d * over * over

    def dlogpdf(z):
        z = np.asarray(z, dtype=float)
        over = np.maximum(np.abs(z) - delta, 0.0)
        return -2.0 * d * over * np.sign(z)

    def left_cdf(z):
        # valid for z <= 0
        tail = half_tail * special.erfc(sqd * np.maximum(-z - delta, 0.0))
        flat = half_tail + math.exp(c) * (np.maximum(z, -delta) + delta)
        return np.where(z < -delta, tail, flat)

    def cdf(z):
        z = np.asarray(z, dtype=float)
        return np.where(z <= 0, left_cdf(np.minimum(z, 0.0)), 1.0 - left_cdf(-np.maximum(z, 0.0)))

    def ppf(q):
        q = np.asarray(q, dtype=float)
        qq = np.minimum(q, 1.0 - q)
        tail = -delta - special.erfcinv(np.minimum(qq / half_tail, 1.0)) / sqd
        flat = -delta + (qq - half_tail) / math.exp(c)
        left = np.where(qq < half_tail, tail, flat)
        return np.where(q <= 0.5, left, -left)

    return _Standard(
        logpdf=logpdf,
        dlogpdf=dlogpdf,
        cdf=cdf,
        ppf=ppf,
        finite_mean=True,
        log_concave=True,
        features=(-delta, 0.0, delta),
        fine_scale=min(delta, 1.0 / sqd),
    )


def _cauchy_uniform(w: float) -> _Standard:
    # density of Cauchy + U[-w, w]: (atan(z + w) - atan(z - w)) / (2 pi w)
    log_norm = math.log(2.0 * math.pi * w)

    def arc(z):
        return np.arctan2(2.0 * w, 1.0 + z * z - w * w)

    def dlogpdf(z):
        z = np.asarray(z, dtype=float)
        num = -4.0 * z * w / ((1.0 + (z + w) ** 2) * (1.0 + (z - w) ** 2))
        return num / arc(z)

    def cdf(z):
        z = np.asarray(z, dtype=float)
        t = z[..., None] + w * _GL_NODES
        fc = np.arctan2(1.0, -t) / math.pi
        return 0.5 * np.sum(fc * _GL_WEIGHTS, axis=-1)

    return _Standard(
        logpdf=lambda z: np.log(arc(np.asarray(z, dtype=float))) - log_norm,
        dlogpdf=dlogpdf,
        cdf=cdf,
        ppf=None,
        finite_mean=False,
        log_concave=False,
        fine_scale=min(1.0, w),
    )


def _standard_form(spec: DensitySpec) -> _Standard:
    f = spec.family
    if f is Family.NORMAL:
        return _normal()
    if f is Family.LOGISTIC:
        return _logistic()
    if f is Family.DOUBLE_EXPONENTIAL:
        return _double_exponential()
    if f is Family.STUDENT_T:
        return _student_t(spec.shape[0])
    if f is Family.CAUCHY:
        return _cauchy()
    if f is Family.DOUBLE_PARETO:
        return _double_pareto(spec.shape[0])
    if f is Family.SMOOTHED_UNIFORM:
        return _smoothed_uniform(*spec.shape)
    if f is Family.CAUCHY_UNIFORM:
        return _cauchy_uniform(spec.shape[0])
    raise InvalidParameter(f"unsupported family {f}")


def make_density(spec: DensitySpec | str) -> Density:
    """Build an evaluable :class:`Density` from a spec or its canonical string."""
    if isinstance(spec, str):
        spec = parse_density_spec(spec)
    std = _standard_form(spec)
    loc, sc = spec.location, spec.scale
    log_sc = math.log(sc)

    def logpdf(x):
        return std.logpdf((np.asarray(x, dtype=float) - loc) / sc) - log_sc

    def dlogpdf(x):
        return std.dlogpdf((np.asarray(x, dtype=float) - loc) / sc) / sc

    def cdf(x):
        return std.cdf((np.asarray(x, dtype=float) - loc) / sc)

    if std.ppf is not None:
        def ppf(q):
            return loc + sc * std.ppf(np.asarray(q, dtype=float))
    else:
        def ppf(q):
            z = invert_cdf(std.cdf, np.asarray(q, dtype=float), 0.0, std.fine_scale)
            return loc + sc * z

    return Density(
        name=spec.canonical(),
        logpdf=logpdf,
        cdf=cdf,
        ppf=ppf,
        dlogpdf=dlogpdf,
        center=loc,
        has_finite_first_moment=std.finite_mean,
        log_concave=std.log_concave,
        quasi_concave=True,
        features=tuple(loc + sc * f for f in std.features),
        fine_scale=sc * std.fine_scale,
        spec=spec,
        notes=std.notes,
    )


def scale_density(d: Density, k: float) -> Density:
    """Density of ``k * eps`` when ``eps`` has density ``d``."""
    if not (k > 0 and math.isfinite(k)):
        raise InvalidParameter(f"scale factor must be positive, got {k}")
    if d.spec is not None:
        s = d.spec
        return make_density(DensitySpec(s.family, s.location * k, s.scale * k, s.shape))
    log_k = math.log(k)
    base = d

    def ppf(q):
        return k * base.quantile(q)

    return dataclasses.replace(
        d,
        name=f"{k:g}*{d.name}",
        logpdf=lambda x: base.logpdf(np.asarray(x, dtype=float) / k) - log_k,
        cdf=lambda x: base.cdf(np.asarray(x, dtype=float) / k),
        ppf=ppf,
        dlogpdf=None if d.dlogpdf is None else (lambda x: base.dlogpdf(np.asarray(x, dtype=float) / k) / k),
        center=d.center * k,
        features=tuple(k * f for f in d.features),
        fine_scale=d.fine_scale * k,
    )


def recenter(d: Density) -> Density:
    """The same density translated so its symmetry center is 0."""
    if d.center == 0.0:
        return d
    if d.spec is not None:
        s = d.spec
        return make_density(DensitySpec(s.family, 0.0, s.scale, s.shape))
    c = d.center
    base = d
    return dataclasses.replace(
        d,
        name=f"{d.name}-{c:g}",
        logpdf=lambda x: base.logpdf(np.asarray(x, dtype=float) + c),
        cdf=lambda x: base.cdf(np.asarray(x, dtype=float) + c),
        ppf=lambda q: base.quantile(q) - c,
        dlogpdf=None if d.dlogpdf is None else (lambda x: base.dlogpdf(np.asarray(x, dtype=float) + c)),
        center=0.0,
        features=tuple(f - c for f in d.features),
    )


def make_necessity_prior(delta: float, d: float, quad: QuadratureConfig | None = None,
                         center: float = 0.0) -> Density:
    """Log-concave prior flat on [-delta, delta] with Gaussian log-tails of rate ``d``.

    The log-level is solved in closed form; the result is then checked by
    quadrature and :class:`QuadratureFailure` is raised if it does not
    integrate to one.
    """
    if not (delta > 0 and d > 0):
        raise InvalidParameter(f"necessity prior needs delta > 0 and d > 0, got {delta}, {d}")
    quad = quad or QuadratureConfig()
    dens = make_density(DensitySpec(Family.SMOOTHED_UNIFORM, center, 1.0, (delta, d)))
    total = normalization(dens, quad)
    if abs(total - 1.0) > max(10 * quad.rel_tol, 1e-9):
        raise QuadratureFailure(f"necessity prior integrates to {total!r}")
    return dens


def normalization(d: Density, quad: QuadratureConfig | None = None) -> float:
    """Quadrature of the pdf over the truncated support."""
    quad = quad or QuadratureConfig()
    lo, hi = d.support(quad.tail_mass)
    bps = geometric_breakpoints(list(d.features) + [d.center], lo, hi, d.fine_scale)
    res = integrate(d.pdf, bps, quad.rel_tol, quad.abs_tol, quad.max_subdivisions)
    return float(res.value[0])


def mixture(components: Sequence[Density], weights: Sequence[float], center: float = 0.0,
            name: str | None = None) -> Density:
    """Finite mixture; structural flags are *not* guaranteed and must be checked."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    logw = np.log(w)
    comps = list(components)

    def logpdf(x):
        x = np.asarray(x, dtype=float)
        return special.logsumexp(np.stack([lw + c.logpdf(x) for lw, c in zip(logw, comps)]), axis=0)

    def cdf(x):
        return sum(wi * c.cdf(x) for wi, c in zip(w, comps))

    return Density(
        name=name or "mixture(" + ",".join(c.name for c in comps) + ")",
        logpdf=logpdf,
        cdf=cdf,
        center=center,
        has_finite_first_moment=all(c.has_finite_first_moment for c in comps),
        log_concave=False,
        quasi_concave=False,
        features=tuple(f for c in comps for f in c.features),
        fine_scale=min(c.fine_scale for c in comps),
    )


# ---------------------------------------------------------------------------
# structural checks


def _grid_for(d: Density, grid) -> np.ndarray:
    if grid is None:
        grid = d.check_grid()
    return np.sort(as_points(grid))


def check_symmetry(d: Density, grid: GridSpec | None = None, tol: float = 1e-7,
                   floor: float = 1e-300) -> CheckResult:
    """Relative asymmetry ``|f(c+t) - f(c-t)| / max(f(c+t), floor)`` over the grid."""
    x = _grid_for(d, grid)
    t = np.unique(np.abs(x - d.center))
    up = d.pdf(d.center + t)
    down = d.pdf(d.center - t)
    rel = np.abs(up - down) / np.maximum(up, floor)
    i = int(np.argmax(rel))
    worst = float(rel[i])
    return CheckResult(
        name="symmetry",
        passed=bool(worst <= tol),
        witness=float(d.center + t[i]),
        magnitude=worst,
    )


def check_quasiconcave(d: Density, grid: GridSpec | None = None, tol: float = 1e-7) -> CheckResult:
    """The pdf must rise then fall along the grid, up to ``tol`` times its peak."""
    x = _grid_for(d, grid)
    p = d.pdf(x)
    slack = tol * float(np.max(p))
    steps = np.diff(p)
    mode = int(np.argmax(p))
    bad_rise = np.nonzero(steps[:mode] < -slack)[0]
    bad_fall = np.nonzero(steps[mode:] > slack)[0] + mode
    bad = np.sort(np.concatenate([bad_rise, bad_fall]))
    if bad.size == 0:
        return CheckResult("quasi-concavity", True, witness=float(x[mode]), magnitude=0.0)
    i = int(bad[0])
    j = min(max(i, 1), x.size - 2)
    triple = (float(x[j - 1]), float(x[j]), float(x[j + 1]))
    return CheckResult(
        name="quasi-concavity",
        passed=False,
        witness=triple,
        magnitude=float(np.max(np.abs(steps[bad])) / np.max(p)),
        details={"mode": float(x[mode]), "violations": int(bad.size)},
    )


def _slope_increments(x: np.ndarray, y: np.ndarray):
    slope = np.diff(y) / np.diff(x)
    inc = np.diff(slope)
    scale = np.maximum(1.0, np.maximum(np.abs(slope[:-1]), np.abs(slope[1:])))
    return slope, inc, scale


def check_logconcave(d: Density, grid: GridSpec | None = None, tol: float = 1e-7) -> CheckResult:
    """Divided second differences of the log-pdf must be <= tol (relative).

    ``strict`` reports whether every increment is strictly negative beyond
    ``tol``, i.e. the log-pdf has no flat or linear stretch on the grid.
    """
    x = _grid_for(d, grid)
    x = x[np.concatenate([[True], np.diff(x) > 0])]
    y = d.logpdf(x)
    finite = np.isfinite(y)
    x, y = x[finite], y[finite]
    slope, inc, scale = _slope_increments(x, y)
    rel = inc / scale
    i = int(np.argmax(rel))
    worst = float(rel[i])
    passed = worst <= tol
    strict = bool(passed and np.all(rel < -tol))
    return CheckResult(
        name="log-concavity",
        passed=bool(passed),
        witness=float(x[i + 1]),
        magnitude=max(worst, 0.0),
        strict=strict,
    )


def check_log_exp_concave(d: Density, grid: GridSpec | None = None, tol: float = 1e-7,
                          n: int = 2048, tail_mass: float = 1e-12) -> CheckResult:
    """Concavity of ``u -> log f(exp(u))`` over the positive half.

    The default grid is uniform in ``u`` between the logs of the
    ``1/2 + 1e-6`` and ``1 - tail_mass`` quantiles (measured from the center).
    """
    if grid is None:
        q = d.quantile(np.array([tail_mass, 0.5 - 1e-6]))
        lo = max(d.center - float(q[1]), 1e-300)
        hi = d.center - float(q[0])
        u = np.linspace(math.log(lo), math.log(hi), n)
    else:
        u = np.sort(as_points(grid))
    y = d.logpdf(d.center + np.exp(u))
    slope, inc, scale = _slope_increments(u, y)
    rel = inc / scale
    i = int(np.argmax(rel))
    worst = float(rel[i])
    return CheckResult(
        name="log-exp-concavity",
        passed=bool(worst <= tol),
        witness=float(math.exp(u[i + 1])),
        magnitude=max(worst, 0.0),
    )


def admissibility(d: Density, grid: GridSpec | None = None, tol: float = 1e-7) -> dict[str, CheckResult]:
    """Symmetry and quasi-concavity results keyed by check name."""
    return {
        "symmetry": check_symmetry(d, grid, tol),
        "quasi-concavity": check_quasiconcave(d, grid, tol),
    }


__all__ = [
    "Density",
    "DensitySpec",
    "Family",
    "admissibility",
    "check_log_exp_concave",
    "check_logconcave",
    "check_quasiconcave",
    "check_symmetry",
    "invert_cdf",
    "make_density",
    "make_necessity_prior",
    "mixture",
    "normalization",
    "parse_density_spec",
    "recenter",
    "scale_density",
    "smoothed_uniform_log_level",
]
