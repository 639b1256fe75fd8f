import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sp_integrate, stats

from attenuation.densities import (
    DensitySpec,
    Family,
    admissibility,
    check_log_exp_concave,
    check_logconcave,
    check_quasiconcave,
    check_symmetry,
    make_density,
    make_necessity_prior,
    mixture,
    normalization,
    parse_density_spec,
    recenter,
    scale_density,
    smoothed_uniform_log_level,
)
from attenuation.errors import InvalidParameter, ParseError
from attenuation.quadrature import QuadratureConfig

PRESETS = [
    "normal(0,1)", "logistic(0,1)", "doubleexponential(0,1)", "studentt(0,1,3)", "studentt(0,1,10)",
    "cauchy(0,1)", "doublepareto(0,1,1)", "doublepareto(0,1,2)", "smootheduniform(0,1,1,10)",
    "cauchyuniform(0,1,1)", "normal(0.7,2.5)", "logistic(-1,0.3)",
]

SCIPY = {
    "normal(0,1)": stats.norm(),
    "logistic(0,1)": stats.logistic(),
    "doubleexponential(0,1)": stats.laplace(),
    "studentt(0,1,3)": stats.t(3),
    "studentt(0,1,10)": stats.t(10),
    "cauchy(0,1)": stats.cauchy(),
    "normal(0.7,2.5)": stats.norm(0.7, 2.5),
    "logistic(-1,0.3)": stats.logistic(-1, 0.3),
}


def test_standard_normal_peak(D):
    assert D("normal(0,1)").pdf(0.0) == pytest.approx(0.3989422804, abs=1e-10)


@pytest.mark.parametrize("spec", sorted(SCIPY))
def test_against_scipy_distributions(D, spec):
    d, ref = D(spec), SCIPY[spec]
    x = np.linspace(-30, 30, 601)
    np.testing.assert_allclose(d.logpdf(x), ref.logpdf(x), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(d.cdf(x), ref.cdf(x), rtol=1e-10, atol=1e-15)
    q = np.array([1e-9, 0.01, 0.3, 0.5, 0.8, 0.999])
    np.testing.assert_allclose(d.quantile(q), ref.ppf(q), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("spec", PRESETS)
def test_normalization(D, spec):
    quad = QuadratureConfig()
    assert abs(normalization(D(spec), quad) - 1.0) <= 10 * quad.rel_tol + 2 * quad.tail_mass


@pytest.mark.parametrize("spec", PRESETS)
def test_presets_symmetric_and_quasiconcave(D, spec):
    checks = admissibility(D(spec))
    assert all(c.passed for c in checks.values()), checks


@pytest.mark.parametrize("spec", PRESETS)
def test_analytic_log_derivative_matches_finite_difference(D, spec):
    d = D(spec)
    x = np.array([-7.3, -2.2, -0.4, 0.3, 1.7, 5.1, 40.0]) * d.spread() + d.center
    h = 1e-6 * np.maximum(1.0, np.abs(x))
    fd = (d.logpdf(x + h) - d.logpdf(x - h)) / (2 * h)
    np.testing.assert_allclose(d.dlogpdf(x), fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("spec", PRESETS)
def test_cdf_is_integral_of_pdf(D, spec):
    d = D(spec)
    a, b = d.center - 0.8 * d.spread(), d.center + 2.3 * d.spread()
    mass = sp_integrate.quad(lambda t: float(d.pdf(np.array([t]))[0]), a, b, epsabs=0, epsrel=1e-12)[0]
    assert float(d.cdf(np.array([b]))[0] - d.cdf(np.array([a]))[0]) == pytest.approx(mass, rel=1e-9)


def test_first_moment_flags(D):
    assert not D("cauchy(0,1)").admissible_as_noise
    assert not D("cauchy(0,1)").has_finite_first_moment
    assert not D("studentt(0,1,1)").has_finite_first_moment
    assert not D("studentt(0,1,0.8)").admissible_as_noise
    assert not D("doublepareto(0,1,1)").has_finite_first_moment
    assert not D("cauchyuniform(0,1,1)").has_finite_first_moment
    assert D("studentt(0,1,3)").admissible_as_noise
    assert D("doublepareto(0,1,2)").admissible_as_noise
    # a shifted density is never admissible as noise
    assert not D("normal(1,1)").admissible_as_noise


@pytest.mark.parametrize("bad", [
    dict(family="normal", scale=0.0),
    dict(family="normal", scale=-1.0),
    dict(family="studentt", shape=(0.0,)),
    dict(family="doublepareto", shape=(-2.0,)),
    dict(family="smootheduniform", shape=(1.0,)),
    dict(family="normal", shape=(3.0,)),
    dict(family="normal", location=math.inf),
])
def test_invalid_parameters(bad):
    with pytest.raises(InvalidParameter):
        DensitySpec(**bad)


@pytest.mark.parametrize("text", ["", "normal", "normal(0)", "normal(a,b)", "weird(0,1)", "normal(0,-1)"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_density_spec(text)


def test_aliases_and_defaults():
    assert parse_density_spec("laplace(0,2)").family is Family.DOUBLE_EXPONENTIAL
    assert parse_density_spec("gaussian(1,2)").canonical() == "normal(1,2)"
    assert parse_density_spec("studentt(0,1)").shape == (3.0,)
    assert parse_density_spec(" StudentT( 0 , 1 , 3 ) ").canonical() == "studentt(0,1,3)"


@settings(max_examples=60, deadline=None)
@given(
    family=st.sampled_from(list(Family)),
    loc=st.floats(-50, 50, allow_nan=False),
    scale=st.floats(1e-3, 1e3),
    shape=st.floats(0.2, 30),
)
def test_canonical_string_round_trip(family, loc, scale, shape):
    arity = {Family.STUDENT_T: 1, Family.DOUBLE_PARETO: 1, Family.SMOOTHED_UNIFORM: 2,
             Family.CAUCHY_UNIFORM: 1}.get(family, 0)
    spec = DensitySpec(family, loc, scale, (shape,) * arity if arity else None)
    assert parse_density_spec(spec.canonical()) == spec


@settings(max_examples=50, deadline=None)
@given(spec=st.sampled_from(PRESETS), t=st.floats(0, 50))
def test_pdf_symmetric_about_center(spec, t):
    d = make_density(spec)
    up, down = d.pdf(d.center + t), d.pdf(d.center - t)
    assert up == pytest.approx(down, rel=1e-12, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(spec=st.sampled_from(PRESETS), q=st.floats(1e-10, 1 - 1e-10))
def test_quantile_inverts_cdf(spec, q):
    d = make_density(spec)
    x = d.quantile(np.array([q]))
    assert float(d.cdf(x)[0]) == pytest.approx(q, rel=1e-7, abs=1e-12)


# ------------------------------------------------------------ scaling


def test_scale_normal_is_wider_normal(D):
    x = np.linspace(-8, 8, 101)
    np.testing.assert_allclose(scale_density(D("normal(0,1)"), 1.5).logpdf(x), D("normal(0,1.5)").logpdf(x),
                               rtol=1e-14)


def test_scale_by_one_is_identity(D):
    d = D("studentt(0,1,3)")
    x = np.linspace(-20, 20, 81)
    np.testing.assert_array_equal(scale_density(d, 1.0).pdf(x), d.pdf(x))


def test_scaled_laplace_peak(D):
    assert scale_density(D("doubleexponential(0,1)"), 2.0).pdf(0.0) == pytest.approx(0.25, rel=1e-15)


@pytest.mark.parametrize("k", [0.0, -1.0, math.inf])
def test_scale_rejects_bad_factor(D, k):
    with pytest.raises(InvalidParameter):
        scale_density(D("normal(0,1)"), k)


@pytest.mark.parametrize("spec", PRESETS)
@pytest.mark.parametrize("k", [0.5, 3.0])
def test_scaled_cdf_identity(D, spec, k):
    d = recenter(D(spec))
    x = np.linspace(-10, 10, 41) * d.spread()
    np.testing.assert_allclose(scale_density(d, k).cdf(x), d.cdf(x / k), rtol=1e-10, atol=1e-14)


def test_scaling_custom_density_without_spec(D):
    base = D("logistic(0,1)")
    custom = dataclasses.replace(base, spec=None, name="custom")
    scaled = scale_density(custom, 2.0)
    x = np.linspace(-10, 10, 21)
    np.testing.assert_allclose(scaled.pdf(x), D("logistic(0,2)").pdf(x), rtol=1e-13)
    np.testing.assert_allclose(scaled.quantile([0.1, 0.9]), D("logistic(0,2)").quantile([0.1, 0.9]), rtol=1e-9)


# ------------------------------------------------------------ structure checks


def test_symmetry_fails_with_wrong_center(D):
    d = dataclasses.replace(D("normal(0,1)"), center=0.5)
    res = check_symmetry(d)
    assert not res.passed
    assert res.witness is not None and res.magnitude > 1e-3


def test_smoothed_uniform_symmetric(D):
    assert check_symmetry(D("smootheduniform(0,1,1,10)")).passed


def test_bimodal_mixture_not_quasiconcave(D):
    m = mixture([D("normal(-3,0.5)"), D("normal(3,0.5)")], [0.5, 0.5])
    res = check_quasiconcave(m)
    assert not res.passed
    lo, mid, hi = res.witness
    assert lo < mid < hi and -3 < mid < 3


@pytest.mark.parametrize("spec", ["logistic(0,1)", "doublepareto(0,1,2)", "cauchyuniform(0,1,1)"])
def test_quasiconcave_examples(D, spec):
    assert check_quasiconcave(D(spec)).passed


@pytest.mark.parametrize("spec,passed,strict", [
    ("normal(0,1)", True, True),
    ("doubleexponential(0,1)", True, False),
    ("logistic(0,1)", True, False),
    ("smootheduniform(0,1,1,50)", True, False),
    ("studentt(0,1,3)", False, False),
    ("cauchy(0,1)", False, False),
    ("doublepareto(0,1,2)", False, False),
])
def test_log_concavity(D, spec, passed, strict):
    res = check_logconcave(D(spec))
    assert res.passed is passed
    assert res.strict is strict


def test_logistic_strictly_log_concave_on_core(D):
    # log-concavity of the logistic weakens only in the far tails
    from attenuation.grids import GridSpec
    assert check_logconcave(D("logistic(0,1)"), GridSpec(-8, 8, 801)).strict


@pytest.mark.parametrize("spec", [
    "normal(0,1)", "logistic(0,1)", "doubleexponential(0,1)", "studentt(0,1,1)", "studentt(0,1,3)",
    "studentt(0,1,10)", "cauchy(0,1)", "doublepareto(0,1,1)", "doublepareto(0,1,2)",
])
def test_log_exp_concavity_examples(D, spec):
    assert check_log_exp_concave(D(spec)).passed


def test_log_exp_concavity_detects_violation(D):
    # a wide flat top followed by a fast drop makes log f(e^u) convex near the kink
    m = mixture([D("normal(0,0.2)"), D("normal(0,5)")], [0.5, 0.5])
    assert not check_log_exp_concave(m).passed


def test_double_pareto_splice_is_c1(D):
    for alpha in (1.0, 2.0, 3.5):
        d = make_density(f"doublepareto(0,1,{alpha})")
        eps = 1e-9
        assert float(d.logpdf(1 - eps)) == pytest.approx(float(d.logpdf(1 + eps)), abs=1e-8)
        assert float(d.dlogpdf(1 - eps)) == pytest.approx(float(d.dlogpdf(1 + eps)), abs=1e-7)
        x = np.array([2.0, 20.0, 200.0])
        slope = np.diff(d.logpdf(x)) / np.diff(np.log(x))
        np.testing.assert_allclose(slope, -(alpha + 1), rtol=1e-12)


def test_cauchy_uniform_matches_numerical_convolution(D):
    d = D("cauchyuniform(0,1,1)")
    for z in (0.0, 0.7, 2.0, 15.0):
        conv = sp_integrate.quad(lambda u: 0.5 / (math.pi * (1 + (z - u) ** 2)), -1, 1, epsrel=1e-13)[0]
        assert float(d.pdf(z)) == pytest.approx(conv, rel=1e-12)


# ------------------------------------------------------------ necessity prior


def test_necessity_prior_level_closed_form():
    assert smoothed_uniform_log_level(1.0, 10.0) == pytest.approx(-math.log(2 + math.sqrt(math.pi / 10)))


def test_necessity_prior_tends_to_uniform_level():
    assert float(make_necessity_prior(1.0, 1e12).pdf(0.0)) == pytest.approx(0.5, rel=1e-5)


def test_necessity_prior_tail_ratio():
    p = make_necessity_prior(1.0, 10.0)
    assert float(p.pdf(1.5) / p.pdf(0.0)) == pytest.approx(math.exp(-2.5), rel=1e-14)
    assert math.exp(-2.5) == pytest.approx(0.0821, abs=5e-5)


@pytest.mark.parametrize("d", [0.5, 1.0, 10.0, 1e3, 1e6])
def test_necessity_prior_symmetric_log_concave(d):
    p = make_necessity_prior(1.0, d)
    assert check_symmetry(p).passed
    assert check_logconcave(p).passed
    x = np.linspace(-3, 3, 61)
    np.testing.assert_array_equal(p.pdf(x), p.pdf(-x))


def test_necessity_prior_converges_pointwise_to_uniform():
    x = np.array([-1.5, -0.5, 0.0, 0.9, 1.2])
    target = np.where(np.abs(x) <= 1.0, 0.5, 0.0)
    errs = [np.abs(make_necessity_prior(1.0, d).pdf(x) - target) for d in (1, 10, 100, 1000)]
    inside = [e[np.abs(x) <= 1.0] for e in errs]
    for e0, e1 in zip(inside, inside[1:]):
        assert np.all(e1 < e0)
    # outside the window the error first grows with the level before the decay takes over
    worst = [float(np.max(e)) for e in errs[1:]]
    assert worst == sorted(worst, reverse=True)
    assert worst[-1] < 0.02


def test_necessity_prior_rejects_bad_parameters():
    with pytest.raises(InvalidParameter):
        make_necessity_prior(0.0, 1.0)
    with pytest.raises(InvalidParameter):
        make_necessity_prior(1.0, -1.0)
