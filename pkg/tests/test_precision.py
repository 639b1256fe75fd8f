import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attenuation.densities import check_log_exp_concave, make_density, mixture, scale_density
from attenuation.errors import InadmissibleDensity, InvalidParameter
from attenuation.grids import GridSpec
from attenuation.precision import (
    Relation,
    check_less_precise,
    check_mean_preserving_spread,
    check_scale_less_precise,
    likelihood_ratio,
    log_ratio_slope,
    negative_slope_intervals,
)

NOISES = [
    "normal(0,1)", "normal(0,1.5)", "logistic(0,1)", "doubleexponential(0,1)", "studentt(0,1,3)",
    "studentt(0,1,10)", "cauchy(0,1)", "doublepareto(0,1,2)", "cauchyuniform(0,1,1)",
]
LADDER = (0.5, 1.0, 1.5, 2.0, 3.0)
LADDER_FAMILIES = ["normal(0,1)", "logistic(0,1)", "doubleexponential(0,1)", "studentt(0,1,3)",
                   "studentt(0,1,10)", "cauchy(0,1)", "doublepareto(0,1,2)"]


def test_likelihood_ratio_at_zero(D):
    assert float(likelihood_ratio(D("normal(0,1.5)"), D("normal(0,1)"), 0.0)) == pytest.approx(1 / 1.5, rel=1e-15)


def test_likelihood_ratio_identical_is_one(D):
    x = np.linspace(-40, 40, 17)
    np.testing.assert_array_equal(likelihood_ratio(D("studentt(0,1,3)"), D("studentt(0,1,3)"), x), 1.0)


def test_likelihood_ratio_normal_at_three(D):
    # phi(3/1.5)/1.5 over phi(3): exp(-2 + 4.5) / 1.5
    expected = math.exp(-9 / 4.5 + 9 / 2) / 1.5
    assert expected == pytest.approx(8.1217, abs=1e-4)
    assert float(likelihood_ratio(D("normal(0,1.5)"), D("normal(0,1)"), 3.0)) == pytest.approx(expected, rel=1e-14)


def test_wider_normal_less_precise(D):
    v = check_less_precise(D("normal(0,1.5)"), D("normal(0,1)"))
    assert v.relation is Relation.LESS_PRECISE
    assert v.strict and v.witness_decrease is None and v.witness_increase is not None


def test_laplace_vs_normal_incomparable(D):
    v = check_less_precise(D("doubleexponential(0,1)"), D("normal(0,1)"))
    assert v.relation is Relation.INCOMPARABLE
    # slope of log f_DE - log f_N on x > 0 is x - 1
    xd, sd = v.witness_decrease
    assert xd < 1 and sd == pytest.approx(xd - 1, abs=1e-12)
    xi, si = v.witness_increase
    assert xi > 1 and si == pytest.approx(xi - 1, rel=1e-12)
    lo, hi = negative_slope_intervals(v)[0]
    assert lo == 0.0 and hi == pytest.approx(1.0, rel=1e-2)


def test_identical_logistic_equal(D):
    v = check_less_precise(D("logistic(0,1)"), D("logistic(0,1)"))
    assert v.relation is Relation.EQUAL and not v.strict


def test_cauchy_uniform_not_less_precise_than_cauchy(D):
    v = check_less_precise(D("cauchyuniform(0,1,1)"), D("cauchy(0,1)"))
    assert v.relation is Relation.INCOMPARABLE
    # independent mpmath oracle: the slope of the log ratio is most negative at x = 2.17308...
    # with value -0.0654742745..., and changes sign at x = 1.53985795...
    x, slope = v.witness_decrease
    assert x == pytest.approx(2.1730814544756390, rel=5e-3)
    assert slope == pytest.approx(-0.065474274561742676, rel=1e-4)
    assert float(log_ratio_slope(D("cauchyuniform(0,1,1)"), D("cauchy(0,1)"), 2.1730814544756390)) == \
        pytest.approx(-0.065474274561742676, rel=1e-12)
    (lo, hi), *_ = negative_slope_intervals(v)
    # the interval is bracketed by the neighbouring grid points
    assert 0.99 * 1.5398579560387291 < lo < 1.5398579560387291
    assert float(log_ratio_slope(D("cauchyuniform(0,1,1)"), D("cauchy(0,1)"), 1.5398579560387291)) == \
        pytest.approx(0.0, abs=1e-14)


def test_analytic_and_numeric_slopes_agree(D):
    for a, b in itertools.permutations(NOISES[:6], 2):
        x = np.geomspace(1e-3, 30, 40)
        np.testing.assert_allclose(log_ratio_slope(D(a), D(b), x, "numeric"),
                                   log_ratio_slope(D(a), D(b), x, "analytic"), rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("a,b", list(itertools.permutations(NOISES, 2)))
def test_antisymmetry(D, a, b):
    assert check_less_precise(D(a), D(b)).relation is check_less_precise(D(b), D(a)).relation.flipped()


@pytest.mark.parametrize("spec", LADDER_FAMILIES)
def test_transitivity_on_scale_ladder(D, spec):
    base = D(spec)
    scaled = {s: scale_density(base, s) for s in LADDER}
    rel = {(s, t): check_less_precise(scaled[t], scaled[s]).relation for s in LADDER for t in LADDER if t > s}
    for s, t, u in itertools.combinations(LADDER, 3):
        if rel[(s, t)] is Relation.LESS_PRECISE and rel[(t, u)] is Relation.LESS_PRECISE:
            assert rel[(s, u)] is Relation.LESS_PRECISE


@pytest.mark.parametrize("a,b", list(itertools.permutations(NOISES, 2)))
def test_precision_implies_mean_preserving_spread(D, a, b):
    if check_less_precise(D(a), D(b)).relation is not Relation.LESS_PRECISE:
        return
    res = check_mean_preserving_spread(D(a), D(b))
    if D(a).admissible_as_noise and D(b).admissible_as_noise:
        assert res.passed and res.details["direction"] == "direct"


@pytest.mark.parametrize("spec", LADDER_FAMILIES)
def test_scale_shortcut_agrees_with_grid_check(D, spec):
    base = D(spec)
    assert check_log_exp_concave(base).passed
    for s, t in itertools.combinations(LADDER, 2):
        v = check_scale_less_precise(base, s, t, cross_validate=True)
        assert v.relation is Relation.LESS_PRECISE
        assert v.basis == "log-exp-concavity"
        assert v.details["agrees"], (s, t, v.details)


def test_scale_fallback_for_non_log_exp_concave(D):
    m = mixture([D("normal(0,0.2)"), D("normal(0,5)")], [0.5, 0.5])
    v = check_scale_less_precise(m, 1.0, 2.0)
    assert v.basis == "grid"
    assert v.details["shortcut"] == "log-exp-concavity failed"
    assert v.relation is not Relation.EQUAL


@pytest.mark.parametrize("spec", ["normal(0,1)", "cauchy(0,1)"])
def test_scale_examples(D, spec):
    assert check_scale_less_precise(D(spec), 1.0, 1.5 if spec.startswith("normal") else 2.0).relation \
        is Relation.LESS_PRECISE
    assert check_scale_less_precise(D(spec), 1.0, 1.0).relation is Relation.EQUAL


@pytest.mark.parametrize("s,t", [(0.0, 1.0), (-1.0, 1.0), (2.0, 1.0)])
def test_scale_rejects_bad_order(D, s, t):
    with pytest.raises(InvalidParameter):
        check_scale_less_precise(D("normal(0,1)"), s, t)


@settings(max_examples=40, deadline=None)
@given(a=st.sampled_from(NOISES), b=st.sampled_from(NOISES), x=st.floats(1e-3, 50))
def test_reflection_negates_slope(a, b, x):
    da, db = make_density(a), make_density(b)
    up = float(log_ratio_slope(da, db, x))
    down = float(log_ratio_slope(da, db, -x))
    assert down == pytest.approx(-up, rel=1e-12, abs=1e-14)


def test_inadmissible_inputs_rejected(D):
    with pytest.raises(InadmissibleDensity):
        check_less_precise(D("normal(1,1)"), D("normal(0,1)"))
    bimodal = mixture([D("normal(-3,0.5)"), D("normal(3,0.5)")], [0.5, 0.5])
    with pytest.raises(InadmissibleDensity):
        check_less_precise(bimodal, D("normal(0,1)"))


def test_explicit_grid_is_used(D):
    g = GridSpec(0.01, 5.0, 64, "log")
    v = check_less_precise(D("normal(0,2)"), D("normal(0,1)"), grid=g)
    assert v.grid_used is g and v.profile[0].size == 64


def test_mps_examples(D):
    res = check_mean_preserving_spread(D("normal(0,1.5)"), D("normal(0,1)"))
    assert res.passed and res.details["direction"] == "direct"
    assert res.witness == pytest.approx(0.0, abs=1e-2)
    same = check_mean_preserving_spread(D("normal(0,1)"), D("normal(0,1)"))
    assert same.passed and same.details["direction"] == "equal"
    rev = check_mean_preserving_spread(D("normal(0,1)"), D("normal(0,1.5)"))
    assert rev.passed and rev.details["direction"] == "reversed"


def test_mps_requires_finite_mean(D):
    assert not check_mean_preserving_spread(D("cauchy(0,2)"), D("cauchy(0,1)")).passed
