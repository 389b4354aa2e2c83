"""
Tests for noise operators, stability, globalness, homogeneity, boosting and the Hoffman bound.
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from engine.analysis import (
    RealFunctionOnBox,
    RootValue,
    boost_constants,
    boost_exponent,
    boost_pipeline_trace,
    boost_step_search,
    check_boost_trace,
    check_hoffman,
    check_hypercontractivity,
    check_stab_interpolation,
    check_stability_monotone,
    expectation,
    globalness,
    homogeneity,
    homogeneous_restriction,
    indicator,
    noise_apply,
    regime_thresholds,
    stability,
)
from engine.core import Box, Family, Restriction, make_star
from engine.corpus import cross_agreeing_pair, random_family, random_measure
from engine.errors import DomainError, PreconditionError, UndefinedError
from engine.measure import ProductMeasure

SINGLE = Family(Box(3, 1), [(1,)])


def test_noise_on_point_indicator():
    values = noise_apply(indicator(SINGLE), Fraction(1, 2)).values
    assert list(values) == [Fraction(2, 3), Fraction(1, 6), Fraction(1, 6)]


def test_noise_fixes_constants():
    nu = ProductMeasure.uniform(Box(3, 2))
    f = RealFunctionOnBox.constant(nu, Fraction(5, 7))
    assert (noise_apply(f, Fraction(1, 3)).values == f.values).all()


def test_noise_rejects_rho_outside_unit_interval():
    with pytest.raises(DomainError):
        noise_apply(indicator(SINGLE), Fraction(3, 2))


def _random_function(box, rng):
    nu = random_measure(box, rng)
    if rng.random() < 0.5:
        return indicator(random_family(box, rng), nu)
    return RealFunctionOnBox(nu, rng.integers(-5, 6, size=box.size).astype(object))


@pytest.mark.parametrize("box", [Box(3, 2), Box(2, 3), Box(4, 1)], ids=str)
@pytest.mark.parametrize("seed", range(10))
def test_noise_is_a_semigroup(box, seed):
    rng = np.random.default_rng(seed)
    f = _random_function(box, rng)
    rho, sigma = Fraction(int(rng.integers(0, 8)), 7), Fraction(int(rng.integers(0, 6)), 5)
    twice = noise_apply(noise_apply(f, sigma), rho)
    once = noise_apply(f, rho * sigma)
    assert (twice.values == once.values).all()


@pytest.mark.parametrize("box", [Box(3, 2), Box(2, 3), Box(4, 1)], ids=str)
@pytest.mark.parametrize("seed", range(10))
def test_noise_preserves_the_mean(box, seed):
    rng = np.random.default_rng(seed)
    f = _random_function(box, rng)
    for rho in (Fraction(0), Fraction(1, 3), Fraction(4, 5), Fraction(1)):
        smoothed = noise_apply(f, rho)
        assert smoothed.exact
        assert expectation(smoothed) == expectation(f)


def test_noise_at_zero_is_the_mean():
    rng = np.random.default_rng(3)
    f = _random_function(Box(3, 2), rng)
    mean = expectation(f)
    assert all(v == mean for v in noise_apply(f, 0).values.ravel())


def test_stability_examples():
    nu = ProductMeasure.uniform(SINGLE.box)
    assert stability(SINGLE, nu, Fraction(1, 2)) == Fraction(2, 9)
    assert stability(SINGLE, nu, 0) == Fraction(1, 9)
    assert stability(SINGLE, nu, 1) == Fraction(1, 3)
    full = Family.full(Box(3, 2))
    assert stability(full, ProductMeasure.uniform(full.box), Fraction(2, 5)) == 1


@pytest.mark.parametrize("m,n,t", [(3, 2, 1), (4, 3, 1), (3, 3, 2), (2, 3, 2)])
def test_star_homogeneity_is_m(m, n, t):
    star = make_star(Box(m, n), tuple(range(1, t + 1)), (1,) * t)
    assert homogeneity(star) == m


def test_full_box_homogeneity_is_one():
    assert homogeneity(Family.full(Box(4, 2))) == 1


def test_homogeneity_of_empty_family():
    with pytest.raises(UndefinedError):
        homogeneity(Family.empty(Box(3, 2)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_globalness_squared_is_homogeneity(seed):
    F = random_family(Box(3, 2), np.random.default_rng(seed))
    assert globalness(indicator(F)).squared() == homogeneity(F)


def test_root_values_compare_exactly():
    assert RootValue(9, 2) == 3
    assert RootValue(2, 2) < RootValue(3, 2)
    assert RootValue(8, 3) == RootValue(4, 2)
    assert RootValue(3, 1).squared() == 9


def test_homogeneous_restriction_of_star():
    star = make_star(Box(3, 2), (1,), (2,))
    r = homogeneous_restriction(star, ProductMeasure.uniform(star.box), 2)
    assert r == Restriction((1,), (2,))


def test_hypercontractivity_examples():
    full = check_hypercontractivity(Family.full(Box(3, 2)))
    assert full.passed
    star = check_hypercontractivity(make_star(Box(3, 2), (1,), (1,)))
    assert star.passed
    assert star.margin > 0


def test_hypercontractivity_empty_family_is_unmet():
    report = check_hypercontractivity(Family.empty(Box(3, 2)))
    assert report.status == "hypotheses-unmet"


@pytest.mark.parametrize("seed", range(25))
def test_hypercontractivity_random_families(seed):
    F = random_family(Box(3, 2), np.random.default_rng(seed))
    assert check_hypercontractivity(F).passed


def test_stab_interpolation_constant_is_tight():
    nu = ProductMeasure.uniform(Box(3, 2))
    report = check_stab_interpolation(RealFunctionOnBox.constant(nu, 2), Fraction(1, 2), 2)
    assert report.passed
    assert report.details["lhs"] == 4


@pytest.mark.parametrize("t", [2, 4])
@pytest.mark.parametrize("seed", range(10))
def test_stab_interpolation_random_indicators(seed, t):
    F = random_family(Box(3, 2), np.random.default_rng(seed))
    assert check_stab_interpolation(indicator(F), Fraction(5, 6), t).passed


def test_stab_interpolation_needs_power_of_two():
    with pytest.raises(DomainError):
        check_stab_interpolation(indicator(SINGLE), Fraction(1, 2), 3)


def test_stability_is_monotone_in_rho():
    F = random_family(Box(3, 2), np.random.default_rng(3))
    grid = [Fraction(k, 10) for k in range(11)]
    assert check_stability_monotone(F, ProductMeasure.uniform(F.box), grid).passed


def test_boost_constants_need_tau_above_one():
    with pytest.raises(DomainError):
        boost_constants(1, 2)
    constants = boost_constants(2, 2)
    assert 0 < constants.c < 1


def test_regime_thresholds_desk_scale_is_outside():
    assert not regime_thresholds(1, 5, 3).inside()
    assert not regime_thresholds(2, 3, 3).inside()


def test_boost_exponent_value_and_monotonicity():
    assert float(boost_exponent(2)) == pytest.approx(0.00468, abs=1e-5)
    assert boost_constants(2, 2).c == boost_exponent(2)
    grid = [boost_exponent(Fraction(k, 10)) for k in range(11, 101)]
    assert all(a > b for a, b in zip(grid, grid[1:]))


@pytest.mark.parametrize("m,n", [(5, 3), (16, 4), (100, 10)])
def test_regime_thresholds_grow_with_t(m, n):
    low, high = regime_thresholds(1, m, n), regime_thresholds(2, m, n)
    for name in ("n_bound", "mnt_n_min", "mnt_m_min", "n_hat0", "n_tilde0", "n0", "spread_q"):
        assert getattr(low, name) <= getattr(high, name), name
    assert all(a <= b for a, b in zip(low.m_bounds, high.m_bounds))
    assert high.spread_tau < low.spread_tau


def test_boost_step_full_box():
    box = Box(8, 1)
    result = boost_step_search(Family.full(box), ProductMeasure.uniform(box), 4)
    assert result.achieved == 1
    assert result.gluings_checked == 70
    assert result.to_report({"m": 8}).passed


def test_boost_step_needs_divisor():
    box = Box(6, 1)
    with pytest.raises(DomainError):
        boost_step_search(Family.full(box), ProductMeasure.uniform(box), 4)


@pytest.mark.parametrize("seed", range(5))
def test_boost_step_random_families(seed):
    box = Box(8, 1)
    F = random_family(box, np.random.default_rng(seed))
    result = boost_step_search(F, ProductMeasure.uniform(box), 4)
    assert result.achieved >= result.alpha
    assert result.corollary_ok


def test_boost_trace_stops_at_half():
    box = Box(16, 2)
    F = Family.full(box)
    trace = boost_pipeline_trace(F, ProductMeasure.uniform(box), 2, 2)
    assert len(trace.steps) == 1
    assert check_boost_trace(trace, {"m": 16, "n": 2}).passed


def test_boost_trace_measures_never_drop():
    box = Box(16, 2)
    F = random_family(box, np.random.default_rng(5), density=0.05)
    trace = boost_pipeline_trace(F, ProductMeasure.uniform(box), 2, 2, seed=5)
    measures = [step.measure for step in trace.steps]
    assert measures == sorted(measures)
    assert check_boost_trace(trace, {"m": 16, "n": 2}).passed


def test_hoffman_tight_case():
    G = Family(Box(3, 1), [(1,)])
    report = check_hoffman(G, G)
    assert report.passed
    assert report.details["equality"]
    assert report.margin == 0


def test_hoffman_rejects_non_intersecting_pair():
    box = Box(3, 1)
    with pytest.raises(PreconditionError):
        check_hoffman(Family(box, [(1,)]), Family(box, [(2,)]))


@pytest.mark.parametrize("seed", range(30))
def test_hoffman_random_pairs(seed):
    G1, G2 = cross_agreeing_pair(Box(3, 2), np.random.default_rng(seed))
    assert check_hoffman(G1, G2).passed
