"""
Tests for shadows, spread approximation, restriction lemmas, sunflowers, systems and covering numbers.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from engine.core import Box, Family, Restriction, embed_code, embed_to_sets, make_star
from engine.corpus import avoiding_family, random_family, triangle_restrictions
from engine.errors import BudgetError, DomainError
from engine.measure import ProductMeasure, measure_of
from engine.search import max_avoiding
from engine.structure import (
    SunflowerQuery,
    averaging_restriction,
    avoid_values,
    check_all_disjoint_shadows,
    check_double_counting,
    check_kk_direct,
    check_kk_exhaustive,
    check_large_restriction,
    check_restriction_scaling,
    check_simplification,
    check_sst_system,
    covering_number,
    embedded_avoidance_agrees,
    find_sunflower,
    kk_contrapositive_holds,
    refine_star,
    restriction_success_probability,
    shadow,
    spread_approximation,
    sst_parts_from_decomposition,
    union_of_stars_size,
    verify_spread_decomposition,
)


def test_shadow_of_full_box():
    box = Box(3, 3)
    for l in range(4):
        assert len(shadow(Family.full(box), l)) == math.comb(3, l) * 3 ** l


def test_shadow_of_single_code():
    assert shadow(Family(Box(2, 2), [(1, 1)]), 1) == {Restriction((1,), (1,)), Restriction((2,), (1,))}


def test_shadow_of_star_matches_formula():
    star = make_star(Box(3, 3), (1,), (1,))
    assert len(shadow(star, 2)) == 15
    assert shadow(star, 2) == shadow(star, 2, method="candidates")


def test_kk_direct_full_box():
    report = check_kk_direct(Family.full(Box(3, 2)), 1)
    assert report.passed
    assert report.margin == 0


@pytest.mark.parametrize("seed", range(20))
def test_kk_random_families(seed):
    F = random_family(Box(3, 3), np.random.default_rng(seed))
    for l in (1, 2):
        assert check_kk_direct(F, l).passed
        assert kk_contrapositive_holds(F, l)


def test_kk_exhaustive_small_box():
    report = check_kk_exhaustive(Box(2, 2), 1)
    assert report.passed
    assert report.details["families_checked"] == 16


def test_kk_exhaustive_budget():
    with pytest.raises(BudgetError):
        check_kk_exhaustive(Box(5, 2), 1)


def test_spread_of_punctured_square():
    box = Box(2, 2)
    F = Family.full(box) - Family(box, [(1, 1)])
    dec = spread_approximation(F, 2, 2)
    assert dec.restrictions == (Restriction(),)
    assert dec.parts == (F,)
    assert not dec.remainder
    assert verify_spread_decomposition(F, dec).passed


def test_spread_of_star():
    star = make_star(Box(3, 2), (1,), (1,))
    dec = spread_approximation(star, 2, 1)
    assert dec.restrictions == (Restriction((1,), (1,)),)
    assert not dec.remainder


def test_spread_of_empty_family():
    dec = spread_approximation(Family.empty(Box(3, 2)), 2, 1)
    assert len(dec) == 0
    assert not dec.remainder


@pytest.mark.parametrize("seed", range(15))
def test_spread_random_families_verify(seed):
    F = random_family(Box(3, 3), np.random.default_rng(seed))
    assert verify_spread_decomposition(F, spread_approximation(F, 2, 2)).passed


def test_spread_parts_as_system():
    star = make_star(Box(3, 3), (1,), (2,))
    parts = sst_parts_from_decomposition(spread_approximation(star, 2, 1))
    assert list(parts) == [frozenset({2})]
    assert len(parts[frozenset({2})]) == 9


def test_averaging_examples():
    box = Box(3, 2)
    nu = ProductMeasure.uniform(box)
    star = make_star(box, (1,), (3,))
    result = averaging_restriction(star, nu, {1})
    assert result.restriction == Restriction((1,), (3,))
    assert result.achieved == 1
    assert averaging_restriction(star, nu, set()).achieved == Fraction(1, 3)


@pytest.mark.parametrize("seed", range(20))
def test_averaging_identity(seed):
    rng = np.random.default_rng(seed)
    box = Box(3, 3)
    F = random_family(box, rng)
    nu = ProductMeasure.uniform(box)
    H = {int(c) + 1 for c in rng.choice(3, size=int(rng.integers(1, 4)), replace=False)}
    result = averaging_restriction(F, nu, H)
    assert result.mean == measure_of(nu, F)
    assert result.achieved >= measure_of(nu, F)


def test_success_probability_of_full_box():
    box = Box(3, 3)
    assert restriction_success_probability(Family.full(box), ProductMeasure.uniform(box), (1, 2)) == 1
    assert check_large_restriction(Family.full(box), None, (1,), Fraction(9, 10)).passed


@pytest.mark.parametrize("seed", range(20))
def test_large_restriction_random(seed):
    rng = np.random.default_rng(seed)
    F = random_family(Box(3, 3), rng)
    assert check_large_restriction(F, None, (1,), Fraction(1, 4)).passed


def test_avoid_values_tight_case():
    box = Box(4, 2)
    kept, report = avoid_values(Family.full(box), None, {1: {1}})
    assert len(kept) == 12
    assert report.passed
    assert report.margin == 0


def test_avoid_values_without_forbidden_values():
    F = random_family(Box(4, 2), np.random.default_rng(2))
    kept, report = avoid_values(F, None, {})
    assert kept == F
    assert report.passed


def test_avoid_values_void_bound():
    with pytest.raises(DomainError):
        avoid_values(Family.full(Box(2, 2)), None, {1: {1, 2}})


def test_covering_examples():
    F = Family(Box(2, 2), [(1, 2), (2, 1)])
    assert covering_number(embed_to_sets(F)) == 2
    assert covering_number([]) == 0
    assert covering_number([frozenset()]) == math.inf


@pytest.mark.parametrize("m,k", [(2, 2), (3, 2), (2, 3), (4, 2), (3, 3)])
def test_covering_full_box_is_m(m, k):
    assert covering_number(embed_to_sets(Family.full(Box(m, k)))) == m


def test_refine_star_of_small_full_quotient_is_empty():
    assert not refine_star(Family.full(Box(2, 2)), 1, 3)


def test_union_of_stars():
    box = Box(5, 3)
    assert union_of_stars_size([Restriction((1, 2), (1, 1))], box) == 5
    assert union_of_stars_size([Restriction((1,), (1,)), Restriction((2,), (1,))], Box(5, 2)) == 9


def test_simplification_triangle():
    report = check_simplification(triangle_restrictions(), Box(48, 3), 1, 1)
    assert report.passed
    assert report.details["union"] == 142


def test_simplification_with_common_restriction_is_unmet():
    restrictions = [Restriction((1, 2), (1, 1)), Restriction((1, 3), (1, 2))]
    report = check_simplification(restrictions, Box(48, 3), 1, 1)
    assert report.status == "hypotheses-unmet"


def test_disjoint_shadows_of_star_is_vacuous():
    star = make_star(Box(3, 3), (1,), (1,))
    report = check_all_disjoint_shadows(star, 1)
    assert report.passed
    assert report.details["nonempty_refinements"] <= 1


@pytest.mark.parametrize("seed", range(5))
def test_disjoint_shadows_greedy_avoiding(seed):
    F = avoiding_family(Box(5, 3), 2, np.random.default_rng(seed))
    assert check_all_disjoint_shadows(F, 2).passed


@pytest.mark.parametrize("m,n,t", [(3, 2, 1), (4, 2, 1), (5, 2, 1), (2, 3, 1), (3, 3, 2)])
def test_disjoint_shadows_of_search_optimum(m, n, t):
    optimum = max_avoiding(Box(m, n), t).canonical
    report = check_all_disjoint_shadows(optimum, t)
    assert report.passed
    assert report.status == "verified"


@pytest.mark.slow
def test_disjoint_shadows_of_search_optimum_in_three_cube():
    cert = max_avoiding(Box(5, 3), 1)
    assert cert.optimum == 25
    report = check_all_disjoint_shadows(cert.canonical, 1)
    assert report.passed
    assert report.status == "verified"


def test_disjoint_shadows_needs_avoiding_family():
    report = check_all_disjoint_shadows(Family.full(Box(3, 2)), 1)
    assert report.status == "hypotheses-unmet"


def test_find_sunflower():
    sets = [{1, 2}, {1, 3}, {1, 4}, {5}]
    indices, core = find_sunflower(sets, 3)
    assert indices == (0, 1, 2)
    assert core == frozenset({1})
    assert find_sunflower(sets, 3, core_size=0) is None


def test_sunflower_query():
    query = SunflowerQuery([{1, 2}, {1, 3}, {1, 4}], 3)
    assert query.find() == ((0, 1, 2), frozenset({1}))
    assert SunflowerQuery.of_family(Family(Box(2, 2), [(1, 1), (2, 2)]), 2, 0).find() == ((0, 1), frozenset())
    with pytest.raises(DomainError):
        SunflowerQuery([{1}], 1)
    with pytest.raises(DomainError):
        SunflowerQuery([{1}], 2, core_size=-1)


def test_sst_system_conditions():
    good = {frozenset({1}): [frozenset({4})], frozenset({2}): [frozenset({5})]}
    assert check_sst_system(good, 2, 2).passed
    # disjoint index sets form a sunflower with empty core
    assert not check_sst_system(good, 2, 1).passed


@pytest.mark.parametrize("seed", range(20))
def test_embedded_avoidance_matches_sunflowers(seed):
    rng = np.random.default_rng(seed)
    box = Box(3, 3)
    for t in (1, 2, 3):
        assert embedded_avoidance_agrees(random_family(box, rng), t)
        assert embedded_avoidance_agrees(avoiding_family(box, t, rng), t)


@pytest.mark.parametrize("h", [0, 1, 2, 3])
def test_double_counting(h):
    F = random_family(Box(3, 3), np.random.default_rng(h))
    assert check_double_counting(F, h).passed


def test_restriction_scaling():
    box = Box(4, 4)
    X = Restriction((1,), (2,))
    Y = Restriction((2, 4), (1, 3))
    assert check_restriction_scaling(box, X, Y).passed
    with pytest.raises(DomainError):
        check_restriction_scaling(box, X, Restriction((1,), (3,)))


def test_embedding_of_restricted_star_member():
    assert embed_code((2, 1, 1), 3) - frozenset({2}) == frozenset({4, 7})
