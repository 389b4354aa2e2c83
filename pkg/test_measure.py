"""
Tests for product measures and gluings.
"""

from fractions import Fraction

import numpy as np
import pytest

from engine.core import Box, Family, make_star
from engine.corpus import random_family, random_measure
from engine.errors import DomainError
from engine.measure import (
    Gluing,
    ProductMeasure,
    apply_gluing,
    balancedness,
    check_measure_consistency,
    compose,
    count_gluings,
    enumerate_gluings,
    is_balanced_gluing,
    measure_of,
    push_measure,
    restrict_measure,
    sample_gluing,
)


def test_measure_examples():
    box = Box(3, 2)
    uniform = ProductMeasure.uniform(box)
    assert measure_of(uniform, make_star(box, (1,), (1,))) == Fraction(1, 3)
    assert measure_of(uniform, Family.full(box)) == 1

    nu = ProductMeasure(Box(3, 1), ((Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)),))
    assert measure_of(nu, Family(Box(3, 1), [(1,), (3,)])) == Fraction(3, 4)


def test_random_measure_normalized():
    rng = np.random.default_rng(7)
    box = Box(4, 2)
    nu = random_measure(box, rng)
    assert measure_of(nu, Family.full(box)) == 1
    assert all(w > 0 for factor in nu.factors for w in factor)


def test_measure_rejects_bad_factors():
    with pytest.raises(DomainError):
        ProductMeasure(Box(2, 1), (("1/2", "1/3"),))
    with pytest.raises(DomainError):
        ProductMeasure(Box(2, 1), (("3/2", "-1/2"),))


def test_restrict_measure_examples():
    nu = ProductMeasure.uniform(Box(3, 3))
    assert restrict_measure(nu, {1, 3}) == ProductMeasure.uniform(Box(3, 1))
    assert restrict_measure(nu, set()) == nu
    point = restrict_measure(nu, {1, 2, 3})
    assert point.box == Box(3, 0)
    assert measure_of(point, Family.full(point.box)) == 1


def test_balancedness_examples():
    assert balancedness(ProductMeasure.uniform(Box(5, 2))) == 1
    nu = ProductMeasure(Box(3, 1), (("1/2", "1/4", "1/4"),))
    assert balancedness(nu) == Fraction(3, 2)
    assert balancedness(ProductMeasure(Box(4, 1), ((1, 0, 0, 0),))) == 4


def test_balanced_gluing_examples():
    blocks = Gluing(4, 2, ((1, 1, 2, 2),))
    lopsided = Gluing(4, 2, ((1, 1, 1, 2),))
    assert is_balanced_gluing(blocks, 1)
    assert not is_balanced_gluing(lopsided, 1)
    assert is_balanced_gluing(lopsided, 2)


def test_apply_gluing_example():
    pi = Gluing(4, 2, ((1, 1, 2, 2),))
    F = Family(Box(4, 1), [(1,), (3,)])
    image = apply_gluing(pi, F)
    assert image.codes() == ((1,), (2,))
    pushed = push_measure(pi, ProductMeasure.uniform(Box(4, 1)))
    assert pushed == ProductMeasure.uniform(Box(2, 1))
    assert measure_of(pushed, image) == 1


def test_identity_gluing():
    box = Box(3, 2)
    rng = np.random.default_rng(1)
    F = random_family(box, rng)
    nu = random_measure(box, rng)
    pi = Gluing.identity(box)
    assert apply_gluing(pi, F) == F
    assert push_measure(pi, nu) == nu


def test_gluing_counts():
    assert count_gluings(8, 2, 1, 1) == 70
    assert sum(1 for _ in enumerate_gluings(8, 2, 1, 1)) == 70
    assert count_gluings(3, 3, 1, 1) == 6
    assert count_gluings(2, 1, 2, 2) == 1
    assert count_gluings(4, 2, 1, 2) == 36
    assert sum(1 for _ in enumerate_gluings(4, 2, 1, 2)) == 36


def test_gluing_slices_partition_the_stream():
    full = list(enumerate_gluings(6, 3, 1, 1))
    halves = list(enumerate_gluings(6, 3, 1, 1, 0, 40)) + list(enumerate_gluings(6, 3, 1, 1, 40))
    assert full == halves
    assert len(set(full)) == len(full) == count_gluings(6, 3, 1, 1)


def test_infeasible_gluing():
    with pytest.raises(DomainError):
        count_gluings(5, 2, 1, 1)
    with pytest.raises(DomainError):
        list(enumerate_gluings(2, 3, 1, 1))


def test_sample_gluing_is_balanced_and_seeded():
    first = sample_gluing(8, 4, 1, 2, seed=11)
    assert is_balanced_gluing(first, 1)
    assert sample_gluing(8, 4, 1, 2, seed=11) == first


def test_compose_fiber_bound():
    inner = Gluing(8, 4, ((1, 1, 2, 2, 3, 3, 4, 4),))
    outer = Gluing(4, 2, ((1, 1, 2, 2),))
    composed = compose(outer, inner)
    assert composed.maps == ((1, 1, 1, 1, 2, 2, 2, 2),)
    assert composed.fiber_bound() == 1


@pytest.mark.parametrize("seed", range(10))
def test_measure_consistency_over_all_gluings(seed):
    rng = np.random.default_rng(seed)
    box = Box(4, 2)
    F = random_family(box, rng)
    nu = random_measure(box, rng)
    report = check_measure_consistency(F, nu, enumerate_gluings(4, 2, 1, 2))
    assert report.passed
    assert report.details["gluings"] == 36
