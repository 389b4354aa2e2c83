"""
Tests for compressions, the cube image, p-biased measures and cross-matching.
"""

from fractions import Fraction

import numpy as np
import pytest

from engine.compression import (
    CubeFamily,
    are_cross_agreeing_cube,
    check_compression_pipeline,
    check_monotone_shift,
    check_unbalanced_cross_matching,
    compress,
    compression_report,
    cube_from_codes,
    disagreeing_pair,
    full_compress,
    is_monotone,
    monotonize,
    p_biased,
    unbalanced_hypothesis,
    up_closure,
)
import engine.compression as compression
from engine.core import Box, Family, agr, make_star
from engine.corpus import cross_agreeing_pair, monotone_cube_family, random_family, unbalanced_pair
from engine.errors import BudgetError, DimensionError, DomainError, PreconditionError


def test_compress_examples():
    box = Box(2, 2)
    assert compress(Family(box, [(2, 1)]), 1, 2) == Family(box, [(1, 1)])
    assert compress(Family(box, [(1, 1)]), 1, 2) == Family(box, [(1, 1)])
    both = Family(box, [(1, 1), (2, 1)])
    assert compress(both, 1, 2) == both


def test_compress_rejects_value_one():
    with pytest.raises(DomainError):
        compress(Family.full(Box(3, 2)), 1, 1)
    with pytest.raises(DomainError):
        compress(Family.full(Box(3, 2)), 3, 2)


@pytest.mark.parametrize("seed", range(20))
def test_full_compress_keeps_size_and_is_idempotent(seed):
    F = random_family(Box(3, 3), np.random.default_rng(seed))
    G = full_compress(F)
    assert len(G) == len(F)
    assert full_compress(G) == G


def test_monotonize_examples():
    assert monotonize(Family(Box(3, 2), [(1, 3)])) == cube_from_codes(2, [(1, 0)])
    assert monotonize(Family.full(Box(3, 2))) == CubeFamily.full(2)
    assert monotonize(Family(Box(3, 2), [(1, 1)])) == cube_from_codes(2, [(1, 1)])
    assert not monotonize(Family.empty(Box(3, 2)))


def test_monotonize_of_compressed_star_is_monotone():
    star = make_star(Box(3, 3), (2,), (3,))
    A = monotonize(full_compress(star))
    assert is_monotone(A) == (True, None)
    assert A == up_closure(cube_from_codes(3, [(0, 1, 0)]))


def test_is_monotone_reports_missing_superset():
    monotone, (x, y) = is_monotone(cube_from_codes(2, [(1, 0)]))
    assert not monotone
    assert x == (1, 0)
    assert y == (1, 1)


def test_up_closure_is_monotone():
    A = up_closure(cube_from_codes(3, [(1, 0, 0), (0, 1, 1)]))
    assert is_monotone(A)[0]
    assert len(A) == 5


def test_cube_rejects_bad_vectors():
    with pytest.raises(DimensionError):
        cube_from_codes(2, [(1, 2)])
    with pytest.raises(BudgetError):
        CubeFamily(30)


def test_cross_agreeing_cube_examples():
    A = cube_from_codes(2, [(1, 0), (1, 1)])
    assert are_cross_agreeing_cube(A, A) == (True, None)
    ok, (x, y) = are_cross_agreeing_cube(A, cube_from_codes(2, [(0, 1)]))
    assert not ok
    assert (x, y) == ((1, 0), (0, 1))


def test_p_biased_examples():
    assert p_biased(CubeFamily.full(3), Fraction(1, 3)) == 1
    first = up_closure(cube_from_codes(3, [(1, 0, 0)]))
    assert p_biased(first, Fraction(2, 7)) == Fraction(2, 7)
    assert p_biased(CubeFamily(3), Fraction(1, 2)) == 0
    with pytest.raises(DomainError):
        p_biased(first, 2)


@pytest.mark.parametrize("seed", range(60))
def test_monotone_shift_random_families(seed):
    A = monotone_cube_family(4, np.random.default_rng(seed))
    assert check_monotone_shift(A, Fraction(1, 3), Fraction(1, 2)).passed
    assert check_monotone_shift(A, Fraction(1, 4), Fraction(2, 3), alpha=1).passed


def test_monotone_shift_needs_monotone_family():
    with pytest.raises(PreconditionError):
        check_monotone_shift(cube_from_codes(2, [(1, 0)]), Fraction(1, 3), Fraction(1, 2))


def test_monotone_shift_needs_ordered_p_q():
    with pytest.raises(DomainError):
        check_monotone_shift(CubeFamily.full(2), Fraction(1, 2), Fraction(1, 3))


def test_monotone_shift_unmet_below_alpha():
    A = up_closure(cube_from_codes(3, [(1, 1, 1)]))
    report = check_monotone_shift(A, Fraction(1, 2), Fraction(2, 3), alpha=1)
    assert report.status == "hypotheses-unmet"


def test_unbalanced_hypothesis_examples():
    assert unbalanced_hypothesis(Fraction(1), Fraction(1, 2), 2) == (True, "exact")
    assert unbalanced_hypothesis(Fraction(1, 2), Fraction(1, 2), 2) == (False, "exact")
    assert unbalanced_hypothesis(Fraction(1, 2), Fraction(3, 4), 2)[0]
    holds, method = unbalanced_hypothesis(Fraction(1, 2), Fraction(1, 3), 3)
    assert not holds
    assert method == "exact"


def test_unbalanced_one_coordinate():
    box = Box(2, 1)
    report = check_unbalanced_cross_matching(Family(box, [(1,), (2,)]), Family(box, [(1,)]))
    assert report.passed
    assert report.witness == {"x1": [2], "x2": [1]}


def test_unbalanced_below_hypothesis_is_unmet():
    box = Box(3, 2)
    star = make_star(box, (1,), (1,))
    report = check_unbalanced_cross_matching(star, star)
    assert report.status == "hypotheses-unmet"


@pytest.mark.parametrize("box", [Box(3, 2), Box(2, 3)], ids=str)
@pytest.mark.parametrize("seed", range(15))
def test_unbalanced_random_pairs(box, seed):
    pair = unbalanced_pair(box, np.random.default_rng(seed))
    assert pair is not None
    report = check_unbalanced_cross_matching(*pair)
    assert report.passed
    assert report.status == "verified"
    assert report.details["hypothesis"]
    x1, x2 = tuple(report.witness["x1"]), tuple(report.witness["x2"])
    assert x1 in pair[0] and x2 in pair[1]
    assert agr(x1, x2, box) == 0


def test_unbalanced_fails_when_compression_loses_a_point(monkeypatch):
    monkeypatch.setattr(compression, "full_compress", lambda F: Family(F.box, F.codes()[1:]))
    box = Box(2, 1)
    report = check_unbalanced_cross_matching(Family(box, [(1,), (2,)]), Family(box, [(1,)]))
    assert not report.passed
    assert report.status == "violated"
    kinds = [problem["kind"] for problem in report.witness["problems"]]
    assert "compression changed the measure" in kinds


def test_disagreeing_pair_of_star_is_none():
    star = make_star(Box(3, 2), (1,), (1,))
    assert disagreeing_pair(star, star) is None


@pytest.mark.parametrize("seed", range(30))
def test_compression_pipeline_random_pairs(seed):
    F1, F2 = cross_agreeing_pair(Box(3, 2), np.random.default_rng(seed))
    report = check_compression_pipeline(F1, F2)
    assert report.passed
    assert report.details["cross_agreeing"]


def test_compression_report_on_star():
    report = compression_report(make_star(Box(4, 2), (1,), (4,)))
    assert report.passed
    assert report.details["cube"] == {"n": 2, "members": [[1, 0], [1, 1]]}
