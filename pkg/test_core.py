"""
Tests for codes, restrictions, families, stars and the set embedding.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from engine.core import (
    Box,
    Family,
    Restriction,
    StarSpec,
    agr,
    agr_on,
    detect_star,
    embed_code,
    embed_to_sets,
    is_avoiding,
    is_t_intersecting,
    make_star,
    restrict_family,
    srt_family,
    srt_size,
)
from engine.errors import DimensionError, DomainError


def test_agr_examples():
    assert agr((1, 2, 3), (1, 2, 4)) == 2
    assert agr((1, 1), (2, 2)) == 0
    for x in Box(3, 2).codes():
        assert agr(x, x) == 2


def test_agr_length_mismatch():
    with pytest.raises(DimensionError):
        agr((1, 2), (1, 2, 3))


def test_agr_checks_box_membership():
    box = Box(3, 2)
    assert agr((1, 3), (2, 3), box) == 1
    with pytest.raises(DimensionError):
        agr((1, 4), (1, 2), box)
    with pytest.raises(DimensionError):
        agr((1, 2, 3), (1, 2, 3), box)
    with pytest.raises(DimensionError):
        agr((0, 1), (1, 1))


def test_agr_on_examples():
    assert agr_on({1}, (1, 2), (1, 3)) == 1
    assert agr_on(set(), (1, 2), (2, 1)) == 0
    assert agr_on({2, 3}, (1, 2, 3), (9, 2, 4)) == 1


def test_agr_on_restrictions():
    r = Restriction((1, 3), (2, 1))
    assert agr_on({1, 3}, r, (2, 5, 1)) == 2
    with pytest.raises(DomainError):
        agr_on({2}, r, (2, 5, 1))


def test_restrict_family_examples():
    full = Family.full(Box(2, 2))
    quotient = restrict_family(full, Restriction((1,), (1,)), "quotient")
    assert quotient.box == Box(2, 1)
    assert quotient.codes() == ((1,), (2,))

    F = Family(Box(2, 2), [(1, 1), (2, 2)])
    assert restrict_family(F, Restriction((1,), (1,))).codes() == ((1, 1),)


def test_restrict_family_value_outside_box():
    F = Family(Box(2, 2), [(1, 2), (2, 1)])
    with pytest.raises(DomainError):
        restrict_family(F, Restriction((1,), (3,)))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), coord=st.integers(1, 3))
def test_restriction_sizes_add_up(seed, coord):
    box = Box(3, 3)
    rng = np.random.default_rng(seed)
    F = Family.from_mask(box, rng.random(box.size) < 0.5)
    total = 0
    for v in range(1, 4):
        r = Restriction((coord,), (v,))
        kept = restrict_family(F, r, "keep")
        assert len(kept) == len(restrict_family(F, r, "quotient"))
        total += len(kept)
    assert total == len(F)


def test_is_avoiding_examples():
    box = Box(2, 2)
    assert is_avoiding(Family(box, [(1, 1), (2, 2)]), 2) == (True, None)
    assert is_avoiding(Family(box, [(1, 1), (1, 2)]), 2) == (False, ((1, 1), (1, 2)))


@pytest.mark.parametrize("m,n,t", [(3, 2, 1), (2, 3, 2), (4, 3, 2), (3, 3, 3)])
def test_stars_are_avoiding_and_intersecting(m, n, t):
    star = make_star(Box(m, n), tuple(range(1, t + 1)), (2,) * t)
    assert is_avoiding(star, t)[0]
    assert is_t_intersecting(star, t)


def test_make_star_examples():
    star = make_star(Box(3, 2), (1,), (2,))
    assert star.codes() == ((2, 1), (2, 2), (2, 3))
    assert len(make_star(Box(2, 3), (1, 2), (1, 1))) == 2
    assert len(make_star(Box(4, 3), (1, 2, 3), (4, 1, 2))) == 1


def test_make_star_mismatched_lengths():
    with pytest.raises(DomainError):
        make_star(Box(3, 2), (1, 2), (1,))


def test_detect_star_examples():
    match = detect_star(make_star(Box(3, 2), (1,), (2,)))
    assert match.restriction == Restriction((1,), (2,))
    assert match.exact

    match = detect_star(Family(Box(2, 2), [(1, 1), (1, 2), (2, 1)]))
    assert match.restriction == Restriction()
    assert not match.exact

    match = detect_star(Family(Box(2, 2), [(1, 1)]))
    assert match.restriction == Restriction((1, 2), (1, 1))
    assert match.exact

    assert detect_star(Family.empty(Box(2, 2))) is None


def test_srt_sizes():
    spec = StarSpec(Box(2, 3), 1, 1)
    assert len(srt_family(spec)) == srt_size(spec) == 4

    spec = StarSpec(Box(3, 4), 1, 1)
    assert len(srt_family(spec)) == srt_size(spec) == 21

    spec = StarSpec(Box(3, 3), 2, 0)
    assert srt_family(spec) == make_star(Box(3, 3), (1, 2), (1, 1))


def test_srt_too_wide():
    with pytest.raises(DomainError):
        StarSpec(Box(2, 2), 1, 1)


def test_embedding_examples():
    assert embed_code((1, 2), 2) == frozenset({1, 4})
    assert embed_code((2, 1), 2) == frozenset({2, 3})
    assert embed_to_sets(Family(Box(2, 2), [(1, 2), (2, 1)])) == (frozenset({1, 4}), frozenset({2, 3}))


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_agreement_is_embedded_intersection(data):
    m = data.draw(st.integers(2, 5))
    n = data.draw(st.integers(1, 5))
    code = st.lists(st.integers(1, m), min_size=n, max_size=n).map(tuple)
    x, y = data.draw(code), data.draw(code)
    assert agr(x, y) == len(embed_code(x, m) & embed_code(y, m))


def test_family_algebra():
    box = Box(2, 2)
    F = Family(box, [(1, 1), (1, 2)])
    G = Family(box, [(1, 2), (2, 2)])
    assert (F | G).codes() == ((1, 1), (1, 2), (2, 2))
    assert (F & G).codes() == ((1, 2),)
    assert (F - G).codes() == ((1, 1),)
    assert len(F.complement()) == 2
    assert hash(F) == hash(Family(box, [(1, 2), (1, 1)]))


def test_family_rejects_bad_codes():
    with pytest.raises(DimensionError):
        Family(Box(2, 2), [(1, 1, 1)])
    with pytest.raises(DomainError):
        Family(Box(2, 2), [(1, 3)])


def test_box_index_round_trip_order():
    box = Box(3, 2)
    assert [box.index(x) for x in box.codes()] == list(range(9))
    assert box.code_at(5) == (2, 3)
