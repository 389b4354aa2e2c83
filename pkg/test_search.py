"""
Tests for the conflict graph, the exact maximum search, canonical forms and the theorem checks.
"""

import numpy as np
import pytest

from engine.core import Box, Family, is_avoiding, make_star
from engine.corpus import avoiding_family, random_family
from engine.errors import BudgetError, DomainError
from engine.search import (
    SymmetryGroup,
    build_conflict_graph,
    conflict_graph_to_dimacs,
    exhaustive_max_avoiding,
    is_t_star,
    lex_least_optimum,
    max_avoiding,
    near_star_completion_check,
    near_star_completion_search,
    verify_main_theorem,
)


def test_conflict_graph_small_cases():
    graph = build_conflict_graph(Box(2, 2), 1)
    assert graph.edge_count == 2
    assert graph.has_edge((1, 1), (2, 2))
    assert not graph.has_edge((1, 1), (1, 2))
    assert graph.degree_stats()["regular"]

    triangle = build_conflict_graph(Box(3, 1), 1)
    assert triangle.edge_count == 3


def test_conflict_graph_of_identical_agreement_is_empty():
    graph = build_conflict_graph(Box(2, 2), 3)
    assert graph.edge_count == 0
    assert max_avoiding(Box(2, 2), 3).optimum == 4


def test_conflict_graph_rejects_bad_t():
    with pytest.raises(DomainError):
        build_conflict_graph(Box(2, 2), 4)
    with pytest.raises(DomainError):
        build_conflict_graph(Box(2, 2), 0)


def test_dimacs_header():
    text = conflict_graph_to_dimacs(build_conflict_graph(Box(2, 2), 1))
    lines = text.splitlines()
    assert lines[0].startswith("c ")
    assert lines[1] == "p edge 4 4"
    assert len(lines) == 6
    assert "e 1 2" in lines


def test_networkx_view_keeps_codes():
    view = build_conflict_graph(Box(3, 2), 1).to_networkx()
    assert view.number_of_nodes() == 9
    assert view.nodes[0]["code"] == (1, 1)


@pytest.mark.parametrize(
    "m,n,t,optimum",
    [(3, 2, 1, 3), (2, 3, 1, 4), (2, 2, 2, 2), (4, 2, 1, 4), (3, 1, 1, 1)],
)
def test_optimum_values(m, n, t, optimum):
    cert = max_avoiding(Box(m, n), t)
    assert cert.optimum == optimum
    assert len(cert.canonical) == optimum


def test_all_optima_of_small_box_are_stars():
    cert = max_avoiding(Box(3, 2), 1, mode="all")
    assert cert.all_stars
    assert cert.orbit_count == 1
    assert cert.optima_count == 6
    assert cert.counterexample is None


def test_binary_cube_has_non_star_optima():
    cert = max_avoiding(Box(2, 3), 1, mode="all")
    assert cert.optimum == 4
    assert not cert.all_stars
    assert cert.orbit_count >= 2
    assert not is_t_star(cert.counterexample, 1)


@pytest.mark.slow
def test_optimum_of_three_cube():
    cert = max_avoiding(Box(3, 3), 1, mode="all")
    assert cert.optimum == 9
    assert cert.all_stars


@pytest.mark.parametrize("m,n,t", [(3, 2, 1), (2, 2, 1), (2, 3, 1), (2, 4, 2), (4, 2, 2)])
def test_search_matches_exhaustive_oracle(m, n, t):
    box = Box(m, n)
    optimum, optima = exhaustive_max_avoiding(box, t)
    cert = max_avoiding(box, t, mode="all")
    assert cert.optimum == optimum
    assert cert.optima_count == len(optima)
    assert cert.canonical == optima[0]


def test_canonical_family_is_lex_least():
    box = Box(3, 2)
    graph = build_conflict_graph(box, 1)
    assert lex_least_optimum(graph, 3) == make_star(box, (1,), (1,))


def test_vertex_order_does_not_change_the_result():
    box = Box(2, 3)
    rng = np.random.default_rng(4)
    plain = max_avoiding(box, 1, mode="all")
    shuffled = max_avoiding(box, 1, mode="all", vertex_order=rng.permutation(box.size))
    assert shuffled.optimum == plain.optimum
    assert shuffled.canonical == plain.canonical
    assert shuffled.optima_count == plain.optima_count


def test_vertex_order_must_be_a_permutation():
    with pytest.raises(DomainError):
        max_avoiding(Box(2, 2), 1, vertex_order=[0, 0, 1, 2])


def test_workers_do_not_change_the_result():
    box = Box(3, 2)
    single = max_avoiding(box, 1, mode="all", workers=1)
    pooled = max_avoiding(box, 1, mode="all", workers=2)
    assert single.to_json() == pooled.to_json()


def test_search_budgets():
    with pytest.raises(BudgetError):
        max_avoiding(Box(5, 7), 1, mode="all")
    with pytest.raises(BudgetError):
        build_conflict_graph(Box(2, 21), 1)
    with pytest.raises(BudgetError):
        exhaustive_max_avoiding(Box(5, 2), 1)


@pytest.mark.parametrize("seed", range(10))
def test_canonical_form_is_orbit_invariant(seed):
    rng = np.random.default_rng(seed)
    box = Box(3, 3)
    group = SymmetryGroup(box)
    F = random_family(box, rng, density=0.3)
    g = group.random_element(rng)
    image = group.act(g, F)
    assert len(image) == len(F)
    assert group.canonical_form(image) == group.canonical_form(F)


def test_vertex_permutation_matches_action():
    box = Box(3, 2)
    group = SymmetryGroup(box)
    g = group.random_element(np.random.default_rng(2))
    perm = group.vertex_permutation(g)
    for i, x in enumerate(box.codes()):
        assert box.code_at(int(perm[i])) == g.apply(x)


def test_group_action_keeps_avoidance():
    rng = np.random.default_rng(9)
    box = Box(4, 3)
    group = SymmetryGroup(box)
    F = avoiding_family(box, 2, rng)
    assert group.order() == 24 ** 3 * 6
    assert is_avoiding(group.act(group.random_element(rng), F), 2)[0]


def test_canonical_form_of_empty_family():
    assert SymmetryGroup(Box(3, 2)).canonical_form(Family.empty(Box(3, 2))) == ()


def test_verify_main_theorem_outside_regime():
    report = verify_main_theorem(Box(3, 2), 1)
    assert report.passed
    assert report.status == "observation"
    assert report.details["label"] == "outside-regime observation"
    assert report.details["optimum_matches"]
    assert report.details["conclusion_holds"]


def test_verify_main_theorem_records_non_star_optima():
    report = verify_main_theorem(Box(2, 3), 1)
    assert report.passed
    assert not report.details["conclusion_holds"]
    assert report.witness is not None


def test_near_star_check_on_star():
    box = Box(8, 3)
    report = near_star_completion_check(make_star(box, (1,), (1,)), (1,), (1,), 1)
    assert report.passed
    assert report.status == "verified"
    assert report.margin == 0


def test_near_star_check_hypotheses():
    star = make_star(Box(3, 3), (1,), (1,))
    assert near_star_completion_check(star, (1,), (1,), 1).status == "hypotheses-unmet"
    full = Family.full(Box(8, 2))
    assert near_star_completion_check(full, (1,), (1,), 1).status == "hypotheses-unmet"
    with pytest.raises(DomainError):
        near_star_completion_check(make_star(Box(8, 3), (1,), (1,)), (1, 2), (1, 1), 1)


def test_near_star_search():
    report = near_star_completion_search(Box(8, 3), (1,), (1,), 1)
    assert report.passed
    assert report.details["outside_cap"] == 1
    assert report.details["max_completion"] == 16
    assert report.details["target"] == 64
