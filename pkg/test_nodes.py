#!/usr/bin/env python3
"""
Tests that the AGLAB nodes are registered and shaped correctly.
"""

import pytest

from engine.errors import DomainError
from engine.report import Report
from nodes.core.constructors import SrtNode, StarNode, parse_ints
from nodes.registry import NODE_MODULES, commands, load_nodes
from nodes.structure.structure_nodes import KruskalKatonaNode, parse_forbidden
from utils.base_node import AgLabNodeBase, trial_rng
from utils.run_config import RunConfig

SUBCOMMANDS = {
    "search", "verify-theorem", "spread", "star", "srt", "convert",
    "check kk", "check hyper", "check stab-interp", "check hoffman", "check gluing-boost",
    "check boost-trace", "check restriction-prob", "check avoid", "check covering", "check sst",
    "check sunflower", "check simplification", "check shadows-disjoint", "check compress",
    "check unbalanced", "check monotone-shift", "check gluing-consistency", "check near-star",
}

REQUIRED_ATTRS = ["INPUT_TYPES", "RETURN_TYPES", "FUNCTION", "CATEGORY", "CHECK", "COMMAND"]


def test_imports():
    """Every node module imports and contributes at least one node."""
    classes, names = load_nodes()
    assert set(classes) == set(names)
    for module in NODE_MODULES:
        assert any(cls.__module__ == module for cls in classes.values()), module


def test_main_module_mappings():
    import importlib

    main_module = importlib.import_module("__init__")
    assert main_module.NODE_CLASS_MAPPINGS
    assert set(main_module.NODE_CLASS_MAPPINGS) == set(main_module.NODE_DISPLAY_NAME_MAPPINGS)


@pytest.mark.parametrize("node_name,node_class", sorted(load_nodes()[0].items()))
def test_node_structure(node_name, node_class):
    assert issubclass(node_class, AgLabNodeBase)
    for attr in REQUIRED_ATTRS:
        assert hasattr(node_class, attr), f"{node_name} missing {attr}"
    input_types = node_class.INPUT_TYPES()
    assert "required" in input_types
    assert node_class.RETURN_TYPES in (("REPORT",), ("FAMILY",), ("JSON",))
    assert node_class.FUNCTION == "process"
    assert node_class.CATEGORY.startswith("AGLAB/")
    for section in input_types.values():
        for name, (kind, *_) in section.items():
            assert isinstance(kind, list) or kind in ("INT", "FLOAT", "RATIONAL", "BOOLEAN", "STRING"), name


def test_commands_cover_every_subcommand():
    assert set(commands()) == SUBCOMMANDS


def test_duplicate_commands_are_rejected():
    with pytest.raises(ValueError):
        commands({"A": StarNode, "B": StarNode})


def test_unknown_module_is_skipped():
    classes, _ = load_nodes(["nodes.core.constructors", "nodes.no_such_module"])
    assert "AgLabStar" in classes


def test_star_node_output():
    (payload,) = StarNode().process(m=3, n=3, t=2, coords="1,3", values="2,1")
    assert payload["codes"] == [[2, 1, 1], [2, 2, 1], [2, 3, 1]]


def test_srt_node_output():
    (payload,) = SrtNode().process(m=3, n=4, t=1, r=1)
    assert len(payload["codes"]) == 21


def test_parse_helpers():
    assert parse_ints(" 1, 2,3") == (1, 2, 3)
    assert parse_ints("") == ()
    assert parse_forbidden("1:2,3; 2:1") == {1: {2, 3}, 2: {1}}
    with pytest.raises(DomainError):
        parse_ints("1,a")
    with pytest.raises(DomainError):
        parse_forbidden("1-2")


def test_trial_streams_depend_only_on_seed_and_index():
    assert trial_rng(5, 3).integers(0, 10 ** 9) == trial_rng(5, 3).integers(0, 10 ** 9)
    assert trial_rng(5, 3).integers(0, 10 ** 9) != trial_rng(5, 4).integers(0, 10 ** 9)


def test_summarize_counts_trials():
    node = KruskalKatonaNode(RunConfig(subcommand="check kk", seed=3))
    (reports,) = node.process(m=3, n=2, l=1, trials=12)
    (summary,) = reports
    assert isinstance(summary, Report)
    assert summary.passed
    assert summary.details["trials"] == 12
    assert summary.details["violations"] == 0


def test_summarize_reports_first_violation():
    node = AgLabNodeBase()
    bad = Report.verdict("x", {}, False, witness={"k": 1}, details={"why": "example"})
    good = Report.verdict("x", {}, True)
    summary = node.summarize("x", {}, [good, bad, bad])
    assert not summary.passed
    assert summary.witness == {"k": 1}
    assert summary.details["violations"] == 2
    assert summary.details["first_violation"] == {"why": "example"}


def test_all_unmet_trials_mark_the_summary():
    node = AgLabNodeBase()
    summary = node.summarize("x", {}, [Report.unmet("x", {}, "no"), Report.unmet("x", {}, "no")])
    assert summary.passed
    assert summary.status == "hypotheses-unmet"
