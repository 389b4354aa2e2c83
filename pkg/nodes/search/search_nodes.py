"""
Search nodes for AGLAB.
Exact maximum avoiding families, the t-star theorem at desk scale and the near-star completion.
"""

import logging
from pathlib import Path

from engine.core import Box, make_star
from engine.corpus import perturbed_star
from engine.errors import DomainError
from engine.report import Report
from engine.search import (
    EXHAUSTIVE_LIMIT,
    build_conflict_graph,
    conflict_graph_to_dimacs,
    exhaustive_max_avoiding,
    max_avoiding,
    near_star_completion_check,
    near_star_completion_search,
    verify_main_theorem,
)
from nodes.core.constructors import parse_ints
from utils.base_node import AgLabNodeBase
from utils.family_io import family_from_payload

logger = logging.getLogger(__name__)


class SearchNode(AgLabNodeBase):
    """
    Maximum (t-1)-avoiding family of [m]^n by branch-and-bound on the conflict graph.

    With --all every optimum is enumerated and classified up to symmetry; with --exhaustive the
    optimum is cross-checked against brute force (m^n <= 20).
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 64}),
                "n": ("INT", {"default": 2, "min": 1, "max": 20}),
                "t": ("INT", {"default": 1, "min": 1, "max": 21}),
            },
            "optional": {
                "all": ("BOOLEAN", {"default": False}),
                "exhaustive": ("BOOLEAN", {"default": False}),
                "dimacs": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Search"
    CHECK = "search"
    COMMAND = "search"

    def process(self, m, n, t, all=False, exhaustive=False, dimacs="", **_):
        box = self.box(m, n)
        graph = build_conflict_graph(box, t)
        if dimacs:
            Path(dimacs).write_text(conflict_graph_to_dimacs(graph), encoding="utf-8")
            logger.info("wrote DIMACS complement graph to %s", dimacs)
        cert = max_avoiding(box, t, mode="all" if all else "one", budget_nodes=self.config.budget_nodes,
                            budget_seconds=self.config.budget_seconds, workers=self.config.workers,
                            graph=graph)
        params = {"m": m, "n": n, "t": t, "mode": "all" if all else "one"}
        details = {"certificate": cert.to_json(), "graph": graph.degree_stats(), "nodes": cert.nodes}
        passed = True
        if exhaustive:
            if box.size > EXHAUSTIVE_LIMIT:
                raise DomainError(f"--exhaustive needs m^n <= {EXHAUSTIVE_LIMIT}, got {box.size}")
            optimum, optima = exhaustive_max_avoiding(box, t)
            details["exhaustive_optimum"] = optimum
            details["exhaustive_optima"] = len(optima)
            passed = optimum == cert.optimum
            if all:
                passed = passed and len(optima) == cert.optima_count
        return ([Report.verdict(self.CHECK, params, passed, margin=cert.optimum - box.m ** max(n - t, 0),
                                witness=cert.counterexample, details=details)],)


class VerifyTheoremNode(AgLabNodeBase):
    """
    Exact optimum against m^{n-t} and the t-stars; outside the proven regime this is an observation.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 64}),
                "n": ("INT", {"default": 2, "min": 1, "max": 20}),
                "t": ("INT", {"default": 1, "min": 1, "max": 20}),
            }
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Search"
    CHECK = "verify-theorem"
    COMMAND = "verify-theorem"

    def process(self, m, n, t, **_):
        box = self.box(m, n)
        return ([verify_main_theorem(box, t, budget_nodes=self.config.budget_nodes,
                                     budget_seconds=self.config.budget_seconds, workers=self.config.workers)],)


def star_coords(t):
    return tuple(range(1, t + 1))


def _near_star_trial(rng, params):
    box = Box(params["m"], params["n"])
    t = params["t"]
    star = make_star(box, star_coords(t), (1,) * t)
    F = perturbed_star(star, rng, removed=int(rng.integers(0, 3)), added=int(rng.integers(0, 2)))
    return near_star_completion_check(F, star_coords(t), (1,) * t, t)


class NearStarNode(AgLabNodeBase):
    """
    A large avoiding family with few codes outside a t-star is that t-star.

    Trials perturb the star; the exhaustive part maximizes the completion over every small
    outside set.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 8, "min": 2, "max": 32}),
                "n": ("INT", {"default": 3, "min": 1, "max": 6}),
                "t": ("INT", {"default": 1, "min": 1, "max": 6}),
                "trials": ("INT", {"default": 20, "min": 0, "max": 100000}),
            },
            "optional": {
                "coords": ("STRING", {"default": ""}),
                "values": ("STRING", {"default": ""}),
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Search"
    CHECK = "near-star"
    COMMAND = "check near-star"

    def process(self, m, n, t, trials, coords="", values="", input="", **_):
        Z = parse_ints(coords) or star_coords(t)
        x = parse_ints(values) or (1,) * len(Z)
        payload = self.load_input(input)
        if payload is not None:
            return ([near_star_completion_check(family_from_payload(payload), Z, x, t)],)
        box = self.box(m, n)
        params = {"m": m, "n": n, "t": t}
        reports = [near_star_completion_search(box, Z, x, t)]
        if trials:
            reports.append(self.summarize(self.CHECK, params, self.run_trials(_near_star_trial, trials, params)))
        return (reports,)


NODE_CLASS_MAPPINGS = {
    "AgLabSearch": SearchNode,
    "AgLabVerifyTheorem": VerifyTheoremNode,
    "AgLabNearStar": NearStarNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "AgLabSearch": "AGLAB Maximum Avoiding Search",
    "AgLabVerifyTheorem": "AGLAB Verify t-Star Theorem",
    "AgLabNearStar": "AGLAB Near-Star Completion",
}
