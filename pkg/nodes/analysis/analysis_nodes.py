"""
Analysis nodes for AGLAB.
Hypercontractivity, stability interpolation, Hoffman bound and measure boosting checks.
"""

import itertools
from fractions import Fraction

import numpy as np

from engine.analysis import (
    boost_pipeline_trace,
    boost_step_search,
    check_boost_trace,
    check_hoffman,
    check_hypercontractivity,
    check_stab_interpolation,
    check_stability_monotone,
    globalness,
    homogeneity,
    indicator,
)
from engine.core import Box, Family
from engine.corpus import cross_agreeing_pair, random_family
from engine.errors import BudgetError, DomainError, PreconditionError
from engine.measure import ProductMeasure, as_fraction
from engine.report import Report, to_jsonable
from utils.base_node import AgLabNodeBase
from utils.family_io import family_from_payload, pair_from_payload

STABILITY_GRID = tuple(Fraction(k, 10) for k in range(1, 11))
HOFFMAN_EXHAUSTIVE_LIMIT = 6


def _hyper_report(F, q):
    report = check_hypercontractivity(F, q=q)
    if report.status == "hypotheses-unmet":
        return report
    r = globalness(indicator(F))
    tau = homogeneity(F)
    if r.squared() != tau:
        return Report.verdict("hyper", report.params, False, witness={"codes": F},
                              details={"globalness": r, "homogeneity": tau, "kind": "globalness^2 != homogeneity"})
    report.details["globalness_squared_is_homogeneity"] = True
    return report


def _hyper_trial(rng, params):
    F = random_family(Box(params["m"], params["n"]), rng)
    return _hyper_report(F, params["q"])


class HypercontractivityNode(AgLabNodeBase):
    """
    ‖T_ρ 1_F‖_q <= ‖1_F‖_2 at ρ = ln q / (32 r q), plus globalness(1_F)^2 = homogeneity(F).
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 16}),
                "n": ("INT", {"default": 2, "min": 1, "max": 6}),
                "q": ("INT", {"default": 4, "min": 2, "max": 64}),
                "trials": ("INT", {"default": 500, "min": 1, "max": 100000}),
            },
            "optional": {
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Analysis"
    CHECK = "hyper"
    COMMAND = "check hyper"

    def process(self, m, n, q, trials, input="", **_):
        payload = self.load_input(input)
        if payload is not None:
            return ([_hyper_report(family_from_payload(payload), q)],)
        self.box(m, n)
        params = {"m": m, "n": n, "q": q}
        return ([self.summarize(self.CHECK, params, self.run_trials(_hyper_trial, trials, params))],)


def _stab_trial(rng, params):
    box = Box(params["m"], params["n"])
    F = random_family(box, rng)
    report = check_stab_interpolation(indicator(F), params["rho"], params["t"])
    monotone = check_stability_monotone(F, ProductMeasure.uniform(box), STABILITY_GRID)
    if not monotone.passed:
        return monotone
    report.details["stability_monotone"] = True
    return report


class StabInterpolationNode(AgLabNodeBase):
    """
    Stab_ρ(f) <= ‖f‖_2^{2(1-1/t)} Stab_{ρ^t}(f)^{1/t}, and Stab_ρ nondecreasing in ρ.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 16}),
                "n": ("INT", {"default": 2, "min": 1, "max": 6}),
                "rho": ("RATIONAL", {"default": "1/2"}),
                "t": ("INT", {"default": 2, "min": 2, "max": 64}),
                "trials": ("INT", {"default": 500, "min": 1, "max": 100000}),
            }
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Analysis"
    CHECK = "stab-interp"
    COMMAND = "check stab-interp"

    def process(self, m, n, rho, t, trials, **_):
        self.box(m, n)
        rho = as_fraction(rho)
        if not 0 <= rho <= 1:
            raise DomainError(f"rho={rho} outside [0, 1]")
        params = {"m": m, "n": n, "rho": rho, "t": t}
        return ([self.summarize(self.CHECK, params, self.run_trials(_stab_trial, trials, params))],)


def _hoffman_trial(rng, params):
    G1, G2 = cross_agreeing_pair(Box(params["m"], params["n"]), rng)
    return check_hoffman(G1, G2)


def _hoffman_exhaustive(box):
    if box.size > HOFFMAN_EXHAUSTIVE_LIMIT:
        raise BudgetError(f"all pairs of subfamilies of {box} exceed the exhaustive limit")
    bits = np.arange(box.size)
    families = [Family.from_mask(box, (mask >> bits) & 1 == 1) for mask in range(1 << box.size)]
    reports, skipped = [], 0
    for G1, G2 in itertools.product(families, repeat=2):
        try:
            reports.append(check_hoffman(G1, G2))
        except PreconditionError:
            skipped += 1
    return reports, skipped


class HoffmanNode(AgLabNodeBase):
    """
    α1 α2 <= (λ/(1-λ))^2 (1-α1)(1-α2) for cross-intersecting families.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 16}),
                "n": ("INT", {"default": 2, "min": 1, "max": 6}),
                "trials": ("INT", {"default": 1000, "min": 1, "max": 100000}),
                "exhaustive": ("BOOLEAN", {"default": False}),
            },
            "optional": {
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Analysis"
    CHECK = "hoffman"
    COMMAND = "check hoffman"

    def process(self, m, n, trials, exhaustive=False, input="", **_):
        payload = self.load_input(input)
        if payload is not None:
            G1, G2, nu = pair_from_payload(payload)
            return ([check_hoffman(G1, G2, nu)],)
        box = self.box(m, n)
        params = {"m": m, "n": n, "exhaustive": exhaustive}
        if exhaustive:
            reports, skipped = _hoffman_exhaustive(box)
            equalities = [r.params for r in reports if r.details.get("equality")]
            details = {"not_cross_intersecting": skipped, "equality_cases": len(equalities),
                       "equality_examples": equalities[:5]}
            summary = self.summarize(self.CHECK, params, reports, details)
            summary.margin = to_jsonable(min((Fraction(r.margin) for r in reports), default=None))
            return ([summary],)
        return ([self.summarize(self.CHECK, params, self.run_trials(_hoffman_trial, trials, params))],)


def _boost_step_trial(rng, params):
    box = Box(params["m"], params["n"])
    F = random_family(box, rng)
    result = boost_step_search(F, ProductMeasure.uniform(box), params["s"], params["tau"])
    return result.to_report({"m": box.m, "n": box.n, "s": params["s"], "size": len(F)})


class GluingBoostNode(AgLabNodeBase):
    """
    Best balanced gluing [m] -> [m/s] against both boosting bounds.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 8, "min": 2, "max": 32}),
                "n": ("INT", {"default": 1, "min": 1, "max": 3}),
                "s": ("INT", {"default": 4, "min": 2, "max": 16}),
                "trials": ("INT", {"default": 100, "min": 1, "max": 100000}),
            },
            "optional": {
                "tau": ("RATIONAL", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Analysis"
    CHECK = "gluing-boost"
    COMMAND = "check gluing-boost"

    def process(self, m, n, s, trials, tau="", **_):
        self.box(m, n)
        params = {"m": m, "n": n, "s": s, "tau": as_fraction(tau) if tau else None}
        return ([self.summarize(self.CHECK, params, self.run_trials(_boost_step_trial, trials, params))],)


def _boost_trace_trial(rng, params):
    box = Box(params["m"], params["n"])
    F = random_family(box, rng)
    trace = boost_pipeline_trace(F, ProductMeasure.uniform(box), params["b"], params["tau"], seed=rng)
    return check_boost_trace(trace, {"m": box.m, "n": box.n, "b": params["b"], "tau": params["tau"]})


class BoostTraceNode(AgLabNodeBase):
    """
    The iterated boosting procedure, traced step by step.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 16, "min": 2, "max": 256}),
                "n": ("INT", {"default": 2, "min": 1, "max": 4}),
                "b": ("INT", {"default": 2, "min": 2, "max": 16}),
                "tau": ("RATIONAL", {"default": "2"}),
                "trials": ("INT", {"default": 50, "min": 1, "max": 10000}),
            }
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Analysis"
    CHECK = "boost-trace"
    COMMAND = "check boost-trace"

    def process(self, m, n, b, tau, trials, **_):
        self.box(m, n)
        params = {"m": m, "n": n, "b": b, "tau": as_fraction(tau)}
        return ([self.summarize(self.CHECK, params, self.run_trials(_boost_trace_trial, trials, params))],)


NODE_CLASS_MAPPINGS = {
    "AgLabHypercontractivity": HypercontractivityNode,
    "AgLabStabInterpolation": StabInterpolationNode,
    "AgLabHoffman": HoffmanNode,
    "AgLabGluingBoost": GluingBoostNode,
    "AgLabBoostTrace": BoostTraceNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "AgLabHypercontractivity": "AGLAB Hypercontractivity",
    "AgLabStabInterpolation": "AGLAB Stability Interpolation",
    "AgLabHoffman": "AGLAB Hoffman Bound",
    "AgLabGluingBoost": "AGLAB Gluing Boost Step",
    "AgLabBoostTrace": "AGLAB Boost Trace",
}
