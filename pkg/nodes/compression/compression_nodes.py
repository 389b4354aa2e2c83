"""
Compression nodes for AGLAB.
Down-compression into the cube, the unbalanced cross-matching lemma and the monotone measure shift.
"""

from engine.compression import (
    check_compression_pipeline,
    check_monotone_shift,
    check_unbalanced_cross_matching,
    compression_report,
)
from engine.core import Box
from engine.corpus import cross_agreeing_pair, monotone_cube_family, unbalanced_pair
from engine.errors import DomainError
from engine.measure import as_fraction
from engine.report import Report
from utils.base_node import AgLabNodeBase
from utils.family_io import cube_from_payload, family_from_payload, pair_from_payload


def _compress_trial(rng, params):
    F1, F2 = cross_agreeing_pair(Box(params["m"], params["n"]), rng)
    return check_compression_pipeline(F1, F2)


class CompressNode(AgLabNodeBase):
    """
    Compression keeps the measure, lands in a monotone cube family and never lowers μ_{1/m};
    cross-agreeing pairs stay cross-agreeing with μ_{1/2}(A) + μ_{1/2}(B) <= 1.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 16}),
                "n": ("INT", {"default": 2, "min": 1, "max": 6}),
                "trials": ("INT", {"default": 500, "min": 1, "max": 100000}),
            },
            "optional": {
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Compression"
    CHECK = "compress"
    COMMAND = "check compress"

    def process(self, m, n, trials, input="", **_):
        payload = self.load_input(input)
        if payload is not None:
            if "families" in payload:
                F1, F2, _nu = pair_from_payload(payload)
                return ([check_compression_pipeline(F1, F2)],)
            return ([compression_report(family_from_payload(payload))],)
        self.box(m, n)
        params = {"m": m, "n": n}
        return ([self.summarize(self.CHECK, params, self.run_trials(_compress_trial, trials, params))],)


def _unbalanced_trial(rng, params):
    box = Box(params["m"], params["n"])
    pair = unbalanced_pair(box, rng)
    if pair is None:
        return Report.unmet("unbalanced", params, "no sampled pair satisfies mu1 + mu2^log_m(2) > 1")
    return check_unbalanced_cross_matching(*pair)


class UnbalancedNode(AgLabNodeBase):
    """
    μ(F1) + μ(F2)^{log_m 2} > 1 forces a pair of codes that agree nowhere.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 16}),
                "n": ("INT", {"default": 2, "min": 1, "max": 6}),
                "trials": ("INT", {"default": 1000, "min": 1, "max": 100000}),
            },
            "optional": {
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Compression"
    CHECK = "unbalanced"
    COMMAND = "check unbalanced"

    def process(self, m, n, trials, input="", **_):
        payload = self.load_input(input)
        if payload is not None:
            F1, F2, _nu = pair_from_payload(payload)
            return ([check_unbalanced_cross_matching(F1, F2)],)
        self.box(m, n)
        params = {"m": m, "n": n}
        return ([self.summarize(self.CHECK, params, self.run_trials(_unbalanced_trial, trials, params))],)


def _shift_trial(rng, params):
    A = monotone_cube_family(params["n"], rng)
    return check_monotone_shift(A, params["p"], params["q"], params["alpha"])


class MonotoneShiftNode(AgLabNodeBase):
    """
    Monotone A ⊆ {0,1}^n with μ_p(A) >= p^α has μ_q(A) >= q^α for every q >= p.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "n": ("INT", {"default": 4, "min": 1, "max": 16}),
                "p": ("RATIONAL", {"default": "1/3"}),
                "q": ("RATIONAL", {"default": "1/2"}),
                "trials": ("INT", {"default": 300, "min": 1, "max": 100000}),
            },
            "optional": {
                "alpha": ("RATIONAL", {"default": ""}),
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Compression"
    CHECK = "monotone-shift"
    COMMAND = "check monotone-shift"

    def process(self, n, p, q, trials, alpha="", input="", **_):
        p, q = as_fraction(p), as_fraction(q)
        alpha = as_fraction(alpha) if alpha else None
        payload = self.load_input(input)
        if payload is not None:
            return ([check_monotone_shift(cube_from_payload(payload), p, q, alpha)],)
        if not 0 <= p <= q <= 1:
            raise DomainError(f"need 0 <= p <= q <= 1, got p={p}, q={q}")
        params = {"n": n, "p": p, "q": q, "alpha": alpha}
        return ([self.summarize(self.CHECK, params, self.run_trials(_shift_trial, trials, params))],)


NODE_CLASS_MAPPINGS = {
    "AgLabCompress": CompressNode,
    "AgLabUnbalanced": UnbalancedNode,
    "AgLabMonotoneShift": MonotoneShiftNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "AgLabCompress": "AGLAB Compression Pipeline",
    "AgLabUnbalanced": "AGLAB Unbalanced Cross-Matching",
    "AgLabMonotoneShift": "AGLAB Monotone Shift",
}
