"""
Gluing nodes for AGLAB.
Measure consistency of gluings over a seeded corpus.
"""

from engine.corpus import random_family, random_measure
from engine.core import Box
from engine.measure import ProductMeasure, check_gluing_budget, check_measure_consistency, enumerate_gluings
from utils.base_node import AgLabNodeBase

GLUING_BUDGET = 10 ** 5


def _consistency_trial(rng, params):
    box = Box(params["m"], params["n"])
    F = random_family(box, rng)
    nu = random_measure(box, rng) if params["random_measure"] else ProductMeasure.uniform(box)
    gluings = enumerate_gluings(params["m"], params["m2"], params["b"], params["n"])
    return check_measure_consistency(F, nu, gluings)


class GluingConsistencyNode(AgLabNodeBase):
    """
    Every balanced gluing [m]^n -> [m2]^n keeps ν^π(F^π) >= ν(F) and multiplies balancedness
    by at most its fiber bound.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 4, "min": 2, "max": 16}),
                "n": ("INT", {"default": 2, "min": 1, "max": 4}),
                "m2": ("INT", {"default": 2, "min": 1, "max": 16}),
                "b": ("INT", {"default": 1, "min": 1, "max": 16}),
                "trials": ("INT", {"default": 100, "min": 1, "max": 100000}),
            },
            "optional": {
                "random_measure": ("BOOLEAN", {"default": False}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Measure"
    CHECK = "gluing-consistency"
    COMMAND = "check gluing-consistency"

    def process(self, m, n, m2, b, trials, random_measure=False, **_):
        self.box(m, n)
        total = check_gluing_budget(m, m2, b, n, GLUING_BUDGET)
        params = {"m": m, "n": n, "m2": m2, "b": b, "random_measure": random_measure}
        reports = self.run_trials(_consistency_trial, trials, params)
        return ([self.summarize(self.CHECK, params, reports, {"gluings_per_trial": total})],)


NODE_CLASS_MAPPINGS = {
    "AgLabGluingConsistency": GluingConsistencyNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "AgLabGluingConsistency": "AGLAB Gluing Consistency",
}
