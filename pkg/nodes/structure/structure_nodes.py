"""
Structure nodes for AGLAB.
Spread approximation, shadows, restriction lemmas, sunflowers, systems and covering numbers.
"""

import math

from engine.core import Box, Family, embed_code, is_avoiding
from engine.corpus import agreeing_restrictions, avoiding_family, random_family, triangle_restrictions
from engine.errors import DomainError
from engine.measure import as_fraction
from engine.report import Report
from engine.search import max_avoiding
from engine.structure import (
    SunflowerQuery,
    avoid_values,
    check_all_disjoint_shadows,
    check_kk_direct,
    check_kk_exhaustive,
    check_large_restriction,
    check_simplification,
    check_sst_system,
    covering_number,
    embedded_avoidance_agrees,
    kk_contrapositive_holds,
    spread_approximation,
    verify_spread_decomposition,
)
from utils.base_node import AgLabNodeBase
from utils.family_io import family_from_payload, restrictions_from_payload, sets_from_payload, system_from_payload


def _spread_report(F, tau, q):
    return verify_spread_decomposition(F, spread_approximation(F, tau, q))


def _spread_trial(rng, params):
    F = random_family(Box(params["m"], params["n"]), rng)
    return _spread_report(F, params["tau"], params["q"])


class SpreadNode(AgLabNodeBase):
    """
    Spread approximation of a family, re-verified independently.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 4, "min": 2, "max": 16}),
                "n": ("INT", {"default": 3, "min": 1, "max": 6}),
                "tau": ("RATIONAL", {"default": "2"}),
                "q": ("INT", {"default": 2, "min": 1, "max": 16}),
                "trials": ("INT", {"default": 200, "min": 1, "max": 100000}),
            },
            "optional": {
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "spread"
    COMMAND = "spread"

    def process(self, m, n, tau, q, trials, input="", **_):
        tau = as_fraction(tau)
        payload = self.load_input(input)
        if payload is not None:
            return ([_spread_report(family_from_payload(payload), tau, q)],)
        self.box(m, n)
        params = {"m": m, "n": n, "tau": tau, "q": q}
        return ([self.summarize(self.CHECK, params, self.run_trials(_spread_trial, trials, params))],)


def _kk_report(F, l):
    report = check_kk_direct(F, l)
    if l < F.box.n:
        contra = kk_contrapositive_holds(F, l)
        report.details["contrapositive"] = contra
        if not contra:
            return Report.verdict("kk", report.params, False, witness={"codes": F},
                                  details={**report.details, "kind": "contrapositive bound"})
    return report


def _kk_trial(rng, params):
    F = random_family(Box(params["m"], params["n"]), rng)
    return _kk_report(F, params["l"])


class KruskalKatonaNode(AgLabNodeBase):
    """
    |∂_l F| >= δ^{l/n} |∂_l [m]^n| and its contrapositive form.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 16}),
                "n": ("INT", {"default": 3, "min": 1, "max": 6}),
                "l": ("INT", {"default": 1, "min": 1, "max": 6}),
                "trials": ("INT", {"default": 1000, "min": 1, "max": 100000}),
                "exhaustive": ("BOOLEAN", {"default": False}),
            },
            "optional": {
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "kk"
    COMMAND = "check kk"

    def process(self, m, n, l, trials, exhaustive=False, input="", **_):
        payload = self.load_input(input)
        if payload is not None:
            return ([_kk_report(family_from_payload(payload), l)],)
        box = self.box(m, n)
        if exhaustive:
            return ([check_kk_exhaustive(box, l)],)
        params = {"m": m, "n": n, "l": l}
        return ([self.summarize(self.CHECK, params, self.run_trials(_kk_trial, trials, params))],)


def parse_forbidden(text):
    """'1:2,3;2:1' -> {1: {2, 3}, 2: {1}}."""
    forbidden = {}
    for chunk in filter(None, (part.strip() for part in (text or "").split(";"))):
        try:
            coord, values = chunk.split(":")
            forbidden[int(coord)] = {int(v) for v in values.split(",") if v.strip()}
        except ValueError as exc:
            raise DomainError(f"bad forbidden-value entry {chunk!r}; expected 'i:v,w'") from exc
    return forbidden


def _avoid_report(F, forbidden):
    try:
        return avoid_values(F, None, forbidden)[1]
    except DomainError as exc:
        return Report.unmet("avoid", {"m": F.box.m, "n": F.box.n}, str(exc))


def _avoid_trial(rng, params):
    box = Box(params["m"], params["n"])
    F = random_family(box, rng)
    forbidden = params["forbidden"] or {int(rng.integers(1, box.n + 1)): {int(rng.integers(1, box.m + 1))}}
    return _avoid_report(F, forbidden)


class AvoidValuesNode(AgLabNodeBase):
    """
    Dropping a few forbidden values keeps most of the measure and the homogeneity.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 8, "min": 2, "max": 32}),
                "n": ("INT", {"default": 2, "min": 1, "max": 4}),
                "trials": ("INT", {"default": 200, "min": 1, "max": 100000}),
            },
            "optional": {
                "forbidden": ("STRING", {"default": ""}),
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "avoid"
    COMMAND = "check avoid"

    def process(self, m, n, trials, forbidden="", input="", **_):
        forbidden = parse_forbidden(forbidden)
        payload = self.load_input(input)
        if payload is not None:
            if not forbidden:
                raise DomainError("--forbidden is required with --input")
            return ([_avoid_report(family_from_payload(payload), forbidden)],)
        self.box(m, n)
        params = {"m": m, "n": n, "forbidden": forbidden}
        summary_params = {"m": m, "n": n, "forbidden": {c: sorted(v) for c, v in forbidden.items()}}
        return ([self.summarize(self.CHECK, summary_params, self.run_trials(_avoid_trial, trials, params))],)


def _restriction_trial(rng, params):
    box = Box(params["m"], params["n"])
    F = random_family(box, rng)
    H = tuple(sorted(int(c) + 1 for c in rng.choice(box.n, size=params["h"], replace=False)))
    return check_large_restriction(F, None, H, params["p"])


class RestrictionProbabilityNode(AgLabNodeBase):
    """
    A random restriction on H keeps at least half the measure with probability > p.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 16}),
                "n": ("INT", {"default": 3, "min": 1, "max": 6}),
                "h": ("INT", {"default": 1, "min": 0, "max": 6}),
                "p": ("RATIONAL", {"default": "1/4"}),
                "trials": ("INT", {"default": 200, "min": 1, "max": 100000}),
            }
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "restriction-prob"
    COMMAND = "check restriction-prob"

    def process(self, m, n, h, p, trials, **_):
        self.box(m, n)
        if h > n:
            raise DomainError(f"|H| = {h} exceeds n = {n}")
        params = {"m": m, "n": n, "h": h, "p": as_fraction(p)}
        return ([self.summarize(self.CHECK, params, self.run_trials(_restriction_trial, trials, params))],)


def _simplification_trial(rng, params):
    box = Box(params["m"], params["n"])
    restrictions = agreeing_restrictions(box, params["t"], params["q"], params["count"], rng)
    return check_simplification(restrictions, box, params["t"], params["eps"])


class SimplificationNode(AgLabNodeBase):
    """
    A t-agreeing non-trivial set of restrictions covers at most ε m^{n-t} codes.
    Without an input file the three pairwise-agreeing restrictions on coordinates 1..3 are used.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 48, "min": 2, "max": 1024}),
                "n": ("INT", {"default": 3, "min": 1, "max": 16}),
                "t": ("INT", {"default": 1, "min": 1, "max": 16}),
                "eps": ("RATIONAL", {"default": "1"}),
                "trials": ("INT", {"default": 0, "min": 0, "max": 100000}),
            },
            "optional": {
                "q": ("INT", {"default": 1, "min": 1, "max": 16}),
                "count": ("INT", {"default": 3, "min": 1, "max": 64}),
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "simplification"
    COMMAND = "check simplification"

    def process(self, m, n, t, eps, trials=0, q=1, count=3, input="", **_):
        eps = as_fraction(eps)
        payload = self.load_input(input)
        if payload is not None:
            box, restrictions = restrictions_from_payload(payload)
            return ([check_simplification(restrictions, box, t, eps)],)
        box = self.box(m, n)
        if trials == 0:
            if n < 3:
                raise DomainError("the default restriction set needs n >= 3")
            return ([check_simplification(triangle_restrictions(), box, t, eps)],)
        params = {"m": m, "n": n, "t": t, "eps": eps, "q": q, "count": count}
        return ([self.summarize(self.CHECK, params, self.run_trials(_simplification_trial, trials, params))],)


def _shadows_trial(rng, params):
    F = avoiding_family(Box(params["m"], params["n"]), params["t"], rng)
    return check_all_disjoint_shadows(F, params["t"])


class DisjointShadowsNode(AgLabNodeBase):
    """
    Refined quotients of distinct t-shadow members never meet in t-1 elements.
    Runs on the canonical optimum of the box, then on seeded greedy avoiding families.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 5, "min": 2, "max": 16}),
                "n": ("INT", {"default": 3, "min": 1, "max": 6}),
                "t": ("INT", {"default": 1, "min": 1, "max": 6}),
                "trials": ("INT", {"default": 0, "min": 0, "max": 100000}),
            },
            "optional": {
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "shadows-disjoint"
    COMMAND = "check shadows-disjoint"

    def process(self, m, n, t, trials=0, input="", **_):
        payload = self.load_input(input)
        if payload is not None:
            return ([check_all_disjoint_shadows(family_from_payload(payload), t)],)
        box = self.box(m, n)
        cert = max_avoiding(box, t, budget_nodes=self.config.budget_nodes,
                            budget_seconds=self.config.budget_seconds, workers=self.config.workers)
        reports = [check_all_disjoint_shadows(cert.canonical, t)]
        if trials:
            params = {"m": m, "n": n, "t": t}
            reports.append(self.summarize(self.CHECK, params, self.run_trials(_shadows_trial, trials, params)))
        return (reports,)


def _sunflower_trial(rng, params):
    box = Box(params["m"], params["n"])
    t = params["t"]
    F = random_family(box, rng) if rng.random() < 0.5 else avoiding_family(box, t, rng)
    agrees = embedded_avoidance_agrees(F, t)
    return Report.verdict("sunflower", {"m": box.m, "n": box.n, "t": t, "size": len(F)}, agrees,
                          witness=None if agrees else {"codes": F},
                          details={"avoiding": is_avoiding(F, t)[0]})


class SunflowerNode(AgLabNodeBase):
    """
    Sunflower search in a set system, or (without input) the equivalence between
    (t-1)-avoidance and the absence of 2-petal sunflowers with core t-1 on seeded families.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 16}),
                "n": ("INT", {"default": 3, "min": 1, "max": 6}),
                "t": ("INT", {"default": 1, "min": 1, "max": 6}),
                "s": ("INT", {"default": 2, "min": 2, "max": 16}),
                "trials": ("INT", {"default": 200, "min": 1, "max": 100000}),
            },
            "optional": {
                "core": ("INT", {"default": -1, "min": -1, "max": 64}),
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "sunflower"
    COMMAND = "check sunflower"

    def process(self, m, n, t, s, trials, core=-1, input="", **_):
        payload = self.load_input(input)
        if payload is not None:
            sets = sets_from_payload(payload)
            found = SunflowerQuery(sets, s, None if core < 0 else core).find()
            params = {"s": s, "core": None if core < 0 else core, "sets": len(sets)}
            witness = None if found is None else {"indices": list(found[0]), "core": sorted(found[1])}
            return ([Report.verdict(self.CHECK, params, True, witness=witness,
                                    details={"found": found is not None}, status="observation")],)
        self.box(m, n)
        params = {"m": m, "n": n, "t": t}
        return ([self.summarize(self.CHECK, params, self.run_trials(_sunflower_trial, trials, params))],)


class SstSystemNode(AgLabNodeBase):
    """
    Both conditions of an (S, s, t)-system for externally supplied parts.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "input": ("STRING", {"default": ""}),
                "s": ("INT", {"default": 2, "min": 2, "max": 16}),
                "t": ("INT", {"default": 1, "min": 1, "max": 16}),
            }
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "sst"
    COMMAND = "check sst"

    def process(self, input, s, t, **_):
        payload = self.load_input(input)
        if payload is None:
            raise DomainError("sst needs --input with {\"parts\": [{\"S\": [...], \"B\": [[...]]}]}")
        return ([check_sst_system(system_from_payload(payload), s, t)],)


class CoveringNode(AgLabNodeBase):
    """
    Covering number of a set system; without input, of the embedded full box [m]^n (which is m).
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 8}),
                "n": ("INT", {"default": 2, "min": 1, "max": 4}),
            },
            "optional": {
                "input": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Structure"
    CHECK = "covering"
    COMMAND = "check covering"

    def process(self, m, n, input="", **_):
        payload = self.load_input(input)
        if payload is not None:
            sets = sets_from_payload(payload)
            value = covering_number(sets)
            value = None if value == math.inf else value
            return ([Report.verdict(self.CHECK, {"sets": len(sets)}, True, margin=value,
                                    details={"covering_number": value, "has_empty_set": value is None},
                                    status="observation")],)
        box = self.box(m, n)
        sets = [embed_code(x, m) for x in Family.full(box).codes()]
        value = covering_number(sets)
        return ([Report.verdict(self.CHECK, {"m": m, "n": n}, value == m, margin=value - m,
                                details={"covering_number": value, "expected": m})],)


NODE_CLASS_MAPPINGS = {
    "AgLabSpread": SpreadNode,
    "AgLabKruskalKatona": KruskalKatonaNode,
    "AgLabAvoidValues": AvoidValuesNode,
    "AgLabRestrictionProbability": RestrictionProbabilityNode,
    "AgLabSimplification": SimplificationNode,
    "AgLabDisjointShadows": DisjointShadowsNode,
    "AgLabSunflower": SunflowerNode,
    "AgLabSstSystem": SstSystemNode,
    "AgLabCovering": CoveringNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "AgLabSpread": "AGLAB Spread Approximation",
    "AgLabKruskalKatona": "AGLAB Kruskal-Katona",
    "AgLabAvoidValues": "AGLAB Avoid Values",
    "AgLabRestrictionProbability": "AGLAB Large Restriction",
    "AgLabSimplification": "AGLAB Simplification Bound",
    "AgLabDisjointShadows": "AGLAB Disjoint Shadows",
    "AgLabSunflower": "AGLAB Sunflower",
    "AgLabSstSystem": "AGLAB (S,s,t)-System",
    "AgLabCovering": "AGLAB Covering Number",
}
