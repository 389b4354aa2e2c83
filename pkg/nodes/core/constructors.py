"""
Constructor nodes for AGLAB.
Build stars and S_{t,r} families, and convert family files into other shapes.
"""

from engine.compression import monotonize
from engine.core import StarSpec, make_star, srt_family, srt_size
from engine.errors import DomainError
from utils.base_node import AgLabNodeBase
from utils.family_io import cube_to_payload, embedded_sets_payload, family_from_payload, family_to_payload


def parse_ints(text):
    """'1, 2,3' -> (1, 2, 3); blank -> ()."""
    text = (text or "").strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise DomainError(f"expected comma-separated integers, got {text!r}") from exc


class StarNode(AgLabNodeBase):
    """
    The t-star [m]^n[Z -> x]; Z defaults to the first t coordinates and x to all ones.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 64}),
                "n": ("INT", {"default": 2, "min": 1, "max": 16}),
                "t": ("INT", {"default": 1, "min": 1, "max": 16}),
            },
            "optional": {
                "coords": ("STRING", {"default": ""}),
                "values": ("STRING", {"default": ""}),
            },
        }

    RETURN_TYPES = ("FAMILY",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Core"
    CHECK = "star"
    COMMAND = "star"

    def process(self, m, n, t, coords="", values="", **_):
        box = self.box(m, n)
        coords = parse_ints(coords) or tuple(range(1, t + 1))
        values = parse_ints(values) or (1,) * len(coords)
        if len(coords) != t:
            raise DomainError(f"{len(coords)} coordinates given for t={t}")
        return (family_to_payload(make_star(box, coords, values)),)


class SrtNode(AgLabNodeBase):
    """
    S_{t,r}: codes with at least t+r ones among the first t+2r coordinates.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "m": ("INT", {"default": 2, "min": 2, "max": 64}),
                "n": ("INT", {"default": 3, "min": 1, "max": 16}),
                "t": ("INT", {"default": 1, "min": 1, "max": 16}),
                "r": ("INT", {"default": 0, "min": 0, "max": 8}),
            }
        }

    RETURN_TYPES = ("FAMILY",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Core"
    CHECK = "srt"
    COMMAND = "srt"

    def process(self, m, n, t, r, **_):
        spec = StarSpec(self.box(m, n), t, r)
        F = srt_family(spec)
        if len(F) != srt_size(spec):
            raise AssertionError(f"S_(t,r) has {len(F)} codes, formula gives {srt_size(spec)}")
        return (family_to_payload(F),)


class ConvertNode(AgLabNodeBase):
    """
    Family JSON -> embedded set system, or -> monotonized cube family.
    """

    @classmethod
    def INPUT_TYPES(cls):
        return {
            "required": {
                "input": ("STRING", {"default": ""}),
                "to": (["sets", "cube"], {"default": "sets"}),
            }
        }

    RETURN_TYPES = ("JSON",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Core"
    CHECK = "convert"
    COMMAND = "convert"

    def process(self, input, to="sets", **_):
        payload = self.load_input(input)
        if payload is None:
            raise DomainError("convert needs --input")
        F = family_from_payload(payload)
        if to == "cube":
            return (cube_to_payload(monotonize(F)),)
        return (embedded_sets_payload(F),)


NODE_CLASS_MAPPINGS = {
    "AgLabStar": StarNode,
    "AgLabSrt": SrtNode,
    "AgLabConvert": ConvertNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "AgLabStar": "AGLAB t-Star",
    "AgLabSrt": "AGLAB S(t,r) Family",
    "AgLabConvert": "AGLAB Convert Family",
}
