"""
Conversion utilities between JSON payloads and engine values.
Handles families, measures, gluings, cube families and restriction lists.
"""

import json
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from engine.compression import CubeFamily
from engine.core import Box, Family, Restriction
from engine.measure import Gluing, ProductMeasure, as_fraction


class FamilyModel(BaseModel):
    m: int = Field(..., ge=2, description="alphabet size")
    n: int = Field(..., ge=1, description="code length")
    codes: list[list[int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _distinct_codes(self):
        seen = set()
        for code in self.codes:
            key = tuple(code)
            if key in seen:
                raise ValueError(f"duplicate code {list(key)}")
            seen.add(key)
        return self


class MeasureModel(BaseModel):
    m: int = Field(..., ge=2)
    n: int = Field(..., ge=1)
    factors: list[list[str]]

    @field_validator("factors", mode="before")
    @classmethod
    def _as_strings(cls, value):
        return [[str(w) for w in factor] for factor in value]


class GluingModel(BaseModel):
    m1: int = Field(..., ge=1)
    m2: int = Field(..., ge=1)
    maps: list[list[int]]


class CubeFamilyModel(BaseModel):
    n: int = Field(..., ge=0)
    members: list[list[int]] = Field(default_factory=list)


class RestrictionModel(BaseModel):
    Z: list[int]
    x: list[int]


class RestrictionSetModel(BaseModel):
    m: int = Field(..., ge=2)
    n: int = Field(..., ge=1)
    restrictions: list[RestrictionModel]


class SetSystemModel(BaseModel):
    sets: list[list[int]]


class SystemPartModel(BaseModel):
    S: list[int]
    B: list[list[int]] = Field(default_factory=list)


class SystemModel(BaseModel):
    parts: list[SystemPartModel]


class FamilyPairModel(BaseModel):
    families: list[FamilyModel] = Field(..., min_length=2, max_length=2)
    measure: Optional[MeasureModel] = None


def family_from_payload(payload):
    """Validate a family payload (dict or FamilyModel) and build a Family.

    Raises:
        pydantic.ValidationError: malformed payload or duplicate codes.
        DimensionError / DomainError: codes that do not fit the declared box.
    """
    model = payload if isinstance(payload, FamilyModel) else FamilyModel.model_validate(payload)
    return Family(Box(model.m, model.n), [tuple(code) for code in model.codes])


def family_to_payload(F):
    return {"m": F.box.m, "n": F.box.n, "codes": [list(x) for x in F.codes()]}


def measure_from_payload(payload):
    model = payload if isinstance(payload, MeasureModel) else MeasureModel.model_validate(payload)
    factors = tuple(tuple(as_fraction(w) for w in factor) for factor in model.factors)
    return ProductMeasure(Box(model.m, model.n), factors)


def measure_to_payload(nu):
    return {"m": nu.box.m, "n": nu.box.n,
            "factors": [[str(w) for w in factor] for factor in nu.factors]}


def gluing_from_payload(payload):
    model = GluingModel.model_validate(payload)
    return Gluing(model.m1, model.m2, tuple(tuple(mp) for mp in model.maps))


def gluing_to_payload(pi):
    return {"m1": pi.m1, "m2": pi.m2, "maps": [list(mp) for mp in pi.maps]}


def cube_from_payload(payload):
    model = CubeFamilyModel.model_validate(payload)
    return CubeFamily(model.n, [tuple(v) for v in model.members])


def cube_to_payload(A):
    return A.to_json()


def restrictions_from_payload(payload):
    model = RestrictionSetModel.model_validate(payload)
    box = Box(model.m, model.n)
    return box, [Restriction(tuple(r.Z), tuple(r.x)).check_in(box) for r in model.restrictions]


def sets_from_payload(payload):
    return [frozenset(s) for s in SetSystemModel.model_validate(payload).sets]


def system_from_payload(payload):
    model = SystemModel.model_validate(payload)
    return {frozenset(part.S): [frozenset(b) for b in part.B] for part in model.parts}


def pair_from_payload(payload):
    model = FamilyPairModel.model_validate(payload)
    first, second = (family_from_payload(f) for f in model.families)
    nu = measure_from_payload(model.measure) if model.measure is not None else None
    return first, second, nu


def embedded_sets_payload(F):
    """The set embedding of a family, 1-based ground set {(i-1)m + x_i}."""
    return {"ground": F.box.m * F.box.n,
            "sets": [sorted(s) for s in (frozenset((i - 1) * F.box.m + v for i, v in enumerate(x, 1))
                                         for x in F.codes())]}


def load_json(path):
    """Read a JSON document from a path ("-" is not supported; reports go to stdout only)."""
    with Path(path).open("r", encoding="utf-8") as handle:
        return json.load(handle)


def load_family(path):
    return family_from_payload(load_json(path))


def write_json(path, payload):
    text = json.dumps(payload, sort_keys=True)
    if path is None:
        print(text)
        return
    Path(path).write_text(text + "\n", encoding="utf-8")
