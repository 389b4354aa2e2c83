"""
Machine-readable check reports.

Every check in the engine returns a `Report`; the CLI writes them as JSON lines.
"""

import json
from fractions import Fraction
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .core import Family, Restriction

Status = Literal["verified", "violated", "hypotheses-unmet", "observation"]


def to_jsonable(value):
    """Recursively turn engine values into JSON-friendly data.

    Fractions become "p/q" strings, restrictions become {"Z": [...], "x": [...]},
    families become code lists, numpy scalars become Python numbers.
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Restriction):
        return {"Z": list(value.coords), "x": list(value.values)}
    if isinstance(value, Family):
        return [list(x) for x in value.codes()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset, np.ndarray)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    if hasattr(value, "to_json"):
        return value.to_json()
    return str(value)


class Report(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    check: str
    params: dict[str, Any] = Field(default_factory=dict)
    passed: bool = Field(alias="pass")
    margin: Union[str, float, int, None] = None
    witness: Any = None
    status: Status = "verified"
    details: dict[str, Any] = Field(default_factory=dict)
    config: Optional[dict[str, Any]] = None
    timestamp: Optional[str] = None

    @field_validator("params", "details", "witness", "margin", mode="before")
    @classmethod
    def _jsonable(cls, value):
        return to_jsonable(value)

    @classmethod
    def verdict(cls, check, params, passed, margin=None, witness=None, details=None, status=None):
        if status is None:
            status = "verified" if passed else "violated"
        return cls(check=check, params=params, passed=bool(passed), margin=margin,
                   witness=witness, details=details or {}, status=status)

    @classmethod
    def unmet(cls, check, params, reason, details=None):
        """A report for a statement whose hypotheses fail: nothing is asserted."""
        details = dict(details or {})
        details["reason"] = reason
        return cls(check=check, params=params, passed=True, status="hypotheses-unmet", details=details)

    def to_json_line(self):
        return json.dumps(self.model_dump(by_alias=True, mode="json"), sort_keys=True)


def all_passed(reports):
    return all(r.passed for r in reports)
