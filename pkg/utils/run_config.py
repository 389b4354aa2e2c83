"""
Run configuration for batch checks.
"""

import os
from typing import Any, Optional

from pydantic import BaseModel, Field

from engine.errors import DomainError

SEED_ENV = "AGLAB_SEED"
DEFAULT_SEED = 0


class RunConfig(BaseModel):
    subcommand: str
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64)
    budget_nodes: Optional[int] = Field(None, ge=1)
    budget_seconds: Optional[float] = Field(None, gt=0)
    output: Optional[str] = None
    workers: int = Field(1, ge=1)
    trials: int = Field(0, ge=0)


def resolve_seed(flag=None, environ=None):
    """--seed wins, then $AGLAB_SEED, then 0."""
    if flag is not None:
        return int(flag)
    environ = os.environ if environ is None else environ
    value = environ.get(SEED_ENV)
    if value not in (None, ""):
        try:
            return int(value)
        except ValueError as exc:
            raise DomainError(f"{SEED_ENV}={value!r} is not an integer seed") from exc
    return DEFAULT_SEED
