"""
Exception hierarchy shared by every engine module and mapped to exit codes by the CLI.
"""


class AgLabError(Exception):
    """Base class for all workbench errors."""


class DimensionError(AgLabError, ValueError):
    """Codes, families or measures live in different boxes."""


class DomainError(AgLabError, ValueError):
    """A parameter lies outside the domain of an operation."""


class BudgetError(AgLabError):
    """An enumeration, search or table exceeds its configured cap."""


class UndefinedError(AgLabError, ArithmeticError):
    """The requested quantity is undefined for this input (e.g. homogeneity of an empty family)."""


class PreconditionError(AgLabError):
    """A checked statement's hypothesis fails on the given input.

    Attributes:
        witness: Optional JSON-friendly object showing why the hypothesis fails.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
