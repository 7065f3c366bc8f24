"""Shared exception types.

Budget failures are always explicit: a solver that runs out of its search
budget raises BudgetExceededError instead of silently returning a
truncated (and therefore wrong) answer.
"""


class KnapsolveError(Exception):
    """Base class for all library errors."""


class InputError(KnapsolveError):
    """Malformed user input: bad expression text, bad group description,
    alphabet mismatches, dimension mismatches."""


class BudgetExceededError(KnapsolveError):
    """A configurable search cap was hit before the computation finished."""

    def __init__(self, what, limit):
        self.what = what
        self.limit = limit
        super().__init__(f"budget exhausted: {what} (limit {limit})")
