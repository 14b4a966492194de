"""Exception types shared across the toolkit."""

from __future__ import annotations

from typing import Any


class NetsepError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgument(NetsepError, ValueError):
    """An input violates an operation's precondition."""


class ConvergenceFailure(NetsepError, RuntimeError):
    """An iterative solver ran out of budget before meeting its tolerance.

    The best iterate found so far is attached as ``best``.
    """

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


class ResourceLimit(NetsepError, RuntimeError):
    """A request exceeds the desk-scale resource caps (e.g. codebook size)."""


class ContractViolation(NetsepError, RuntimeError):
    """A node code broke an engine contract (causality, shapes, alphabets)."""


class PlanInfeasible(NetsepError, ValueError):
    """An experiment plan cannot meet its own feasibility constraints."""
