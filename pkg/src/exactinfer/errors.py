"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ExactInferError(Exception):
    """Base class for all package errors."""


class NonPositiveBundle(ExactInferError, ValueError):
    """A bundle with a coordinate <= 0 was passed where the interior is required."""


class InvalidBox(ExactInferError, ValueError):
    """Sampling bounds are empty, reversed or non-positive."""


class MalformedDataset(ExactInferError, ValueError):
    """Observations violate their budget identities or have inconsistent shapes."""


class IndifferentQuery(ExactInferError, ValueError):
    """A strict-preference query was posed for an indifferent pair."""


class DimensionMismatch(ExactInferError, ValueError):
    """Array shapes disagree with the dataset they are checked against."""


class UnsupportedDimensions(ExactInferError, ValueError):
    """The operation is only implemented for two goods and two individuals."""


class NumericalFailure(ExactInferError, ArithmeticError):
    """A numerical routine produced a result that failed its audit."""


class NoConvergence(NumericalFailure):
    """An iterative solver stopped before reaching the requested tolerance."""

    def __init__(self, message: str, best=None, residual: float = float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual


class ConfigError(ExactInferError, ValueError):
    """An experiment configuration failed validation.

    ``problems`` holds one ``"field: message"`` string per offending field.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems) or "invalid configuration")
