"""Exception types shared across the package.

Structural misuse (mismatched spaces, invalid parameters) raises eagerly;
numerical outcomes that are expected in normal operation (a witness search
coming up empty, a criterion that cannot be evaluated for a flow) use
dedicated exception classes so callers can tell the two apart.
"""

__all__ = [
    "RecurlabError",
    "SpaceMismatchError",
    "InvalidWeightError",
    "SemiflowDomainError",
    "InvalidRotationError",
    "MatrixSizeError",
    "NumericError",
    "OracleUnavailableError",
    "ConstructionStalledError",
    "CriterionUnavailableError",
    "PreconditionError",
    "ConfigValidationError",
]


class RecurlabError(Exception):
    """Base class for all package-specific errors."""


class SpaceMismatchError(RecurlabError):
    """Operands live on different discretized spaces."""


class InvalidWeightError(RecurlabError):
    """A weight evaluated to a non-positive or non-finite value."""


class SemiflowDomainError(RecurlabError):
    """A flow map produced values outside its declared domain, or failed."""


class InvalidRotationError(RecurlabError):
    """Rotation parameter is not unimodular within tolerance."""


class MatrixSizeError(RecurlabError):
    """Dense assembly requested beyond the supported size cap."""


class NumericError(RecurlabError):
    """An iteration produced NaN/Inf or otherwise lost its footing."""


class OracleUnavailableError(RecurlabError):
    """The constructive witness oracle does not exist for this family."""


class ConstructionStalledError(RecurlabError):
    """Nested-ball construction found no admissible time at some stage.

    Carries the completed stages so callers can inspect the partial run.
    """

    def __init__(self, message, stages=()):
        super().__init__(message)
        self.stages = tuple(stages)


class CriterionUnavailableError(RecurlabError):
    """A criterion's hypotheses cannot be evaluated for the given flow."""


class PreconditionError(RecurlabError):
    """A required certificate or hypothesis is missing or failed."""


class ConfigValidationError(RecurlabError):
    """Experiment configuration failed validation.

    ``problems`` lists human-readable messages, one per offending field.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
