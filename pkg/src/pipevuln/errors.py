"""Domain errors with stable machine-readable codes.

Every failure mode the toolkit can report carries a ``code`` attribute so
callers (and the CLI exit path) can dispatch on it without parsing messages.
"""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all errors raised by this package."""

    code = "E_ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class CycleError(PipelineError):
    code = "E_CYCLE"


class DanglingReferenceError(PipelineError):
    code = "E_DANGLING"


class DuplicateIdError(PipelineError):
    code = "E_DUP_ID"


class NoSourceError(PipelineError):
    code = "E_NO_SOURCE"


class BadValueError(PipelineError):
    code = "E_BAD_VALUE"


class PathExplosionError(PipelineError):
    code = "E_PATH_EXPLOSION"


class MissingScoreError(PipelineError):
    code = "E_MISSING_SCORE"


class NoSuchPathError(PipelineError):
    code = "E_NO_SUCH_PATH"


class NonTerminationError(PipelineError):
    code = "E_NONTERMINATION"


class EmptyInputError(PipelineError):
    code = "E_EMPTY"


class SyntaxParseError(PipelineError):
    code = "E_SYNTAX"


class SchemaError(PipelineError):
    code = "E_SCHEMA"


class UnresolvedReferenceError(PipelineError):
    code = "E_REF"


class ScenarioMismatchError(PipelineError):
    code = "E_SCENARIO_MISMATCH"
