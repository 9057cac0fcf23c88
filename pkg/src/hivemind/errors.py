"""Shared error types with stable machine-readable codes.

The code strings are part of the wire contract: the HTTP layer, the CLI, and
the UI all surface them verbatim.
"""

from __future__ import annotations


class HivemindError(Exception):
    code = "internal_error"

    def __init__(self, message: str, detail: dict | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}


class MalformedNotation(HivemindError):
    code = "malformed_notation"

    def __init__(self, message: str, offset: int):
        super().__init__(message, {"offset": offset})
        self.offset = offset


class ShapeMismatch(HivemindError):
    code = "shape_mismatch"


class NonFiniteValue(HivemindError):
    code = "non_finite_value"


class InvalidNetwork(HivemindError):
    code = "invalid_network"


class DuplicateName(HivemindError):
    code = "duplicate_name"


class DuplicateMapping(HivemindError):
    code = "duplicate_mapping"


class SelfMapping(HivemindError):
    code = "self_mapping"


class KindTargetMismatch(HivemindError):
    code = "kind_target_mismatch"


class UnknownEntity(HivemindError):
    code = "unknown_entity"


class EmptyEvidence(HivemindError):
    code = "empty_evidence"


class UnknownEntityType(HivemindError):
    code = "unknown_entity_type"


class UnknownExpansionPath(HivemindError):
    code = "bad_expand"


class CursorExhausted(HivemindError):
    code = "cursor_exhausted"


class InvariantViolation(HivemindError):
    code = "invariant_violation"


class StorageFailure(HivemindError):
    code = "storage_failure"


class NoImplementation(HivemindError):
    code = "no_implementation"


class InvalidSpec(HivemindError):
    code = "invalid_spec"


class UnknownUnit(HivemindError):
    code = "unknown_unit"


class ScenarioError(HivemindError):
    code = "scenario_error"


class ParseError(HivemindError):
    code = "parse_error"

    def __init__(self, message: str, line: int):
        super().__init__(message, {"line": line})
        self.line = line


class InvalidTransition(HivemindError):
    code = "invalid_transition"
