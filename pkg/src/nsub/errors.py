"""Exception hierarchy for substrate, layer, and interchange operations.

Every domain violation is a distinct subclass of SubstrateError so callers
(and the CLI exit-code mapping) can discriminate without string matching.
Structural problems with input files (bad JSON line, sequence gap, malformed
schema document) subclass InputFormatError instead: those are environment or
usage errors, not domain verdicts.
"""

from __future__ import annotations


class SubstrateError(Exception):
    """Base class for all domain violations raised by this package."""


class MalformedId(SubstrateError):
    """Identifier is empty, contains whitespace, or contains a reserved character."""


class DuplicateId(SubstrateError):
    """Entity id is already bound in the store."""


class UnknownRegime(SubstrateError):
    """Regime id is not declared by the active schema."""


class SameRegime(SubstrateError):
    """A collapse candidate named the same regime twice."""


class MissingTemporalAnchor(SubstrateError):
    """Regime requires a temporal/provenance bundle that was not supplied."""


class ForbiddenTemporalAnchor(SubstrateError):
    """A temporal/provenance field was supplied for a regime that forbids it."""


class MalformedTimestamp(SubstrateError):
    """Timestamp is not an RFC 3339 UTC string."""


class MalformedAttribute(SubstrateError):
    """Attribute name is not a non-empty string, or value is not a scalar."""


class UnknownEntity(SubstrateError):
    """Relation endpoint does not resolve to a stored entity."""


class UnknownRelationType(SubstrateError):
    """Relation type has no declared signature in the active schema."""


class RegimeViolation(SubstrateError):
    """Edge signature check failed; carries the offending triple and the declared signature."""

    def __init__(self, rel_type: str, src_regime: str, dst_regime: str, declared: str):
        self.rel_type = rel_type
        self.src_regime = src_regime
        self.dst_regime = dst_regime
        self.declared = declared
        super().__init__(f"{rel_type} {src_regime}→{dst_regime}; declared {declared}")


class DuplicateLayerName(SubstrateError):
    """Extension layer name is already attached."""


class DanglingTarget(SubstrateError):
    """Layer annotation or link references an id that does not resolve."""


class NamespaceViolation(SubstrateError):
    """Layer-local id does not carry the mandatory 'layerName/' prefix."""


class InputFormatError(SubstrateError):
    """Structurally invalid input document (environment/usage error, CLI status 2)."""


class MalformedLine(InputFormatError):
    """Log line is not a well-formed event."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class SequenceGap(InputFormatError):
    """Log event sequence numbers are not consecutive from 0."""

    def __init__(self, line_no: int, expected: int, found: int):
        self.line_no = line_no
        super().__init__(f"line {line_no}: expected seq {expected}, found {found}")


class SchemaFormatError(InputFormatError):
    """Schema document does not match the canonical schema layout."""


class ReplayViolation(SubstrateError):
    """Replaying a log event violated a store or layer invariant."""

    def __init__(self, line_no: int, cause: SubstrateError):
        self.line_no = line_no
        self.cause = cause
        super().__init__(f"line {line_no}: {type(cause).__name__}: {cause}")
