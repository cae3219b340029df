"""Append-only store of entities and typed, directional relation edges.

Core invariants (load-bearing):
- Records are never updated or deleted; the record sequence before any
  operation is a prefix of the sequence after it.
- An entity's id and regime are fixed at creation. There is no operation
  that rewrites either, so regime stability is unrepresentable to violate.
- Temporal/provenance anchors are mandatory exactly where the regime's
  persistence class demands them: occurrents carry occurredAt + provenance,
  records carry assertedAt + provenance, endurants carry neither.
- Every edge satisfies the schema's signature table at creation time; the
  schema is fixed at store initialization, so no edge can be invalidated
  retroactively.

Writes are serialized through one lock (single-writer contract); returned
values are immutable snapshots safe to share across threads.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterator, Mapping, Union

from .errors import (
    DuplicateId,
    ForbiddenTemporalAnchor,
    MalformedAttribute,
    MalformedId,
    MalformedTimestamp,
    MissingTemporalAnchor,
    RegimeViolation,
    UnknownEntity,
)
from .schema import OCCURRENT, RECORD, SubstrateSchema, default_schema

Scalar = Union[str, int, float, bool]

# Reserved characters: whitespace breaks the id grammar, '/' is reserved for
# layer-local namespaces, and ( ) " ; would break the textual export syntax.
_RESERVED_ID_CHARS = set('/()";')

_RFC3339_UTC = re.compile(
    r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d{1,9})?(Z|\+00:00)$"
)


def validate_id(value: str, what: str = "id") -> str:
    if not isinstance(value, str) or not value:
        raise MalformedId(f"{what} must be a non-empty string")
    if any(ch.isspace() for ch in value):
        raise MalformedId(f"{what} {value!r} contains whitespace")
    bad = sorted(_RESERVED_ID_CHARS.intersection(value))
    if bad:
        raise MalformedId(f"{what} {value!r} contains reserved character(s) {''.join(bad)!r}")
    return value


def validate_timestamp(value: str, what: str) -> str:
    """Accept RFC 3339 UTC timestamps ('Z' or '+00:00'); stored verbatim."""
    if not isinstance(value, str) or not _RFC3339_UTC.match(value):
        raise MalformedTimestamp(f"{what} must be an RFC 3339 UTC timestamp, got {value!r}")
    try:
        datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise MalformedTimestamp(f"{what} {value!r}: {exc}") from None
    return value


def validate_scalar(value, what: str) -> Scalar:
    if isinstance(value, bool) or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise MalformedAttribute(f"{what} must be finite, got {value!r}")
        return value
    raise MalformedAttribute(f"{what} must be a scalar (string/int/float/bool), got {type(value).__name__}")


@dataclass(frozen=True)
class Entity:
    """A substrate referent. Immutable; regime and id never change."""

    id: str
    regime: str
    created_at: int
    attributes: Mapping[str, Scalar]
    occurred_at: str | None = None
    asserted_at: str | None = None
    provenance: str | None = None

    def to_payload(self) -> dict:
        payload: dict = {
            "id": self.id,
            "regime": self.regime,
            "createdAt": self.created_at,
            "attributes": dict(sorted(self.attributes.items())),
        }
        if self.occurred_at is not None:
            payload["occurredAt"] = self.occurred_at
        if self.asserted_at is not None:
            payload["assertedAt"] = self.asserted_at
        if self.provenance is not None:
            payload["provenance"] = self.provenance
        return payload


@dataclass(frozen=True)
class RelationEdge:
    """A typed, directional edge between two stored entities. Immutable."""

    id: str
    rel_type: str
    src: str
    dst: str
    created_at: int

    def to_payload(self) -> dict:
        return {
            "id": self.id,
            "relType": self.rel_type,
            "src": self.src,
            "dst": self.dst,
            "createdAt": self.created_at,
        }


Record = Union[Entity, RelationEdge]


class SubstrateStore:
    """Append-only entity/edge store checked against a fixed schema."""

    def __init__(self, schema: SubstrateSchema | None = None):
        self._schema = schema if schema is not None else default_schema()
        self._records: list[Record] = []
        self._entities_by_id: dict[str, Entity] = {}
        self._edges_by_id: dict[str, RelationEdge] = {}
        self._edges: list[RelationEdge] = []
        self._write_lock = threading.Lock()

    @property
    def schema(self) -> SubstrateSchema:
        return self._schema

    @property
    def next_seq(self) -> int:
        return len(self._records)

    def records(self) -> tuple[Record, ...]:
        """All records in append order; an immutable snapshot."""
        return tuple(self._records)

    def entities(self) -> tuple[Entity, ...]:
        return tuple(r for r in self._records if isinstance(r, Entity))

    def edges(self) -> tuple[RelationEdge, ...]:
        return tuple(self._edges)

    # -- mutations ------------------------------------------------------------

    def create_entity(
        self,
        regime: str,
        entity_id: str,
        attributes: Mapping[str, Scalar] | None = None,
        *,
        occurred_at: str | None = None,
        asserted_at: str | None = None,
        provenance: str | None = None,
    ) -> Entity:
        """Append a new entity; the temporal/provenance bundle must match the regime.

        Raises MalformedId, DuplicateId, UnknownRegime, MissingTemporalAnchor,
        ForbiddenTemporalAnchor, MalformedTimestamp, or MalformedAttribute.
        """
        validate_id(entity_id, "entity id")
        spec = self._schema.regime(regime)
        attrs = self._check_attributes(attributes or {})
        self._check_bundle(regime, spec.persistence, occurred_at, asserted_at, provenance)
        with self._write_lock:
            if entity_id in self._entities_by_id:
                raise DuplicateId(f"entity id {entity_id!r} is already bound")
            entity = Entity(
                id=entity_id,
                regime=regime,
                created_at=len(self._records),
                attributes=attrs,
                occurred_at=occurred_at,
                asserted_at=asserted_at,
                provenance=provenance,
            )
            self._records.append(entity)
            self._entities_by_id[entity_id] = entity
        return entity

    def add_relation(self, rel_type: str, src: str, dst: str) -> RelationEdge:
        """Append a typed edge after the signature check passes.

        Raises MalformedId, UnknownEntity, UnknownRelationType, UnknownRegime,
        or RegimeViolation (carrying the offending triple and the declared
        signature).
        """
        validate_id(src, "src id")
        validate_id(dst, "dst id")
        src_entity = self._entities_by_id.get(src)
        dst_entity = self._entities_by_id.get(dst)
        if src_entity is None:
            raise UnknownEntity(f"src entity {src!r} does not exist")
        if dst_entity is None:
            raise UnknownEntity(f"dst entity {dst!r} does not exist")
        verdict = self._schema.check_admissible(rel_type, src_entity.regime, dst_entity.regime)
        if not verdict.admissible:
            raise RegimeViolation(
                rel_type, src_entity.regime, dst_entity.regime, verdict.declared
            )
        with self._write_lock:
            seq = len(self._records)
            edge = RelationEdge(id=f"rel-{seq}", rel_type=rel_type, src=src, dst=dst, created_at=seq)
            self._records.append(edge)
            self._edges.append(edge)
            self._edges_by_id[edge.id] = edge
        return edge

    # -- reads ----------------------------------------------------------------

    def get_entity(self, entity_id: str) -> Entity | None:
        return self._entities_by_id.get(entity_id)

    def get_edge(self, edge_id: str) -> RelationEdge | None:
        return self._edges_by_id.get(edge_id)

    def resolves(self, target: str) -> bool:
        """True if target is a stored entity id or edge id."""
        return target in self._entities_by_id or target in self._edges_by_id

    def query_edges(
        self,
        rel_type: str | None = None,
        src_regime: str | None = None,
        dst_regime: str | None = None,
        entity: str | None = None,
    ) -> tuple[RelationEdge, ...]:
        """Edges matching every supplied filter field, in append order."""

        def matches(edge: RelationEdge) -> bool:
            if rel_type is not None and edge.rel_type != rel_type:
                return False
            if src_regime is not None and self._entities_by_id[edge.src].regime != src_regime:
                return False
            if dst_regime is not None and self._entities_by_id[edge.dst].regime != dst_regime:
                return False
            if entity is not None and entity not in (edge.src, edge.dst):
                return False
            return True

        return tuple(edge for edge in self._edges if matches(edge))

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records())

    def __len__(self) -> int:
        return len(self._records)

    # -- validation helpers -----------------------------------------------------

    @staticmethod
    def _check_attributes(attributes: Mapping[str, Scalar]) -> dict[str, Scalar]:
        checked: dict[str, Scalar] = {}
        for name, value in attributes.items():
            if not isinstance(name, str) or not name:
                raise MalformedAttribute(f"attribute name must be a non-empty string, got {name!r}")
            checked[name] = validate_scalar(value, f"attribute {name!r}")
        return checked

    @staticmethod
    def _check_bundle(
        regime: str,
        persistence: str,
        occurred_at: str | None,
        asserted_at: str | None,
        provenance: str | None,
    ) -> None:
        if persistence == OCCURRENT:
            forbidden = {"assertedAt": asserted_at}
            required = {"occurredAt": occurred_at, "provenance": provenance}
        elif persistence == RECORD:
            forbidden = {"occurredAt": occurred_at}
            required = {"assertedAt": asserted_at, "provenance": provenance}
        else:
            forbidden = {
                "occurredAt": occurred_at,
                "assertedAt": asserted_at,
                "provenance": provenance,
            }
            required = {}
        supplied_forbidden = sorted(k for k, v in forbidden.items() if v is not None)
        if supplied_forbidden:
            raise ForbiddenTemporalAnchor(
                f"{', '.join(supplied_forbidden)} not allowed for regime {regime} ({persistence})"
            )
        missing = sorted(k for k, v in required.items() if v is None)
        if missing:
            raise MissingTemporalAnchor(
                f"regime {regime} ({persistence}) requires {', '.join(missing)}"
            )
        if occurred_at is not None:
            validate_timestamp(occurred_at, "occurredAt")
        if asserted_at is not None:
            validate_timestamp(asserted_at, "assertedAt")
        if provenance is not None and (not isinstance(provenance, str) or not provenance):
            raise MalformedAttribute("provenance must be a non-empty string")


def entity_from_payload(payload: dict, store: SubstrateStore) -> Entity:
    """Replay an entity event through the normal creation path."""
    return store.create_entity(
        regime=payload["regime"],
        entity_id=payload["id"],
        attributes=payload.get("attributes", {}),
        occurred_at=payload.get("occurredAt"),
        asserted_at=payload.get("assertedAt"),
        provenance=payload.get("provenance"),
    )


def edge_from_payload(payload: dict, store: SubstrateStore) -> RelationEdge:
    """Replay a relation event through the normal creation path."""
    return store.add_relation(
        rel_type=payload["relType"], src=payload["src"], dst=payload["dst"]
    )
