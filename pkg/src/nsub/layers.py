"""Interpretive extension layers attached above the substrate.

A layer bundles annotations on substrate records, layer-local entities, and
layer-local links. Layers reference substrate records by id but never contain
them, so attaching a layer cannot disturb the substrate: the projection of a
layered store is the base store's record sequence, byte for byte, no matter
how many layers are attached or in what order.

Disagreement between layers is a stable condition: detect_conflicts reports
contradictory annotations and never resolves, ranks, or rejects them.
Layer-local payloads are deliberately opaque; this module does not interpret
causal, normative, or analytic claims.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .errors import (
    DanglingTarget,
    DuplicateLayerName,
    MalformedAttribute,
    NamespaceViolation,
)
from .schema import canonical_json
from .store import Record, Scalar, SubstrateStore, validate_scalar


@dataclass(frozen=True)
class Annotation:
    """A (target record id, key, scalar value) statement made by one layer."""

    target: str
    key: str
    value: Scalar

    def to_payload(self) -> dict:
        return {"target": self.target, "key": self.key, "value": self.value}


@dataclass(frozen=True)
class LocalEntity:
    """A layer-scoped entity; payload is opaque JSON kept exactly as supplied."""

    id: str
    payload: Any = None

    def to_payload(self) -> dict:
        doc: dict = {"id": self.id}
        if self.payload is not None:
            doc["payload"] = self.payload
        return doc


@dataclass(frozen=True)
class LocalLink:
    """A labeled link between layer-local and/or substrate ids."""

    src: str
    label: str
    dst: str

    def to_payload(self) -> dict:
        return {"src": self.src, "label": self.label, "dst": self.dst}


@dataclass(frozen=True)
class ExtensionLayer:
    name: str
    annotations: tuple[Annotation, ...] = ()
    local_entities: tuple[LocalEntity, ...] = ()
    local_links: tuple[LocalLink, ...] = ()

    def to_payload(self) -> dict:
        return {
            "name": self.name,
            "annotations": [a.to_payload() for a in self.annotations],
            "localEntities": [e.to_payload() for e in self.local_entities],
            "localLinks": [l.to_payload() for l in self.local_links],
        }

    @classmethod
    def from_payload(cls, doc: Mapping) -> "ExtensionLayer":
        return cls(
            name=doc["name"],
            annotations=tuple(
                Annotation(a["target"], a["key"], a["value"])
                for a in doc.get("annotations", [])
            ),
            local_entities=tuple(
                LocalEntity(e["id"], e.get("payload"))
                for e in doc.get("localEntities", [])
            ),
            local_links=tuple(
                LocalLink(l["src"], l["label"], l["dst"])
                for l in doc.get("localLinks", [])
            ),
        )


@dataclass(frozen=True)
class Conflict:
    """One (target, key) annotated with non-equal values by two or more layers."""

    target: str
    key: str
    entries: tuple[tuple[str, Scalar], ...]  # (layer name, value) in attachment order

    def to_payload(self) -> dict:
        return {
            "target": self.target,
            "key": self.key,
            "entries": [{"layer": layer, "value": value} for layer, value in self.entries],
        }


class LayeredStore:
    """A substrate store plus an ordered set of immutable extension layers."""

    def __init__(self, base: SubstrateStore, layers: Mapping[str, ExtensionLayer] | None = None):
        self._base = base
        self._layers: dict[str, ExtensionLayer] = dict(layers or {})

    @property
    def base(self) -> SubstrateStore:
        return self._base

    @property
    def layers(self) -> Mapping[str, ExtensionLayer]:
        return dict(self._layers)

    def apply_extension(self, layer: ExtensionLayer) -> "LayeredStore":
        """Attach a layer; returns a new layered store, prior layers untouched.

        Raises DuplicateLayerName, DanglingTarget, NamespaceViolation, or
        MalformedAttribute. The substrate is never modified.
        """
        self._validate_layer(layer)
        attached = dict(self._layers)
        attached[layer.name] = layer
        return LayeredStore(self._base, attached)

    def substrate_projection(self) -> tuple[Record, ...]:
        """The base store's records, independent of attached layers."""
        return self._base.records()

    def detect_conflicts(self) -> tuple[Conflict, ...]:
        """Report every (target, key) with non-equal values from >= 2 layers.

        Reports only; no state is modified and no value is preferred.
        """
        groups: dict[tuple[str, str], list[tuple[str, Scalar]]] = {}
        for name, layer in self._layers.items():
            for ann in layer.annotations:
                groups.setdefault((ann.target, ann.key), []).append((name, ann.value))
        conflicts = []
        for (target, key), entries in groups.items():
            values_by_layer = {}
            for layer_name, value in entries:
                values_by_layer.setdefault(layer_name, set()).add(_value_key(value))
            distinct = {v for vs in values_by_layer.values() for v in vs}
            if len(values_by_layer) >= 2 and len(distinct) >= 2:
                conflicts.append(Conflict(target=target, key=key, entries=tuple(entries)))
        conflicts.sort(key=lambda c: (c.target, c.key))
        return tuple(conflicts)

    # -- validation -----------------------------------------------------------

    def _validate_layer(self, layer: ExtensionLayer) -> None:
        name = layer.name
        if not isinstance(name, str) or not name or any(ch.isspace() for ch in name) or "/" in name:
            raise NamespaceViolation(f"layer name {name!r} must be non-empty with no whitespace or '/'")
        if name in self._layers:
            raise DuplicateLayerName(f"layer {name!r} is already attached")
        prefix = name + "/"
        local_ids = set()
        for local in layer.local_entities:
            if not isinstance(local.id, str) or not local.id.startswith(prefix) or local.id == prefix:
                raise NamespaceViolation(
                    f"layer-local id {local.id!r} must carry the {prefix!r} prefix"
                )
            local_ids.add(local.id)
        for ann in layer.annotations:
            if not isinstance(ann.key, str) or not ann.key:
                raise MalformedAttribute("annotation key must be a non-empty string")
            validate_scalar(ann.value, f"annotation {ann.key!r}")
            if not self._base.resolves(ann.target):
                raise DanglingTarget(f"annotation target {ann.target!r} is not a substrate record")
        for link in layer.local_links:
            if not isinstance(link.label, str) or not link.label:
                raise MalformedAttribute("link label must be a non-empty string")
            for endpoint in (link.src, link.dst):
                self._check_link_endpoint(endpoint, prefix, local_ids)

    def _check_link_endpoint(self, endpoint: str, prefix: str, local_ids: set[str]) -> None:
        if not isinstance(endpoint, str) or not endpoint:
            raise DanglingTarget(f"link endpoint {endpoint!r} is empty")
        if endpoint.startswith(prefix):
            if endpoint not in local_ids:
                raise DanglingTarget(f"link endpoint {endpoint!r} is not a declared local entity")
            return
        if "/" in endpoint:
            # Inter-layer references are not admitted; a prefixed id must be ours.
            raise NamespaceViolation(
                f"link endpoint {endpoint!r} carries a foreign layer prefix"
            )
        if not self._base.resolves(endpoint):
            raise DanglingTarget(f"link endpoint {endpoint!r} is not a substrate record")


@dataclass(frozen=True)
class ConservativityReport:
    passed: bool
    divergence: str | None = None

    def to_payload(self) -> dict:
        return {"passed": self.passed, "divergence": self.divergence}


def check_conservative(before: LayeredStore, after: LayeredStore) -> ConservativityReport:
    """Pass iff the two substrate projections are identical record for record."""
    a = before.substrate_projection()
    b = after.substrate_projection()
    for index, (left, right) in enumerate(zip(a, b)):
        if left.to_payload() != right.to_payload():
            return ConservativityReport(
                passed=False,
                divergence=(
                    f"record {index} diverges: {canonical_json(left.to_payload())} "
                    f"!= {canonical_json(right.to_payload())}"
                ),
            )
    if len(a) != len(b):
        longer, kind = (a, "before") if len(a) > len(b) else (b, "after")
        extra = longer[min(len(a), len(b))]
        return ConservativityReport(
            passed=False,
            divergence=f"record {min(len(a), len(b))} only in {kind}: {canonical_json(extra.to_payload())}",
        )
    return ConservativityReport(passed=True)


def _value_key(value: Scalar):
    # bool is an int subclass; keep True distinct from 1 in conflict detection.
    return (type(value).__name__, value)
