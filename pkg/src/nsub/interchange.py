"""Bit-exact persistence and exchange formats.

Two formats, both UTF-8 with LF line endings:

- `.nslog`: an append-only JSON-Lines event log. One canonical JSON object
  per line, `{"kind": "entity"|"relation"|"layer", "payload": ..., "seq": N}`,
  seq counting lines from 0 with no gaps. Substrate events come first, in
  record order; layer events follow in attachment order. Import replays every
  event through the normal operation path, so a log can never construct a
  store that violates a substrate or signature invariant.

- `.clif`: a textual export in parenthesized prefix syntax. A fixed axiom
  block (regime disjointness, then one signature axiom per relation type)
  precedes the data sentences in record order. Layer content appears only in
  delimited trailing sections headed `;; layer: <name>`; stripping those
  sections recovers the substrate sentence set exactly.
"""

from __future__ import annotations

import json
from itertools import combinations

from .errors import MalformedLine, SequenceGap, SubstrateError
from .layers import ExtensionLayer, LayeredStore
from .schema import SubstrateSchema, canonical_json
from .store import Entity, RelationEdge, SubstrateStore

KIND_ENTITY = "entity"
KIND_RELATION = "relation"
KIND_LAYER = "layer"

LAYER_SECTION_PREFIX = ";; layer: "


def _as_layered(store) -> LayeredStore:
    if isinstance(store, LayeredStore):
        return store
    return LayeredStore(store)


# -- event log -------------------------------------------------------------------


def export_log(store: LayeredStore | SubstrateStore, substrate_only: bool = False) -> bytes:
    """Serialize to the canonical event-log byte stream."""
    ls = _as_layered(store)
    lines = []
    seq = 0
    for record in ls.base.records():
        kind = KIND_ENTITY if isinstance(record, Entity) else KIND_RELATION
        lines.append(_event_line(seq, kind, record.to_payload()))
        seq += 1
    if not substrate_only:
        for layer in ls.layers.values():
            lines.append(_event_line(seq, KIND_LAYER, layer.to_payload()))
            seq += 1
    return "".join(lines).encode("utf-8")


def _event_line(seq: int, kind: str, payload: dict) -> str:
    return canonical_json({"kind": kind, "payload": payload, "seq": seq}) + "\n"


def import_log(data: bytes, schema: SubstrateSchema | None = None) -> LayeredStore:
    """Replay a log byte stream into a fresh store.

    Every event goes through the normal operation path; the first offending
    line raises MalformedLine, SequenceGap, or ReplayViolation (wrapping the
    underlying store/layer error). Line numbers are 1-based.
    """
    from .errors import ReplayViolation  # local import keeps module surface tidy
    from .store import edge_from_payload, entity_from_payload

    store = SubstrateStore(schema)
    layered = LayeredStore(store)
    raw_lines = data.split(b"\n")
    if raw_lines and raw_lines[-1] == b"":
        raw_lines.pop()
    for index, raw in enumerate(raw_lines):
        line_no = index + 1
        try:
            event = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedLine(line_no, f"not a JSON event: {exc}") from None
        if not isinstance(event, dict) or set(event) != {"kind", "payload", "seq"}:
            raise MalformedLine(line_no, "event must have exactly kind, payload, seq")
        if event["seq"] != index:
            raise SequenceGap(line_no, expected=index, found=event["seq"])
        kind, payload = event["kind"], event["payload"]
        if not isinstance(payload, dict):
            raise MalformedLine(line_no, "payload must be an object")
        try:
            if kind == KIND_ENTITY:
                replayed = entity_from_payload(payload, store).to_payload()
            elif kind == KIND_RELATION:
                replayed = edge_from_payload(payload, store).to_payload()
            elif kind == KIND_LAYER:
                layered = layered.apply_extension(ExtensionLayer.from_payload(payload))
                replayed = None
            else:
                raise MalformedLine(line_no, f"unknown event kind {kind!r}")
        except (KeyError, TypeError) as exc:
            raise MalformedLine(line_no, f"payload is missing or mistyped: {exc}") from None
        except MalformedLine:
            raise
        except SubstrateError as exc:
            raise ReplayViolation(line_no, exc) from exc
        if replayed is not None and replayed != payload:
            raise MalformedLine(
                line_no,
                f"payload does not match the replayed record: {canonical_json(replayed)}",
            )
    return layered


# -- CLIF-style export --------------------------------------------------------------


def export_clif(store: LayeredStore | SubstrateStore) -> str:
    """Textual export: axiom block, substrate sentences by seq, layer sections."""
    ls = _as_layered(store)
    lines = clif_axioms(ls.base.schema)
    for record in ls.base.records():
        if isinstance(record, Entity):
            lines.extend(_entity_sentences(record))
        else:
            lines.append(_relation_sentence(record))
    for name, layer in ls.layers.items():
        lines.append(f"{LAYER_SECTION_PREFIX}{name}")
        lines.extend(_layer_sentences(layer))
    return "".join(line + "\n" for line in lines)


def clif_axioms(schema: SubstrateSchema) -> list[str]:
    """Disjointness axioms for every regime pair, then one axiom per relation type."""
    lines = []
    for a, b in combinations(sorted(schema.regime_ids()), 2):
        lines.append(f"(forall (x) (not (and ({a} x) ({b} x))))")
    for rel_type in schema.rel_types():
        consequents = []
        for sig in schema.signatures_for(rel_type):
            src = _membership_disjunction(sorted(sig.src_regimes), "x")
            dst = _membership_disjunction(sorted(sig.dst_regimes), "y")
            consequents.append(f"(and {src} {dst})")
        body = consequents[0] if len(consequents) == 1 else "(or " + " ".join(consequents) + ")"
        lines.append(f"(forall (x y) (if ({rel_type} x y) {body}))")
    return lines


def _membership_disjunction(regimes: list[str], var: str) -> str:
    atoms = [f"({r} {var})" for r in regimes]
    return atoms[0] if len(atoms) == 1 else "(or " + " ".join(atoms) + ")"


def _entity_sentences(entity: Entity) -> list[str]:
    lines = [f"({entity.regime} {entity.id})"]
    if entity.occurred_at is not None:
        lines.append(f"(occurred-at {entity.id} {_quote(entity.occurred_at)})")
    if entity.asserted_at is not None:
        lines.append(f"(asserted-at {entity.id} {_quote(entity.asserted_at)})")
    if entity.provenance is not None:
        lines.append(f"(provenance {entity.id} {_quote(entity.provenance)})")
    for key in sorted(entity.attributes):
        value = _scalar(entity.attributes[key])
        lines.append(f"(attr {entity.id} {_quote(key)} {value})")
    return lines


def _relation_sentence(edge: RelationEdge) -> str:
    return f"({edge.rel_type} {edge.src} {edge.dst})"


def _layer_sentences(layer: ExtensionLayer) -> list[str]:
    lines = []
    for ann in layer.annotations:
        lines.append(
            f"({layer.name}/annotation {ann.target} {_quote(ann.key)} {_scalar(ann.value)})"
        )
    for local in layer.local_entities:
        if local.payload is None:
            lines.append(f"({layer.name}/entity {local.id})")
        else:
            lines.append(
                f"({layer.name}/entity {local.id} {_quote(canonical_json(local.payload))})"
            )
    for link in layer.local_links:
        lines.append(f"({layer.name}/link {link.src} {_quote(link.label)} {link.dst})")
    return lines


def split_clif_sections(text: str) -> tuple[str, str]:
    """Split an export into (substrate section, layer sections)."""
    lines = text.splitlines(keepends=True)
    for index, line in enumerate(lines):
        if line.startswith(LAYER_SECTION_PREFIX):
            return "".join(lines[:index]), "".join(lines[index:])
    return text, ""


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return _quote(value)
    return json.dumps(value)
