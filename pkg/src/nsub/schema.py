"""Regime specifications, relation signatures, and edge admissibility.

The schema is the single authority on whether a typed, directional edge may
connect two entities. A verdict is a function of (relation type, source
regime, destination regime) and of nothing else; in particular entity
attributes can never influence it, so attribute-level discriminators are
unrepresentable rather than merely discouraged.

The default schema ships six regimes (K1..K6) over three persistence classes
and ten relation signatures. Regime ids and relation names are plain strings
so that the collapse verifier can also analyze custom schemas (clones,
merges, removals); the default content is fixed by the constants below.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import SchemaFormatError, UnknownRegime, UnknownRelationType

# Persistence classes
ENDURANT = "ENDURANT"
OCCURRENT = "OCCURRENT"
RECORD = "RECORD"
PERSISTENCE_CLASSES = (ENDURANT, OCCURRENT, RECORD)

# Stability-critical capability flags. A regime carrying a flag is the
# substrate-level home of that capacity; recovering a flag distinction after
# a merge would require an entity-level discriminator.
OBLIGATION_BEARING = "OBLIGATION_BEARING"
ACTED_UPON = "ACTED_UPON"
AUTHORITY_GROUNDING = "AUTHORITY_GROUNDING"
TEMPORAL_IDENTITY = "TEMPORAL_IDENTITY"
SCOPE_CONTEXT = "SCOPE_CONTEXT"
DESCRIPTIVE_RECORD = "DESCRIPTIVE_RECORD"
CAPABILITY_FLAGS = (
    OBLIGATION_BEARING,
    ACTED_UPON,
    AUTHORITY_GROUNDING,
    TEMPORAL_IDENTITY,
    SCOPE_CONTEXT,
    DESCRIPTIVE_RECORD,
)

DEFAULT_REGIME_IDS = ("K1", "K2", "K3", "K4", "K5", "K6")


@dataclass(frozen=True)
class RegimeSpec:
    """One identity-and-persistence regime: persistence class plus capability flags."""

    id: str
    persistence: str
    capabilities: frozenset[str]


@dataclass(frozen=True)
class RelationSignature:
    """Declares which (source regime, destination regime) pairs a relation admits."""

    rel_type: str
    src_regimes: frozenset[str]
    dst_regimes: frozenset[str]

    def describe(self) -> str:
        srcs = "|".join(sorted(self.src_regimes))
        dsts = "|".join(sorted(self.dst_regimes))
        return f"{srcs}→{dsts}"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    """Outcome of one signature check, with the declared signature for reporting."""

    admissible: bool
    rel_type: str
    src_regime: str
    dst_regime: str
    declared: str

    def describe(self) -> str:
        if self.admissible:
            return f"{self.rel_type} {self.src_regime}→{self.dst_regime}: admissible"
        return (
            f"{self.rel_type} {self.src_regime}→{self.dst_regime}; "
            f"declared {self.declared}"
        )


@dataclass(frozen=True)
class SubstrateSchema:
    """Immutable regime + signature table; safe for unrestricted concurrent reads.

    Signature endpoints may name regimes that are not declared (such schemas
    arise from mutations the verifier must be able to analyze); the
    requirement checker reports that defect rather than refusing to load.
    """

    regimes: tuple[RegimeSpec, ...]
    signatures: tuple[RelationSignature, ...]
    _by_regime: dict = field(default_factory=dict, compare=False, repr=False)
    _by_rel: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        regimes = tuple(sorted(self.regimes, key=lambda r: r.id))
        signatures = tuple(
            sorted(
                self.signatures,
                key=lambda s: (s.rel_type, sorted(s.src_regimes), sorted(s.dst_regimes)),
            )
        )
        object.__setattr__(self, "regimes", regimes)
        object.__setattr__(self, "signatures", signatures)
        by_regime: dict[str, RegimeSpec] = {}
        for spec in regimes:
            if spec.id in by_regime:
                raise SchemaFormatError(f"duplicate regime id {spec.id!r}")
            by_regime[spec.id] = spec
        by_rel: dict[str, list[RelationSignature]] = {}
        for sig in signatures:
            by_rel.setdefault(sig.rel_type, []).append(sig)
        object.__setattr__(self, "_by_regime", by_regime)
        object.__setattr__(self, "_by_rel", by_rel)

    # -- lookups ------------------------------------------------------------

    def regime_ids(self) -> tuple[str, ...]:
        return tuple(spec.id for spec in self.regimes)

    def has_regime(self, regime_id: str) -> bool:
        return regime_id in self._by_regime

    def regime(self, regime_id: str) -> RegimeSpec:
        try:
            return self._by_regime[regime_id]
        except KeyError:
            raise UnknownRegime(f"regime {regime_id!r} is not declared by the schema") from None

    def rel_types(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_rel))

    def signatures_for(self, rel_type: str) -> tuple[RelationSignature, ...]:
        try:
            return tuple(self._by_rel[rel_type])
        except KeyError:
            raise UnknownRelationType(f"relation type {rel_type!r} has no declared signature") from None

    def describe_signature(self, rel_type: str) -> str:
        return " or ".join(sig.describe() for sig in self.signatures_for(rel_type))

    # -- admissibility ------------------------------------------------------

    def check_admissible(self, rel_type: str, src_regime: str, dst_regime: str) -> AdmissibilityVerdict:
        """Decide (rel_type, src_regime, dst_regime); raises on unknown inputs."""
        sigs = self.signatures_for(rel_type)
        for regime_id in (src_regime, dst_regime):
            if not self.has_regime(regime_id):
                raise UnknownRegime(f"regime {regime_id!r} is not declared by the schema")
        ok = any(
            src_regime in sig.src_regimes and dst_regime in sig.dst_regimes for sig in sigs
        )
        return AdmissibilityVerdict(
            admissible=ok,
            rel_type=rel_type,
            src_regime=src_regime,
            dst_regime=dst_regime,
            declared=self.describe_signature(rel_type),
        )

    def admissibility_matrix(self) -> dict[tuple[str, str, str], bool]:
        """Exhaustive (rel_type, src, dst) -> bool table over declared regimes."""
        matrix: dict[tuple[str, str, str], bool] = {}
        for rel_type in self.rel_types():
            for src in self.regime_ids():
                for dst in self.regime_ids():
                    matrix[(rel_type, src, dst)] = self.check_admissible(
                        rel_type, src, dst
                    ).admissible
        return matrix

    def admissible_triples(self) -> frozenset[tuple[str, str, str]]:
        """Set of admissible cells; endpoints restricted to declared regimes."""
        declared = set(self.regime_ids())
        triples = set()
        for sig in self.signatures:
            for src in sig.src_regimes & declared:
                for dst in sig.dst_regimes & declared:
                    triples.add((sig.rel_type, src, dst))
        return frozenset(triples)

    # -- canonical serialization ---------------------------------------------

    def to_dict(self) -> dict:
        return {
            "regimes": [
                {
                    "id": spec.id,
                    "persistence": spec.persistence,
                    "capabilities": sorted(spec.capabilities),
                }
                for spec in self.regimes
            ],
            "signatures": [
                {
                    "relType": sig.rel_type,
                    "srcRegimes": sorted(sig.src_regimes),
                    "dstRegimes": sorted(sig.dst_regimes),
                }
                for sig in self.signatures
            ],
        }

    def to_canonical_json(self) -> str:
        return canonical_json(self.to_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.to_canonical_json().encode("utf-8")).hexdigest()

    def is_default(self) -> bool:
        return self.digest() == default_schema().digest()


def canonical_json(value) -> str:
    """Canonical rendering: sorted keys, compact separators, no ASCII escaping."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _default() -> SubstrateSchema:
    def regime(rid: str, persistence: str, *caps: str) -> RegimeSpec:
        return RegimeSpec(id=rid, persistence=persistence, capabilities=frozenset(caps))

    def sig(rel: str, srcs: tuple[str, ...], dsts: tuple[str, ...]) -> RelationSignature:
        return RelationSignature(rel, frozenset(srcs), frozenset(dsts))

    return SubstrateSchema(
        regimes=(
            regime("K1", ENDURANT, OBLIGATION_BEARING),
            regime("K2", ENDURANT, ACTED_UPON),
            regime("K3", ENDURANT, AUTHORITY_GROUNDING),
            regime("K4", OCCURRENT, TEMPORAL_IDENTITY),
            regime("K5", ENDURANT, SCOPE_CONTEXT),
            regime("K6", RECORD, DESCRIPTIVE_RECORD),
        ),
        signatures=(
            sig("enacts", ("K1",), ("K3",)),
            sig("issues", ("K1",), ("K3",)),
            sig("party-to", ("K1",), ("K3",)),
            sig("occurs-under", ("K4",), ("K3",)),
            sig("involves", ("K4",), ("K1",)),
            sig("acts-on", ("K4",), ("K2",)),
            sig("applies-in", ("K3",), ("K5",)),
            sig("nested-in", ("K5",), ("K5",)),
            sig("anchored-at", ("K6",), ("K4",)),
            sig("measures", ("K6",), ("K1", "K2", "K5")),
        ),
    )


_DEFAULT = _default()


def default_schema() -> SubstrateSchema:
    """The shipped six-regime schema. Deterministic; callers must not mutate it."""
    return _DEFAULT


# -- schema documents ---------------------------------------------------------


def schema_from_dict(doc) -> SubstrateSchema:
    """Build a schema from its canonical dict layout; raises SchemaFormatError."""
    if not isinstance(doc, dict) or set(doc) != {"regimes", "signatures"}:
        raise SchemaFormatError("schema document must have exactly 'regimes' and 'signatures'")
    regimes = []
    for entry in _require_list(doc, "regimes"):
        flags = _require_str_list(entry, "capabilities")
        for flag in flags:
            if flag not in CAPABILITY_FLAGS:
                raise SchemaFormatError(f"unknown capability flag {flag!r}")
        regimes.append(
            RegimeSpec(
                id=_require_str(entry, "id"),
                persistence=_require_choice(entry, "persistence", PERSISTENCE_CLASSES),
                capabilities=frozenset(flags),
            )
        )
    signatures = []
    for entry in _require_list(doc, "signatures"):
        srcs = _require_str_list(entry, "srcRegimes")
        dsts = _require_str_list(entry, "dstRegimes")
        if not srcs or not dsts:
            raise SchemaFormatError("signature regime sets must be non-empty")
        signatures.append(
            RelationSignature(
                rel_type=_require_str(entry, "relType"),
                src_regimes=frozenset(srcs),
                dst_regimes=frozenset(dsts),
            )
        )
    return SubstrateSchema(regimes=tuple(regimes), signatures=tuple(signatures))


def parse_schema(text: str) -> SubstrateSchema:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaFormatError(f"schema document is not valid JSON: {exc}") from exc
    return schema_from_dict(doc)


def load_schema(path) -> SubstrateSchema:
    with open(path, encoding="utf-8") as fh:
        return parse_schema(fh.read())


def _require_list(doc: dict, key: str) -> list:
    value = doc.get(key)
    if not isinstance(value, list):
        raise SchemaFormatError(f"{key!r} must be an array")
    for entry in value:
        if not isinstance(entry, dict):
            raise SchemaFormatError(f"entries of {key!r} must be objects")
    return value


def _require_str(entry: dict, key: str) -> str:
    value = entry.get(key)
    if not isinstance(value, str) or not value:
        raise SchemaFormatError(f"{key!r} must be a non-empty string")
    return value


def _require_str_list(entry: dict, key: str) -> list[str]:
    value = entry.get(key)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaFormatError(f"{key!r} must be an array of strings")
    return value


def _require_choice(entry: dict, key: str, choices: tuple[str, ...]) -> str:
    value = _require_str(entry, key)
    if value not in choices:
        raise SchemaFormatError(f"{key!r} must be one of {', '.join(choices)}; got {value!r}")
    return value
