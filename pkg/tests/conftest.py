"""Shared oracles and builders for the test suite.

LITERAL_REGIMES / LITERAL_SIGNATURES are an independent transcription of the
declared schema content. Tests check the package against these literals and
derive expected values from them with brute force; they never compute
expectations through the code paths under test.
"""

from __future__ import annotations

import random

import pytest

from nsub import SubstrateSchema, SubstrateStore, schema_from_dict
from nsub.layers import Annotation, ExtensionLayer, LayeredStore, LocalEntity, LocalLink

# -- independent transcription of the shipped schema ---------------------------

LITERAL_REGIMES = {
    "K1": ("ENDURANT", {"OBLIGATION_BEARING"}),
    "K2": ("ENDURANT", {"ACTED_UPON"}),
    "K3": ("ENDURANT", {"AUTHORITY_GROUNDING"}),
    "K4": ("OCCURRENT", {"TEMPORAL_IDENTITY"}),
    "K5": ("ENDURANT", {"SCOPE_CONTEXT"}),
    "K6": ("RECORD", {"DESCRIPTIVE_RECORD"}),
}

LITERAL_SIGNATURES = {
    "enacts": ({"K1"}, {"K3"}),
    "issues": ({"K1"}, {"K3"}),
    "party-to": ({"K1"}, {"K3"}),
    "occurs-under": ({"K4"}, {"K3"}),
    "involves": ({"K4"}, {"K1"}),
    "acts-on": ({"K4"}, {"K2"}),
    "applies-in": ({"K3"}, {"K5"}),
    "nested-in": ({"K5"}, {"K5"}),
    "anchored-at": ({"K6"}, {"K4"}),
    "measures": ({"K6"}, {"K1", "K2", "K5"}),
}

REGIME_IDS = tuple(sorted(LITERAL_REGIMES))


def oracle_admissible(rel_type: str, src: str, dst: str) -> bool:
    srcs, dsts = LITERAL_SIGNATURES[rel_type]
    return src in srcs and dst in dsts


def oracle_admissible_cells() -> set[tuple[str, str, str]]:
    return {
        (rel, s, d)
        for rel in LITERAL_SIGNATURES
        for s in REGIME_IDS
        for d in REGIME_IDS
        if oracle_admissible(rel, s, d)
    }


def oracle_merged_admissible(block: set[str], rel_type: str, src: str, dst: str) -> bool:
    """Brute-force admissibility after merging `block` into one class."""
    src_class = block if src in block else {src}
    dst_class = block if dst in block else {dst}
    return any(oracle_admissible(rel_type, s, d) for s in src_class for d in dst_class)


def oracle_newly_admissible(block: set[str]) -> list[tuple[str, str, str]]:
    return sorted(
        (rel, s, d)
        for rel in LITERAL_SIGNATURES
        for s in REGIME_IDS
        for d in REGIME_IDS
        if oracle_merged_admissible(block, rel, s, d) and not oracle_admissible(rel, s, d)
    )


# -- schema mutations (built through dict surgery, not verifier internals) ------


def default_dict() -> dict:
    from nsub import default_schema

    return default_schema().to_dict()


def schema_without_regime(regime_id: str, scrub_signatures: bool = False) -> SubstrateSchema:
    """Remove a regime spec; optionally scrub it from signature endpoints too."""
    doc = default_dict()
    doc["regimes"] = [r for r in doc["regimes"] if r["id"] != regime_id]
    if scrub_signatures:
        signatures = []
        for sig in doc["signatures"]:
            srcs = [r for r in sig["srcRegimes"] if r != regime_id]
            dsts = [r for r in sig["dstRegimes"] if r != regime_id]
            if srcs and dsts:
                signatures.append({**sig, "srcRegimes": srcs, "dstRegimes": dsts})
        doc["signatures"] = signatures
    return schema_from_dict(doc)


def schema_with_clone(of: str = "K2", clone_id: str = "K2C") -> SubstrateSchema:
    """Seven-regime schema: a clone with identical persistence, capabilities,
    and signature membership everywhere the original appears."""
    doc = default_dict()
    original = next(r for r in doc["regimes"] if r["id"] == of)
    doc["regimes"].append({**original, "id": clone_id})
    for sig in doc["signatures"]:
        if of in sig["srcRegimes"]:
            sig["srcRegimes"] = sorted(set(sig["srcRegimes"]) | {clone_id})
        if of in sig["dstRegimes"]:
            sig["dstRegimes"] = sorted(set(sig["dstRegimes"]) | {clone_id})
    return schema_from_dict(doc)


def schema_with_merged_pair(a: str, b: str, merged_id: str = "KM") -> SubstrateSchema:
    """Five-regime schema merging a and b: capability union, first persistence,
    merged id substituted into every signature endpoint."""
    doc = default_dict()
    specs = {r["id"]: r for r in doc["regimes"]}
    first, second = sorted([a, b])
    merged = {
        "id": merged_id,
        "persistence": specs[first]["persistence"],
        "capabilities": sorted(set(specs[first]["capabilities"]) | set(specs[second]["capabilities"])),
    }
    doc["regimes"] = [r for r in doc["regimes"] if r["id"] not in (a, b)] + [merged]
    for sig in doc["signatures"]:
        for key in ("srcRegimes", "dstRegimes"):
            out = {merged_id if r in (a, b) else r for r in sig[key]}
            sig[key] = sorted(out)
    return schema_from_dict(doc)


def schema_with_widened_measures() -> SubstrateSchema:
    doc = default_dict()
    for sig in doc["signatures"]:
        if sig["relType"] == "measures":
            sig["dstRegimes"] = sorted(set(sig["dstRegimes"]) | {"K4"})
    return schema_from_dict(doc)


# -- randomized builders ---------------------------------------------------------

_TIMESTAMPS = (
    "2024-01-05T00:00:00Z",
    "2024-03-17T08:30:00Z",
    "2025-06-01T12:00:00.250Z",
    "2023-11-30T23:59:59+00:00",
)

_ATTR_VALUES = (
    "inefficient",
    "valid",
    "Harbor Authority",
    "café-7",
    3.2,
    -14,
    0,
    True,
    False,
    1.5e-3,
)


def random_store(rng: random.Random, n_entities: int = 12, n_edges: int = 8) -> SubstrateStore:
    """A valid random substrate: entities across all regimes, admissible edges."""
    store = SubstrateStore()
    by_regime: dict[str, list[str]] = {r: [] for r in REGIME_IDS}
    for index in range(n_entities):
        regime = rng.choice(REGIME_IDS)
        entity_id = f"{regime.lower()}-{index}"
        attrs = {
            f"k{j}": rng.choice(_ATTR_VALUES) for j in range(rng.randrange(0, 3))
        }
        kwargs = {}
        if regime == "K4":
            kwargs = {"occurred_at": rng.choice(_TIMESTAMPS), "provenance": f"agent-{index}"}
        elif regime == "K6":
            kwargs = {"asserted_at": rng.choice(_TIMESTAMPS), "provenance": f"sensor-{index}"}
        store.create_entity(regime, entity_id, attrs, **kwargs)
        by_regime[regime].append(entity_id)
    for _ in range(n_edges):
        rel = rng.choice(sorted(LITERAL_SIGNATURES))
        srcs, dsts = LITERAL_SIGNATURES[rel]
        src_pool = [e for r in srcs for e in by_regime[r]]
        dst_pool = [e for r in dsts for e in by_regime[r]]
        if src_pool and dst_pool:
            store.add_relation(rel, rng.choice(src_pool), rng.choice(dst_pool))
    return store


def contradictory_layers(
    rng: random.Random, store: SubstrateStore, count: int
) -> list[ExtensionLayer]:
    """Layers that all annotate shared targets with pairwise-different values."""
    records = store.records()
    targets = [r.id for r in records] or []
    layers = []
    shared_target = rng.choice(targets) if targets else None
    for index in range(count):
        name = f"view-{index}"
        annotations = []
        if shared_target is not None:
            annotations.append(Annotation(shared_target, "assessment", f"stance-{index}"))
            for _ in range(rng.randrange(0, 3)):
                annotations.append(
                    Annotation(rng.choice(targets), f"note-{rng.randrange(4)}", rng.choice(_ATTR_VALUES))
                )
        local_entities = []
        local_links = []
        if rng.random() < 0.5:
            local_entities.append(LocalEntity(f"{name}/claim-0", {"weight": rng.random() < 0.5}))
            if targets:
                local_links.append(LocalLink(f"{name}/claim-0", "about", rng.choice(targets)))
        layers.append(
            ExtensionLayer(
                name=name,
                annotations=tuple(annotations),
                local_entities=tuple(local_entities),
                local_links=tuple(local_links),
            )
        )
    return layers


def attach_all(store: SubstrateStore, layers) -> LayeredStore:
    layered = LayeredStore(store)
    for layer in layers:
        layered = layered.apply_extension(layer)
    return layered


@pytest.fixture
def store() -> SubstrateStore:
    return SubstrateStore()


@pytest.fixture
def populated_store() -> SubstrateStore:
    s = SubstrateStore()
    s.create_entity("K1", "org-1", {"name": "Harbor Authority"})
    s.create_entity("K2", "vessel-2", {"flag": "PA"})
    s.create_entity("K3", "permit-9")
    s.create_entity(
        "K4", "inspection-4", occurred_at="2024-01-05T00:00:00Z", provenance="inspector-3"
    )
    s.create_entity("K5", "zone-12", {"label": "harbor east"})
    s.create_entity(
        "K6", "reading-7", {"value": 3.2},
        asserted_at="2024-01-05T00:00:00Z", provenance="sensor-12",
    )
    s.add_relation("party-to", "org-1", "permit-9")
    s.add_relation("acts-on", "inspection-4", "vessel-2")
    s.add_relation("measures", "reading-7", "vessel-2")
    return s
