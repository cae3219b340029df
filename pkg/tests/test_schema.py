"""Schema content, admissibility decisions, and canonical serialization."""

from __future__ import annotations

import json

import pytest

from nsub import (
    SchemaFormatError,
    SubstrateSchema,
    UnknownRegime,
    UnknownRelationType,
    default_schema,
    parse_schema,
    schema_from_dict,
)
from conftest import (
    LITERAL_REGIMES,
    LITERAL_SIGNATURES,
    REGIME_IDS,
    oracle_admissible,
    oracle_admissible_cells,
)


class TestDefaultSchema:
    def test_six_regimes_ten_signatures(self):
        schema = default_schema()
        assert len(schema.regimes) == 6
        assert len(schema.signatures) == 10

    def test_regime_content_matches_declared_table(self):
        schema = default_schema()
        for spec in schema.regimes:
            persistence, capabilities = LITERAL_REGIMES[spec.id]
            assert spec.persistence == persistence
            assert set(spec.capabilities) == capabilities
        assert schema.regime_ids() == REGIME_IDS

    def test_signature_content_matches_declared_table(self):
        schema = default_schema()
        assert set(schema.rel_types()) == set(LITERAL_SIGNATURES)
        for rel_type, (srcs, dsts) in LITERAL_SIGNATURES.items():
            (sig,) = schema.signatures_for(rel_type)
            assert set(sig.src_regimes) == srcs
            assert set(sig.dst_regimes) == dsts

    def test_deterministic_and_structurally_equal(self):
        assert default_schema() == default_schema()
        assert default_schema().digest() == default_schema().digest()

    def test_disjointness_of_regime_specs(self):
        schema = default_schema()
        seen = set()
        for spec in schema.regimes:
            key = (spec.persistence, frozenset(spec.capabilities))
            assert key not in seen, f"{spec.id} duplicates {key}"
            seen.add(key)


class TestCheckAdmissible:
    @pytest.mark.parametrize(
        "rel_type,src,dst,expected",
        [
            ("measures", "K6", "K5", True),
            ("applies-in", "K5", "K3", False),  # direction reversed
            ("involves", "K4", "K1", True),
            ("party-to", "K1", "K3", True),
            ("acts-on", "K4", "K3", False),
        ],
    )
    def test_examples(self, rel_type, src, dst, expected):
        verdict = default_schema().check_admissible(rel_type, src, dst)
        assert verdict.admissible is expected

    def test_violation_report_names_triple_and_signature(self):
        verdict = default_schema().check_admissible("acts-on", "K4", "K3")
        assert not verdict.admissible
        assert verdict.rel_type == "acts-on"
        assert verdict.src_regime == "K4"
        assert verdict.dst_regime == "K3"
        assert "K4→K2" in verdict.declared

    def test_unknown_relation_type(self):
        with pytest.raises(UnknownRelationType):
            default_schema().check_admissible("delegates", "K1", "K3")

    def test_unknown_regime(self):
        with pytest.raises(UnknownRegime):
            default_schema().check_admissible("party-to", "K9", "K3")


class TestAdmissibilityMatrix:
    def test_exactly_twelve_admissible_cells(self):
        matrix = default_schema().admissibility_matrix()
        assert len(matrix) == 10 * 6 * 6
        admissible = {cell for cell, ok in matrix.items() if ok}
        assert admissible == oracle_admissible_cells()
        assert len(admissible) == 12

    def test_matrix_agrees_with_check_admissible_everywhere(self):
        schema = default_schema()
        matrix = schema.admissibility_matrix()
        for (rel_type, src, dst), ok in matrix.items():
            assert schema.check_admissible(rel_type, src, dst).admissible is ok

    def test_only_self_loop_is_nested_in_k5(self):
        matrix = default_schema().admissibility_matrix()
        loops = {cell for cell, ok in matrix.items() if ok and cell[1] == cell[2]}
        assert loops == {("nested-in", "K5", "K5")}

    def test_matrix_agrees_with_independent_oracle(self):
        matrix = default_schema().admissibility_matrix()
        for rel_type in LITERAL_SIGNATURES:
            for src in REGIME_IDS:
                for dst in REGIME_IDS:
                    assert matrix[(rel_type, src, dst)] is oracle_admissible(rel_type, src, dst)


class TestCanonicalSerialization:
    def test_regimes_sorted_by_id_signatures_by_rel_type(self):
        doc = json.loads(default_schema().to_canonical_json())
        regime_ids = [r["id"] for r in doc["regimes"]]
        assert regime_ids == sorted(regime_ids)
        rel_types = [s["relType"] for s in doc["signatures"]]
        assert rel_types == sorted(rel_types)

    def test_round_trip_through_parse(self):
        schema = default_schema()
        again = parse_schema(schema.to_canonical_json())
        assert again == schema
        assert again.digest() == schema.digest()

    def test_digest_is_sha256_hex(self):
        digest = default_schema().digest()
        assert len(digest) == 64
        int(digest, 16)

    def test_construction_order_does_not_change_digest(self):
        doc = default_schema().to_dict()
        doc["regimes"].reverse()
        doc["signatures"].reverse()
        assert schema_from_dict(doc).digest() == default_schema().digest()


class TestSchemaDocuments:
    def test_rejects_non_object(self):
        with pytest.raises(SchemaFormatError):
            parse_schema("[1, 2]")

    def test_rejects_bad_json(self):
        with pytest.raises(SchemaFormatError):
            parse_schema("{nope")

    def test_rejects_unknown_persistence(self):
        doc = default_schema().to_dict()
        doc["regimes"][0]["persistence"] = "ETERNAL"
        with pytest.raises(SchemaFormatError):
            schema_from_dict(doc)

    def test_rejects_unknown_capability(self):
        doc = default_schema().to_dict()
        doc["regimes"][0]["capabilities"] = ["SHINY"]
        with pytest.raises(SchemaFormatError):
            schema_from_dict(doc)

    def test_rejects_empty_signature_sets(self):
        doc = default_schema().to_dict()
        doc["signatures"][0]["srcRegimes"] = []
        with pytest.raises(SchemaFormatError):
            schema_from_dict(doc)

    def test_rejects_duplicate_regime_ids(self):
        doc = default_schema().to_dict()
        doc["regimes"].append(dict(doc["regimes"][0]))
        with pytest.raises(SchemaFormatError):
            schema_from_dict(doc)

    def test_accepts_dangling_signature_endpoints(self):
        # Schemas produced by removing a regime keep their signature rows; the
        # requirement checker reports the defect instead of the loader.
        doc = default_schema().to_dict()
        doc["regimes"] = [r for r in doc["regimes"] if r["id"] != "K2"]
        schema = schema_from_dict(doc)
        assert isinstance(schema, SubstrateSchema)
        assert not schema.has_regime("K2")
