"""Exhaustive regime-collapse analysis, requirement checking, and tightness.

The analyzer decides, for any candidate merge of regimes, which of three
failure modes fire:

- IDENTITY_INSTABILITY: the merged regimes declare different persistence
  classes, so a single identity criterion cannot cover the merged class.
- CATEGORY_ERROR: substituting the merged class into every signature endpoint
  admits some (relation, src, dst) triple over the original regimes that the
  original table rejects.
- HIDDEN_REGIME: repairing the merge would need an entity-level discriminator,
  which attribute-blind admissibility forbids. Fires when a category error
  must be blocked or a capability-flag difference must be recovered.

All reports are pure functions of the schema: same schema digest, byte-equal
report. Certificates embed the decision criteria above and re-checkable
witnesses, so a verdict can be audited without this module.

Results carry a claim label: the necessity/sufficiency readings are attached
only when the analyzed schema is the shipped default; any other schema is
verified the same way but labeled as carrying no such claim.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

from .errors import SameRegime, UnknownRegime
from .schema import (
    AUTHORITY_GROUNDING,
    CAPABILITY_FLAGS,
    ENDURANT,
    OBLIGATION_BEARING,
    OCCURRENT,
    RECORD,
    SCOPE_CONTEXT,
    SubstrateSchema,
)

IDENTITY_INSTABILITY = "IDENTITY_INSTABILITY"
CATEGORY_ERROR = "CATEGORY_ERROR"
HIDDEN_REGIME = "HIDDEN_REGIME"
FAILURE_MODES = (IDENTITY_INSTABILITY, CATEGORY_ERROR, HIDDEN_REGIME)

# Embedded in every certificate so the formalization behind a verdict is
# auditable from the certificate alone.
FAILURE_MODE_CRITERIA = {
    IDENTITY_INSTABILITY: (
        "fires iff the merged regimes declare more than one persistence class"
    ),
    CATEGORY_ERROR: (
        "fires iff substituting the merged class into every signature endpoint "
        "admits a (relType, src, dst) triple over the original regimes that the "
        "original schema rejects"
    ),
    HIDDEN_REGIME: (
        "fires iff a category error would have to be blocked, or a capability "
        "difference recovered, by an entity-level discriminator; attribute-blind "
        "admissibility forbids both"
    ),
}

REQUIREMENT_IDS = ("R1", "R2", "R3", "R4", "R5", "R6")

VERDICT_ADMISSIBLE = "admissible"
VERDICT_INADMISSIBLE = "inadmissible"

NO_CLAIM_LABEL = "no claim attached: schema differs from the shipped default"


@dataclass(frozen=True)
class BlockAnalysis:
    """Failure modes for merging one block of regimes, with witness data."""

    block: tuple[str, ...]
    modes: tuple[str, ...]
    persistence_classes: tuple[str, ...]
    capability_difference: tuple[str, ...]
    witness: tuple[str, str, str] | None
    newly_admissible: tuple[tuple[str, str, str], ...]

    @property
    def failed(self) -> bool:
        return bool(self.modes)

    def to_payload(self) -> dict:
        return {
            "block": list(self.block),
            "modes": list(self.modes),
            "persistenceClasses": list(self.persistence_classes),
            "capabilityDifference": list(self.capability_difference),
            "witness": list(self.witness) if self.witness else None,
            "newlyAdmissible": [list(t) for t in self.newly_admissible],
        }


@dataclass(frozen=True)
class CollapseCertificate:
    """Verdict for one candidate partition of the regime set."""

    schema_digest: str
    merged_blocks: tuple[tuple[str, ...], ...]
    failures: tuple[BlockAnalysis, ...]  # one entry per block of size >= 2
    verdict: str

    def to_payload(self) -> dict:
        return {
            "schemaDigest": self.schema_digest,
            "mergedBlocks": [list(b) for b in self.merged_blocks],
            "failures": [f.to_payload() for f in self.failures],
            "verdict": self.verdict,
            "criteria": dict(FAILURE_MODE_CRITERIA),
        }


def analyze_block(schema: SubstrateSchema, block: Sequence[str]) -> BlockAnalysis:
    """Analyze merging the given regimes into one class, others left alone."""
    members = tuple(sorted(block))
    for rid in members:
        schema.regime(rid)
    modes = []
    persistence = tuple(sorted({schema.regime(r).persistence for r in members}))
    if len(persistence) > 1:
        modes.append(IDENTITY_INSTABILITY)

    before = schema.admissible_triples()
    merged = set(members)
    newly = []
    for rel_type in schema.rel_types():
        for src in schema.regime_ids():
            for dst in schema.regime_ids():
                if (rel_type, src, dst) in before:
                    continue
                src_class = merged if src in merged else {src}
                dst_class = merged if dst in merged else {dst}
                if any(
                    (rel_type, s, d) in before for s in src_class for d in dst_class
                ):
                    newly.append((rel_type, src, dst))
    newly.sort()
    if newly:
        modes.append(CATEGORY_ERROR)

    caps = [schema.regime(r).capabilities for r in members]
    shared = frozenset.intersection(*caps)
    union = frozenset.union(*caps)
    cap_difference = tuple(sorted(union - shared))
    if newly or cap_difference:
        modes.append(HIDDEN_REGIME)

    return BlockAnalysis(
        block=members,
        modes=tuple(modes),
        persistence_classes=persistence,
        capability_difference=cap_difference,
        witness=newly[0] if newly else None,
        newly_admissible=tuple(newly),
    )


def _certificate(schema: SubstrateSchema, partition: Sequence[Sequence[str]]) -> CollapseCertificate:
    blocks = canonical_partition(partition)
    failures = tuple(
        analyze_block(schema, block) for block in blocks if len(block) >= 2
    )
    verdict = VERDICT_INADMISSIBLE if any(f.failed for f in failures) else VERDICT_ADMISSIBLE
    return CollapseCertificate(
        schema_digest=schema.digest(),
        merged_blocks=blocks,
        failures=failures,
        verdict=verdict,
    )


def collapse_pair(schema: SubstrateSchema, a: str, b: str) -> CollapseCertificate:
    """Certificate for merging regimes a and b, every other regime untouched."""
    if a == b:
        raise SameRegime(f"cannot collapse {a!r} with itself")
    for rid in (a, b):
        if not schema.has_regime(rid):
            raise UnknownRegime(f"regime {rid!r} is not declared by the schema")
    partition = [[a, b]] + [[r] for r in schema.regime_ids() if r not in (a, b)]
    return _certificate(schema, partition)


# -- enumeration ----------------------------------------------------------------


def set_partitions(items: Sequence[str]) -> Iterator[tuple[tuple[str, ...], ...]]:
    """All partitions of items, via restricted growth strings, canonical form."""
    items = list(items)
    n = len(items)
    if n == 0:
        yield ()
        return
    codes = [0] * n
    while True:
        blocks: dict[int, list[str]] = {}
        for item, code in zip(items, codes):
            blocks.setdefault(code, []).append(item)
        yield canonical_partition(blocks[k] for k in sorted(blocks))
        i = n - 1
        while i > 0 and codes[i] == max(codes[:i]) + 1:
            i -= 1
        if i == 0:
            return
        codes[i] += 1
        for j in range(i + 1, n):
            codes[j] = 0


def canonical_partition(blocks) -> tuple[tuple[str, ...], ...]:
    """Members sorted within blocks, blocks sorted by first member."""
    normalized = [tuple(sorted(block)) for block in blocks]
    normalized.sort()
    return tuple(normalized)


# -- reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class PairsReport:
    schema_digest: str
    claim_attached: bool
    certificates: tuple[CollapseCertificate, ...]
    total: int
    inadmissible: int

    @property
    def all_inadmissible(self) -> bool:
        return self.inadmissible == self.total

    def to_payload(self) -> dict:
        return {
            "schemaDigest": self.schema_digest,
            "claim": "pairwise collapse analysis" if self.claim_attached else NO_CLAIM_LABEL,
            "claimAttached": self.claim_attached,
            "total": self.total,
            "inadmissible": self.inadmissible,
            "allInadmissible": self.all_inadmissible,
            "certificates": [c.to_payload() for c in self.certificates],
        }


def verify_all_pairs(schema: SubstrateSchema) -> PairsReport:
    """One certificate per unordered regime pair, sorted by pair."""
    certificates = tuple(
        collapse_pair(schema, a, b) for a, b in combinations(schema.regime_ids(), 2)
    )
    return PairsReport(
        schema_digest=schema.digest(),
        claim_attached=schema.is_default(),
        certificates=certificates,
        total=len(certificates),
        inadmissible=sum(1 for c in certificates if c.verdict == VERDICT_INADMISSIBLE),
    )


@dataclass(frozen=True)
class PartitionsReport:
    schema_digest: str
    claim_attached: bool
    certificates: tuple[CollapseCertificate, ...]
    partition_count: int
    inadmissible: int

    @property
    def all_inadmissible(self) -> bool:
        return self.inadmissible == self.partition_count

    def to_payload(self) -> dict:
        return {
            "schemaDigest": self.schema_digest,
            "claim": "partition collapse analysis" if self.claim_attached else NO_CLAIM_LABEL,
            "claimAttached": self.claim_attached,
            "partitionCount": self.partition_count,
            "inadmissible": self.inadmissible,
            "allInadmissible": self.all_inadmissible,
            "certificates": [c.to_payload() for c in self.certificates],
        }


def verify_partitions(schema: SubstrateSchema) -> PartitionsReport:
    """Verdicts for every partition with fewer blocks than regimes.

    A partition is inadmissible iff some block of size >= 2 fails; blocks are
    analyzed independently, each merged against the otherwise-unchanged schema.
    The all-singleton partition performs no merge and is excluded.
    """
    regime_ids = schema.regime_ids()
    certificates = [
        _certificate(schema, partition)
        for partition in set_partitions(regime_ids)
        if len(partition) < len(regime_ids)
    ]
    certificates.sort(key=lambda c: c.merged_blocks)
    return PartitionsReport(
        schema_digest=schema.digest(),
        claim_attached=schema.is_default(),
        certificates=tuple(certificates),
        partition_count=len(certificates),
        inadmissible=sum(1 for c in certificates if c.verdict == VERDICT_INADMISSIBLE),
    )


# -- requirement checklist ----------------------------------------------------------


@dataclass(frozen=True)
class RequirementCheck:
    requirement: str
    passed: bool
    evidence: str

    def to_payload(self) -> dict:
        return {"requirement": self.requirement, "passed": self.passed, "evidence": self.evidence}


@dataclass(frozen=True)
class RequirementReport:
    schema_digest: str
    checks: tuple[RequirementCheck, ...]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, requirement: str) -> RequirementCheck:
        for c in self.checks:
            if c.requirement == requirement:
                return c
        raise KeyError(requirement)

    def to_payload(self) -> dict:
        return {
            "schemaDigest": self.schema_digest,
            "requirements": {c.requirement: c.to_payload() for c in self.checks},
            "overall": self.overall,
        }


def check_requirements(schema: SubstrateSchema) -> RequirementReport:
    """Run the six-point requirement checklist against a schema."""
    checks = (
        _check_r1(schema),
        _check_r2(schema),
        _check_r3(schema),
        _check_r4(schema),
        _check_r5(schema),
        _check_r6(schema),
    )
    return RequirementReport(schema_digest=schema.digest(), checks=checks)


def _signature_endpoint_regimes(schema: SubstrateSchema) -> set[str]:
    endpoints: set[str] = set()
    for sig in schema.signatures:
        endpoints |= sig.src_regimes
        endpoints |= sig.dst_regimes
    return endpoints


def _check_r1(schema: SubstrateSchema) -> RequirementCheck:
    # Stable identity: write-once regimes and attribute-blind admissibility are
    # structural constants of the store and signature model; the schema-level
    # check is that every admissibility rule is grounded in a declared regime,
    # so identity conditions exist before any edge rule can rely on them.
    dangling = sorted(_signature_endpoint_regimes(schema) - set(schema.regime_ids()))
    if dangling:
        return RequirementCheck(
            "R1",
            False,
            "signature endpoints reference undeclared regimes: " + ", ".join(dangling),
        )
    return RequirementCheck(
        "R1",
        True,
        "regimes are write-once in the append-only store, admissibility reads "
        "(relType, srcRegime, dstRegime) only, and every signature endpoint is "
        "a declared regime",
    )


def _check_r2(schema: SubstrateSchema) -> RequirementCheck:
    hits = [
        spec.id
        for spec in schema.regimes
        if spec.persistence == ENDURANT
        and OBLIGATION_BEARING in spec.capabilities
        and _is_source_of(schema, spec.id, "party-to")
    ]
    if hits:
        return RequirementCheck(
            "R2", True, f"obligation-bearing endurant regime(s) {', '.join(hits)} source party-to"
        )
    return RequirementCheck(
        "R2", False, "no obligation-bearing endurant regime sources party-to"
    )


def _check_r3(schema: SubstrateSchema) -> RequirementCheck:
    hits = [
        spec.id
        for spec in schema.regimes
        if spec.persistence == ENDURANT
        and AUTHORITY_GROUNDING in spec.capabilities
        and _is_destination_of(schema, spec.id, "occurs-under")
    ]
    if hits:
        return RequirementCheck(
            "R3",
            True,
            f"authority-grounding endurant regime(s) {', '.join(hits)} are targeted "
            "by occurs-under and are disjoint from every occurrent regime",
        )
    return RequirementCheck(
        "R3", False, "no authority-grounding endurant regime is targeted by occurs-under"
    )


def _check_r4(schema: SubstrateSchema) -> RequirementCheck:
    hits = [spec.id for spec in schema.regimes if spec.persistence == OCCURRENT]
    if hits:
        return RequirementCheck(
            "R4",
            True,
            f"occurrent regime(s) {', '.join(hits)} exist; the store mandates "
            "occurredAt and provenance on every occurrent entity",
        )
    return RequirementCheck("R4", False, "no occurrent regime is declared")


def _check_r5(schema: SubstrateSchema) -> RequirementCheck:
    hits = [
        spec.id
        for spec in schema.regimes
        if SCOPE_CONTEXT in spec.capabilities
        and _is_source_of(schema, spec.id, "nested-in")
        and _is_destination_of(schema, spec.id, "nested-in")
    ]
    if hits:
        return RequirementCheck(
            "R5", True, f"scope-context regime(s) {', '.join(hits)} admit self-nesting via nested-in"
        )
    return RequirementCheck(
        "R5", False, "no scope-context regime admits self-nesting via nested-in"
    )


def _check_r6(schema: SubstrateSchema) -> RequirementCheck:
    occurrents = {spec.id for spec in schema.regimes if spec.persistence == OCCURRENT}
    for spec in schema.regimes:
        if spec.persistence != RECORD:
            continue
        outgoing = {
            sig.rel_type for sig in schema.signatures if spec.id in sig.src_regimes
        }
        if not outgoing <= {"measures", "anchored-at"} or "measures" not in outgoing:
            continue
        measured = {
            dst
            for sig in schema.signatures
            if sig.rel_type == "measures" and spec.id in sig.src_regimes
            for dst in sig.dst_regimes
        }
        if measured & occurrents:
            return RequirementCheck(
                "R6",
                False,
                f"record regime {spec.id} measures occurrent regime(s) "
                f"{', '.join(sorted(measured & occurrents))}",
            )
        return RequirementCheck(
            "R6",
            True,
            f"record regime {spec.id} measures only non-occurrent referents "
            f"({', '.join(sorted(measured))}) and emits only measures/anchored-at",
        )
    return RequirementCheck(
        "R6", False, "no record regime measures stable referents via measures/anchored-at only"
    )


def _is_source_of(schema: SubstrateSchema, regime_id: str, rel_type: str) -> bool:
    return any(
        sig.rel_type == rel_type and regime_id in sig.src_regimes for sig in schema.signatures
    )


def _is_destination_of(schema: SubstrateSchema, regime_id: str, rel_type: str) -> bool:
    return any(
        sig.rel_type == rel_type and regime_id in sig.dst_regimes for sig in schema.signatures
    )


# -- distinct realization -----------------------------------------------------------


@dataclass(frozen=True)
class RealizationReport:
    """Whether each capability flag is realized by its own single-capability regime.

    A regime carrying two flags is a collapsed regime in disguise: telling its
    members apart by capacity would need an entity-level discriminator.
    """

    realized: dict  # flag -> sorted regime ids
    missing_flags: tuple[str, ...]
    multi_flag_regimes: tuple[str, ...]
    flagless_regimes: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not (self.missing_flags or self.multi_flag_regimes or self.flagless_regimes)

    def to_payload(self) -> dict:
        return {
            "realized": {flag: list(ids) for flag, ids in sorted(self.realized.items())},
            "missingFlags": list(self.missing_flags),
            "multiFlagRegimes": list(self.multi_flag_regimes),
            "flaglessRegimes": list(self.flagless_regimes),
            "passed": self.passed,
        }


def check_realization(schema: SubstrateSchema) -> RealizationReport:
    realized = {
        flag: sorted(spec.id for spec in schema.regimes if flag in spec.capabilities)
        for flag in CAPABILITY_FLAGS
    }
    return RealizationReport(
        realized=realized,
        missing_flags=tuple(flag for flag in CAPABILITY_FLAGS if not realized[flag]),
        multi_flag_regimes=tuple(
            spec.id for spec in schema.regimes if len(spec.capabilities) > 1
        ),
        flagless_regimes=tuple(
            spec.id for spec in schema.regimes if not spec.capabilities
        ),
    )


# -- tightness ------------------------------------------------------------------------


@dataclass(frozen=True)
class TightnessReport:
    """Necessity (no admissible collapse, capacities distinctly realized) plus
    sufficiency (requirement checklist), with an overall tightness verdict."""

    schema_digest: str
    claim_attached: bool
    regime_count: int
    pairs: PairsReport
    partitions: PartitionsReport
    realization: RealizationReport
    requirements: RequirementReport

    @property
    def necessity_passed(self) -> bool:
        return (
            self.pairs.all_inadmissible
            and self.partitions.all_inadmissible
            and self.realization.passed
        )

    @property
    def sufficiency_passed(self) -> bool:
        return self.requirements.overall

    @property
    def verdict(self) -> str:
        if self.necessity_passed and self.sufficiency_passed:
            return f"tight at {self.regime_count}"
        return "not tight"

    def to_payload(self) -> dict:
        return {
            "schemaDigest": self.schema_digest,
            "claim": "tightness analysis" if self.claim_attached else NO_CLAIM_LABEL,
            "claimAttached": self.claim_attached,
            "regimeCount": self.regime_count,
            "necessity": {
                "pairs": {
                    "total": self.pairs.total,
                    "inadmissible": self.pairs.inadmissible,
                    "allInadmissible": self.pairs.all_inadmissible,
                },
                "partitions": {
                    "partitionCount": self.partitions.partition_count,
                    "inadmissible": self.partitions.inadmissible,
                    "allInadmissible": self.partitions.all_inadmissible,
                },
                "distinctRealization": self.realization.to_payload(),
                "passed": self.necessity_passed,
            },
            "sufficiency": {
                "requirements": self.requirements.to_payload(),
                "passed": self.sufficiency_passed,
            },
            "verdict": self.verdict,
        }


def tightness_report(schema: SubstrateSchema) -> TightnessReport:
    return TightnessReport(
        schema_digest=schema.digest(),
        claim_attached=schema.is_default(),
        regime_count=len(schema.regimes),
        pairs=verify_all_pairs(schema),
        partitions=verify_partitions(schema),
        realization=check_realization(schema),
        requirements=check_requirements(schema),
    )
