"""nsub: a neutral accountability substrate with a regime-collapse verifier.

An append-only store of typed entities and directional relation edges, six
identity-and-persistence regimes with attribute-blind edge admissibility,
interpretive extension layers that cannot disturb the substrate, an
exhaustive collapse/requirement verifier emitting re-checkable certificates,
and bit-exact .nslog / .clif interchange.
"""

from .errors import (
    DanglingTarget,
    DuplicateId,
    DuplicateLayerName,
    ForbiddenTemporalAnchor,
    InputFormatError,
    MalformedAttribute,
    MalformedId,
    MalformedLine,
    MalformedTimestamp,
    MissingTemporalAnchor,
    NamespaceViolation,
    RegimeViolation,
    ReplayViolation,
    SameRegime,
    SchemaFormatError,
    SequenceGap,
    SubstrateError,
    UnknownEntity,
    UnknownRegime,
    UnknownRelationType,
)
from .interchange import export_clif, export_log, import_log, split_clif_sections
from .layers import (
    Annotation,
    Conflict,
    ConservativityReport,
    ExtensionLayer,
    LayeredStore,
    LocalEntity,
    LocalLink,
    check_conservative,
)
from .schema import (
    CAPABILITY_FLAGS,
    DEFAULT_REGIME_IDS,
    ENDURANT,
    OCCURRENT,
    PERSISTENCE_CLASSES,
    RECORD,
    RegimeSpec,
    RelationSignature,
    SubstrateSchema,
    canonical_json,
    default_schema,
    load_schema,
    parse_schema,
    schema_from_dict,
)
from .store import Entity, RelationEdge, SubstrateStore
from .verifier import (
    CATEGORY_ERROR,
    FAILURE_MODES,
    HIDDEN_REGIME,
    IDENTITY_INSTABILITY,
    CollapseCertificate,
    RequirementReport,
    TightnessReport,
    check_realization,
    check_requirements,
    collapse_pair,
    set_partitions,
    tightness_report,
    verify_all_pairs,
    verify_partitions,
)

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "CATEGORY_ERROR",
    "CAPABILITY_FLAGS",
    "CollapseCertificate",
    "Conflict",
    "ConservativityReport",
    "DanglingTarget",
    "DEFAULT_REGIME_IDS",
    "DuplicateId",
    "DuplicateLayerName",
    "ENDURANT",
    "Entity",
    "ExtensionLayer",
    "FAILURE_MODES",
    "ForbiddenTemporalAnchor",
    "HIDDEN_REGIME",
    "IDENTITY_INSTABILITY",
    "InputFormatError",
    "LayeredStore",
    "LocalEntity",
    "LocalLink",
    "MalformedAttribute",
    "MalformedId",
    "MalformedLine",
    "MalformedTimestamp",
    "MissingTemporalAnchor",
    "NamespaceViolation",
    "OCCURRENT",
    "PERSISTENCE_CLASSES",
    "RECORD",
    "RegimeSpec",
    "RegimeViolation",
    "RelationEdge",
    "RelationSignature",
    "ReplayViolation",
    "RequirementReport",
    "SameRegime",
    "SchemaFormatError",
    "SequenceGap",
    "SubstrateError",
    "SubstrateSchema",
    "SubstrateStore",
    "TightnessReport",
    "UnknownEntity",
    "UnknownRegime",
    "UnknownRelationType",
    "canonical_json",
    "check_conservative",
    "check_realization",
    "check_requirements",
    "collapse_pair",
    "default_schema",
    "export_clif",
    "export_log",
    "import_log",
    "load_schema",
    "parse_schema",
    "schema_from_dict",
    "set_partitions",
    "split_clif_sections",
    "tightness_report",
    "verify_all_pairs",
    "verify_partitions",
]
