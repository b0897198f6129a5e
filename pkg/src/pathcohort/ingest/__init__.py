"""CSV ingestion, factor encoding, report extraction and bundle checks."""

from .bundle import BundleReport, validate_bundle
from .extract import (
    Extraction,
    RawReport,
    RuleBasedExtractor,
    extract_factors,
    load_reports,
    stage_from_tnm,
)
from .schema import (
    FactorSchema,
    FactorSpec,
    continuous_schema,
    load_schema,
    parse_schema,
)
from .tables import (
    RecordsLoad,
    lineage_from_features,
    load_features,
    load_lineage,
    load_records,
    read_feature_table,
    read_records,
    write_features,
    write_lineage,
    write_records,
)

__all__ = [
    "BundleReport",
    "Extraction",
    "FactorSchema",
    "FactorSpec",
    "RawReport",
    "RecordsLoad",
    "RuleBasedExtractor",
    "continuous_schema",
    "extract_factors",
    "lineage_from_features",
    "load_features",
    "load_lineage",
    "load_records",
    "load_reports",
    "load_schema",
    "parse_schema",
    "read_feature_table",
    "read_records",
    "stage_from_tnm",
    "validate_bundle",
    "write_features",
    "write_lineage",
    "write_records",
]
