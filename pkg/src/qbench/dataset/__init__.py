from .records import (
    BenchmarkRecord,
    PathParts,
    canonical_json,
    content_hash,
    parse_record_path,
    record_path,
    timestamp_slug,
)
from .store import ScanResult, StoreError, export_bundle, platforms_index, scan_dataset, upload_record
from .validate import ValidationError, all_schemas, load_schema, validate_benchmark_params, validate_params

__all__ = [
    "BenchmarkRecord",
    "PathParts",
    "ScanResult",
    "StoreError",
    "ValidationError",
    "all_schemas",
    "canonical_json",
    "content_hash",
    "export_bundle",
    "load_schema",
    "parse_record_path",
    "platforms_index",
    "record_path",
    "scan_dataset",
    "timestamp_slug",
    "upload_record",
    "validate_benchmark_params",
    "validate_params",
]
