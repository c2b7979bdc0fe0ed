"""Benchmark records, canonical JSON, content hashes and dataset paths."""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from ..registry import canonical_name, slug

DEFAULT_SOURCE = "qbench"
DEFAULT_VERSION = "v0.1"

_SAFE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")
_STAMP = "%Y%m%dT%H%M%SZ"
_FILE = re.compile(r"^(\d{8}T\d{6}Z)_([a-z0-9_]+)_([0-9a-f]{8})\.json$")


def _clean(obj):
    """JSON-ready copy: tuples to lists, numpy scalars to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def canonical_json(obj) -> str:
    """Key-sorted, compact, shortest-repr floats; stable across platforms."""
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def content_hash(params: dict, results: dict, provenance: dict) -> str:
    blob = canonical_json({"params": params, "results": results, "provenance": provenance})
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:8]


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).strftime("%Y-%m-%dT%H:%M:%SZ")


def timestamp_slug(ts: str) -> str:
    """ISO-8601 UTC to basic format without colons, e.g. 20251201T100000Z."""
    text = ts.strip().replace("Z", "+00:00")
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime(_STAMP)


def parse_timestamp_slug(s: str) -> str:
    return datetime.strptime(s, _STAMP).strftime("%Y-%m-%dT%H:%M:%SZ")


def _safe(part: str, what: str) -> str:
    if not isinstance(part, str) or not _SAFE.match(part) or part in (".", ".."):
        raise ValueError(f"unsafe {what} path component {part!r}")
    return part


@dataclass
class BenchmarkRecord:
    benchmark_name: str
    provider: str
    device: str
    params: dict
    results: dict
    provenance: dict = field(default_factory=dict)
    timestamp: str = field(default_factory=utc_now)
    source: str = DEFAULT_SOURCE
    version: str = DEFAULT_VERSION

    def __post_init__(self) -> None:
        self.benchmark_name = canonical_name(self.benchmark_name)
        self.params = _clean(self.params)
        self.results = _clean(self.results)
        self.provenance = _clean(self.provenance)

    @property
    def id(self) -> str:
        return content_hash(self.params, self.results, self.provenance)

    @property
    def benchmark_type(self) -> str:
        return slug(self.benchmark_name)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "timestamp": self.timestamp,
            "source": self.source,
            "version": self.version,
            "provider": self.provider,
            "device": self.device,
            "benchmark_name": self.benchmark_name,
            "params": self.params,
            "results": self.results,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, check_id: bool = True) -> BenchmarkRecord:
        rec = cls(
            benchmark_name=data["benchmark_name"],
            provider=data["provider"],
            device=data["device"],
            params=data["params"],
            results=data["results"],
            provenance=data.get("provenance", {}),
            timestamp=data["timestamp"],
            source=data.get("source", DEFAULT_SOURCE),
            version=data.get("version", DEFAULT_VERSION),
        )
        if check_id and "id" in data and data["id"] != rec.id:
            raise ValueError(f"record id {data['id']} does not match content hash {rec.id}")
        return rec

    @classmethod
    def from_json(cls, text: str) -> BenchmarkRecord:
        return cls.from_dict(json.loads(text))


def record_path(rec: BenchmarkRecord) -> str:
    """Relative path {source}/{version}/{provider}/{device}/{stamp}_{type}_{hash}.json."""
    parts = [
        _safe(rec.source, "source"),
        _safe(rec.version, "version"),
        _safe(rec.provider, "provider"),
        _safe(rec.device, "device"),
    ]
    name = f"{timestamp_slug(rec.timestamp)}_{rec.benchmark_type}_{rec.id}.json"
    return "/".join(parts + [name])


@dataclass(frozen=True)
class PathParts:
    source: str
    version: str
    provider: str
    device: str
    timestamp: str
    benchmark_type: str
    hash: str


def parse_record_path(path: str) -> PathParts:
    pieces = str(path).replace("\\", "/").strip("/").split("/")
    if len(pieces) < 5:
        raise ValueError(f"not a record path: {path!r}")
    source, version, provider, device, fname = pieces[-5:]
    m = _FILE.match(fname)
    if not m:
        raise ValueError(f"bad record file name {fname!r}")
    return PathParts(source, version, provider, device, parse_timestamp_slug(m.group(1)), m.group(2), m.group(3))
