"""File-tree dataset: atomic uploads, filtered scans and export bundles."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from ..registry import canonical_name
from .records import BenchmarkRecord, parse_record_path, record_path
from .validate import ValidationError, validate_benchmark_params


class StoreError(RuntimeError):
    pass


def _atomic_write(target: Path, data: bytes) -> None:
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".part", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def upload_record(root: str | Path, rec: BenchmarkRecord) -> Path:
    """Write ``rec`` under ``root``; identical content is a no-op."""
    validate_benchmark_params(rec.params)
    target = Path(root) / record_path(rec)
    data = (rec.to_json() + "\n").encode("utf-8")
    if target.exists():
        if target.read_bytes() == data:
            return target
        raise StoreError(f"different content already stored at {target}")
    _atomic_write(target, data)
    return target


@dataclass
class ScanResult:
    records: list[BenchmarkRecord] = field(default_factory=list)
    paths: list[Path] = field(default_factory=list)
    diagnostics: list[tuple[str, str]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def load_record(path: Path) -> BenchmarkRecord:
    rec = BenchmarkRecord.from_json(path.read_text(encoding="utf-8"))
    validate_benchmark_params(rec.params)
    parts = parse_record_path(path.as_posix())
    expected = (rec.source, rec.version, rec.provider, rec.device, rec.benchmark_type, rec.id)
    found = (parts.source, parts.version, parts.provider, parts.device, parts.benchmark_type, parts.hash)
    if expected != found:
        raise ValueError("file location does not match record fields")
    return rec


def scan_dataset(
    root: str | Path,
    provider: str | None = None,
    device: str | None = None,
    benchmark: str | None = None,
    version: str | None = None,
    source: str | None = None,
) -> ScanResult:
    """Load every matching record; unreadable or invalid files go to ``diagnostics``."""
    root = Path(root)
    out = ScanResult()
    if not root.exists():
        raise StoreError(f"dataset root {root} does not exist")
    want = canonical_name(benchmark) if benchmark else None
    for path in sorted(root.rglob("*.json")):
        rel = path.relative_to(root)
        if any(p.startswith(".") for p in rel.parts):
            continue
        try:
            rec = load_record(path)
        except (OSError, ValueError, KeyError, TypeError, ValidationError) as exc:
            out.diagnostics.append((str(path), f"{type(exc).__name__}: {exc}"))
            continue
        if provider and rec.provider != provider:
            continue
        if device and rec.device != device:
            continue
        if want and rec.benchmark_name != want:
            continue
        if version and rec.version != version:
            continue
        if source and rec.source != source:
            continue
        out.records.append(rec)
        out.paths.append(path)
    return out


def platforms_index(records: list[BenchmarkRecord]) -> list[dict]:
    index: dict[tuple[str, str], dict] = {}
    for rec in records:
        entry = index.setdefault(
            (rec.provider, rec.device),
            {"provider": rec.provider, "device": rec.device, "num_records": 0, "benchmarks": set(), "latest": ""},
        )
        entry["num_records"] += 1
        entry["benchmarks"].add(rec.benchmark_name)
        entry["latest"] = max(entry["latest"], rec.timestamp)
    return [
        {**e, "benchmarks": sorted(e["benchmarks"])} for _, e in sorted(index.items())
    ]


def export_bundle(records: list[BenchmarkRecord], out_dir: str | Path) -> tuple[Path, Path]:
    """Write benchmarks.json (array of records) and platforms.json (device index)."""
    out_dir = Path(out_dir)
    ordered = sorted(records, key=lambda r: (r.provider, r.device, r.timestamp, r.id))
    bench = out_dir / "benchmarks.json"
    plat = out_dir / "platforms.json"
    _atomic_write(bench, (json.dumps([r.to_dict() for r in ordered], indent=2, sort_keys=True) + "\n").encode())
    _atomic_write(plat, (json.dumps(platforms_index(ordered), indent=2, sort_keys=True) + "\n").encode())
    return bench, plat
