import datetime
import json
import multiprocessing as mp
import threading

import jsonschema
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbench.dataset.records import BenchmarkRecord, content_hash, parse_record_path, record_path
from qbench.dataset.store import StoreError, export_bundle, scan_dataset, upload_record
from qbench.dataset.validate import ValidationError, all_schemas, load_schema, validate_benchmark_params, validate_params

TS = "2026-03-04T05:06:07Z"


def qml_record(n=10, accuracy=0.9, ts=TS, device="dev-a", provider="local", **kw):
    return BenchmarkRecord("QML Kernel", provider, device, {"benchmark_name": "QML Kernel", "num_qubits": n, "shots": 100},
                           {"accuracy": accuracy}, {"seed": 1}, ts, **kw)


safe = st.from_regex(r"[A-Za-z0-9][A-Za-z0-9._-]{0,12}", fullmatch=True).filter(lambda s: s not in (".", ".."))
stamps = st.datetimes(min_value=datetime.datetime(1970, 1, 1)).map(lambda d: d.strftime("%Y-%m-%dT%H:%M:%SZ"))


class TestRecords:
    def test_id_is_content_hash(self):
        rec = qml_record()
        assert rec.id == content_hash(rec.params, rec.results, rec.provenance)
        assert len(rec.id) == 8
        # timestamps and placement do not change identity
        assert qml_record(ts="2027-01-01T00:00:00Z", device="other").id == rec.id
        assert qml_record(accuracy=0.8).id != rec.id

    def test_hash_ignores_key_order(self):
        a = content_hash({"a": 1, "b": [1, 2]}, {"x": 1.5}, {})
        b = content_hash({"b": [1, 2], "a": 1}, {"x": 1.5}, {})
        assert a == b

    def test_json_round_trip(self):
        rec = qml_record()
        again = BenchmarkRecord.from_json(rec.to_json())
        assert again == rec
        bad = rec.to_dict()
        bad["id"] = "00000000"
        with pytest.raises(ValueError):
            BenchmarkRecord.from_dict(bad)

    @given(safe, safe, safe, stamps)
    def test_path_round_trip(self, provider, device, version, ts):
        rec = qml_record(provider=provider, device=device, ts=ts, version=version)
        parts = parse_record_path(record_path(rec))
        assert (parts.provider, parts.device, parts.version, parts.timestamp) == (provider, device, version, ts)
        assert parts.benchmark_type == "qml_kernel" and parts.hash == rec.id

    @pytest.mark.parametrize("device", ["..", "a/b", "", ".hidden"])
    def test_unsafe_components(self, device):
        with pytest.raises(ValueError):
            record_path(qml_record(device=device))

    def test_canonical_benchmark_name(self):
        rec = BenchmarkRecord("qml_kernel", "p", "d", {"benchmark_name": "QML Kernel", "num_qubits": 2}, {}, {}, TS)
        assert rec.benchmark_name == "QML Kernel"


def _value_for(spec):
    t = spec.get("type")
    if t == "integer":
        return st.integers(-3, 300)
    if t == "number":
        return st.floats(-3, 300, allow_nan=False)
    if t == "boolean":
        return st.booleans()
    if t == "string":
        return st.sampled_from(spec.get("enum", ["x", "1D", "cz"]))
    if t == "array":
        return st.lists(st.integers(-2, 50), max_size=4)
    return st.none()


@st.composite
def params_for(draw, name):
    schema = load_schema(name)
    props = schema["properties"]
    out = {}
    for key, spec in props.items():
        if key == "benchmark_name":
            out[key] = name
            continue
        mode = draw(st.sampled_from(["omit", "valid", "wrong_type"]))
        if mode == "valid":
            out[key] = draw(_value_for(spec))
        elif mode == "wrong_type":
            out[key] = draw(st.sampled_from(["str", 1.5, True, None, [1]]))
    return out


class TestValidator:
    @pytest.mark.parametrize("name", sorted(all_schemas()))
    @given(data=st.data())
    def test_agrees_with_jsonschema(self, name, data):
        schema = load_schema(name)
        params = data.draw(params_for(name))
        oracle = jsonschema.Draft202012Validator(schema)
        expected_ok = oracle.is_valid(params)
        try:
            validate_params(schema, params)
            ok = True
        except ValidationError:
            ok = False
        assert ok == expected_ok, list(oracle.iter_errors(params))

    def test_schemas_are_valid(self):
        for schema in all_schemas().values():
            jsonschema.Draft202012Validator.check_schema(schema)

    def test_collects_every_error(self):
        with pytest.raises(ValidationError) as exc:
            validate_benchmark_params({"benchmark_name": "QML Kernel", "num_qubits": 1, "shots": 0})
        assert "num_qubits: minimum 2, got 1" in exc.value.errors
        assert len(exc.value.errors) == 2

    def test_required_and_defaults(self):
        with pytest.raises(ValidationError, match="missing required field 'num_qubits'"):
            validate_benchmark_params({"benchmark_name": "QML Kernel"})
        out = validate_benchmark_params({"benchmark_name": "QML Kernel", "num_qubits": 4})
        assert out["shots"] == 1000

    def test_unknown_benchmark(self):
        with pytest.raises(ValidationError):
            validate_benchmark_params({"benchmark_name": "Nope"})


class TestStore:
    def test_upload_scan(self, tmp_path):
        path = upload_record(tmp_path, qml_record())
        assert path.relative_to(tmp_path).as_posix() == record_path(qml_record())
        # idempotent
        assert upload_record(tmp_path, qml_record()) == path
        scan = scan_dataset(tmp_path)
        assert len(scan) == 1 and scan.records[0] == qml_record() and not scan.diagnostics

    def test_conflicting_content(self, tmp_path):
        path = upload_record(tmp_path, qml_record())
        path.write_text(path.read_text().replace("local", "local "))
        with pytest.raises(StoreError):
            upload_record(tmp_path, qml_record())

    def test_invalid_params_rejected(self, tmp_path):
        rec = BenchmarkRecord("QML Kernel", "p", "d", {"benchmark_name": "QML Kernel", "num_qubits": 1}, {}, {}, TS)
        with pytest.raises(ValidationError):
            upload_record(tmp_path, rec)
        assert not any(tmp_path.rglob("*.json"))

    def test_scan_filters_and_diagnostics(self, tmp_path):
        upload_record(tmp_path, qml_record(device="a"))
        upload_record(tmp_path, qml_record(device="b", provider="other"))
        upload_record(tmp_path, qml_record(device="a", n=12))
        bad = tmp_path / "qbench" / "v0.1" / "local" / "a" / "20260101T000000Z_qml_kernel_deadbeef.json"
        bad.write_text("{not json")
        moved = tmp_path / "qbench" / "v0.1" / "local" / "c"
        moved.mkdir()
        src = next((tmp_path / "qbench" / "v0.1" / "local" / "a").glob("*_qml_kernel_*.json"))
        (moved / src.name).write_text(src.read_text())
        scan = scan_dataset(tmp_path, device="a")
        assert len(scan) == 2
        assert len(scan_dataset(tmp_path, provider="other")) == 1
        assert len(scan_dataset(tmp_path, benchmark="qml_kernel")) == 3
        assert len(scan_dataset(tmp_path, version="v9")) == 0
        assert len(scan.diagnostics) == 2
        with pytest.raises(StoreError):
            scan_dataset(tmp_path / "missing")

    def test_concurrent_writers_threads(self, tmp_path):
        errors = []

        def writer(offset):
            try:
                for i in range(20):
                    upload_record(tmp_path, qml_record(accuracy=(i % 10) / 10))
                    upload_record(tmp_path, qml_record(n=20 + offset, accuracy=i / 20))
            except Exception as exc:
                errors.append(exc)

        threads = [threading.Thread(target=writer, args=(k,)) for k in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        scan = scan_dataset(tmp_path)
        assert len(scan) == 10 + 40 and not scan.diagnostics
        assert not list(tmp_path.rglob("*.part"))

    def test_concurrent_writers_processes(self, tmp_path):
        ctx = mp.get_context("fork")
        procs = [ctx.Process(target=_write_many, args=(str(tmp_path),)) for _ in range(2)]
        for p in procs:
            p.start()
        for p in procs:
            p.join(60)
            assert p.exitcode == 0
        scan = scan_dataset(tmp_path)
        assert len(scan) == 25 and not scan.diagnostics

    def test_export(self, tmp_path):
        for dev in ("b", "a"):
            upload_record(tmp_path / "ds", qml_record(device=dev))
        bench, plat = export_bundle(scan_dataset(tmp_path / "ds").records, tmp_path / "out")
        records = json.loads(bench.read_text())
        assert [r["device"] for r in records] == ["a", "b"]
        index = json.loads(plat.read_text())
        assert index[0] == {"provider": "local", "device": "a", "num_records": 1, "benchmarks": ["QML Kernel"], "latest": TS}


def _write_many(root):
    for i in range(25):
        upload_record(root, qml_record(accuracy=i / 25))
