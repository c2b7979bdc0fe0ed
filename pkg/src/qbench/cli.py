"""``qbench <resource> <action>`` command line.

Settings resolve as: built-in defaults, then a JSON config file (``--config``
or ``QBENCH_CONFIG``), then ``QBENCH_*`` environment variables, then flags.

Exit codes:
    0  success
    2  usage or validation error (bad arguments, invalid parameters or config)
    3  unknown job, suite or device
    4  execution failure (a job or suite ended in state failed)
    5  file or dataset I/O failure
    130 interrupted
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analytics import DEFAULT_LAMBDA, ScoreMatrix, analyze, correlation_csv, correlation_matrix
from .circuits.devices import load_registry
from .dataset.records import BenchmarkRecord
from .dataset.store import StoreError, export_bundle, scan_dataset, upload_record
from .dataset.validate import ValidationError, validate_benchmark_params
from .plots import decay_curves, heatmap, width_chart
from .registry import canonical_name
from .runtime.cost import PricingError, PricingModel, estimate_cost
from .runtime.jobs import JobManager, SuiteSpec, UnknownDeviceError, UnknownJobError, bundled_suite
from .runtime.runners import result_points
from .scoring import SeriesSpec, bundled_series, compute_score_table, load_table1, score_subscores, values_from_records

EXIT_OK, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_FAILED, EXIT_IO, EXIT_INTERRUPTED = 0, 2, 3, 4, 5, 130
FORMATS = ("table", "json", "csv")

_ENV = {
    "provider": "QBENCH_PROVIDER",
    "device": "QBENCH_DEVICE",
    "dataset_root": "QBENCH_DATASET_ROOT",
    "jobs_root": "QBENCH_JOBS_ROOT",
    "registry": "QBENCH_DEVICE_REGISTRY",
    "format": "QBENCH_FORMAT",
    "seed": "QBENCH_SEED",
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class CliConfig:
    provider: str = "local"
    device: str | None = None
    dataset_root: Path = Path("dataset")
    jobs_root: Path = Path.home() / ".qbench"
    registry: Path | None = None
    format: str = "table"
    seed: int | None = None


def resolve_config(ns: argparse.Namespace, env=None) -> CliConfig:
    env = os.environ if env is None else env
    values: dict = {}
    cfg_path = getattr(ns, "config", None) or env.get("QBENCH_CONFIG")
    if cfg_path:
        try:
            values.update(json.loads(Path(cfg_path).read_text()))
        except OSError as exc:
            raise CliError(f"cannot read config {cfg_path}: {exc}", EXIT_IO) from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"config {cfg_path} is not valid JSON: {exc}", EXIT_USAGE) from exc
    for key, var in _ENV.items():
        if env.get(var):
            values[key] = env[var]
    for key in _ENV:
        flag = getattr(ns, key, None)
        if flag is not None:
            values[key] = flag
    unknown = set(values) - set(CliConfig.__dataclass_fields__)
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}", EXIT_USAGE)
    cfg = CliConfig(**values)
    cfg.dataset_root = Path(cfg.dataset_root).expanduser().resolve()
    cfg.jobs_root = Path(cfg.jobs_root).expanduser().resolve()
    cfg.registry = Path(cfg.registry).expanduser().resolve() if cfg.registry else None
    if cfg.format not in FORMATS:
        raise CliError(f"--format must be one of {FORMATS}", EXIT_USAGE)
    if cfg.seed is not None:
        try:
            cfg.seed = int(cfg.seed)
        except ValueError:
            raise CliError(f"seed must be an integer, got {cfg.seed!r}", EXIT_USAGE) from None
    return cfg


# -- helpers ------------------------------------------------------------------


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}", EXIT_USAGE) from exc


def _write(path: str | Path, text: str) -> Path:
    try:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
        return p
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _registry(cfg: CliConfig):
    try:
        return load_registry(cfg.registry)
    except OSError as exc:
        raise CliError(f"cannot read device registry: {exc}", EXIT_IO) from exc


def _manager(cfg: CliConfig) -> JobManager:
    return JobManager(cfg.jobs_root, registry=_registry(cfg), background=False)


def _need_device(cfg: CliConfig) -> str:
    if not cfg.device:
        raise CliError("no device given (use --device or QBENCH_DEVICE)", EXIT_USAGE)
    return cfg.device


def _job_summary(job, full: bool = False) -> dict:
    out = {
        "job_id": job.job_id,
        "benchmark_name": job.benchmark_name,
        "provider": job.provider,
        "device": job.device,
        "state": job.state,
        "seed": job.seed,
        "fingerprint": job.fingerprint,
        "timestamps": job.timestamps,
    }
    if job.suite_id:
        out["suite_id"] = job.suite_id
    if job.error:
        out["error"] = job.error
    if full:
        out["params"] = job.params
        out["dispatch_data"] = job.dispatch_data
    if job.result:
        out["record"] = job.result
    return out


def _upload(cfg: CliConfig, record: dict) -> str:
    try:
        return str(upload_record(cfg.dataset_root, BenchmarkRecord.from_dict(record)))
    except (OSError, StoreError) as exc:
        raise CliError(f"upload failed: {exc}", EXIT_IO) from exc


def _scan(cfg: CliConfig, **filters):
    try:
        return scan_dataset(cfg.dataset_root, **filters)
    except StoreError as exc:
        raise CliError(str(exc), EXIT_IO) from exc


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _table(rows: list[list]) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


class Output:
    """Structured payload plus an optional tabular view for table/csv formats."""

    def __init__(self, data, rows: list[list] | None = None, text: str | None = None, code: int = EXIT_OK):
        self.data, self.rows, self.text, self.code = data, rows, text, code

    def render(self, fmt: str) -> str:
        if fmt == "json" or (self.rows is None and self.text is None):
            return json.dumps(self.data, indent=2, sort_keys=True, default=str) + "\n"
        if self.text is not None and (fmt == "table" or self.rows is None):
            return self.text
        return _csv(self.rows) if fmt == "csv" else _table(self.rows)


# -- commands -----------------------------------------------------------------


def cmd_job_dispatch(ns, cfg):
    params = _read_json(ns.config_file)
    job_id = _manager(cfg).dispatch(params, cfg.provider, _need_device(cfg), seed=cfg.seed)
    return Output({"job_id": job_id}, text=job_id + "\n")


def _poll_rows(jobs, uploads):
    rows = [["job_id", "benchmark", "device", "state", "detail"]]
    for j in jobs:
        detail = uploads.get(j.job_id) or j.error or ""
        rows.append([j.job_id, j.benchmark_name, j.device, j.state, detail])
    return rows


def cmd_job_poll(ns, cfg):
    job = _manager(cfg).poll(ns.job_id)
    out = _job_summary(job)
    uploads = {}
    if ns.upload and job.state == "done":
        out["uploaded"] = uploads[job.job_id] = _upload(cfg, job.result)
    return Output(out, rows=_poll_rows([job], uploads), code=EXIT_FAILED if job.state == "failed" else EXIT_OK)


def cmd_job_view(ns, cfg):
    job = _manager(cfg).view(ns.job_id)
    return Output(_job_summary(job, full=True), code=EXIT_FAILED if job.state == "failed" else EXIT_OK)


def cmd_job_list(ns, cfg):
    jobs = _manager(cfg).jobs()
    return Output([_job_summary(j) for j in jobs], rows=_poll_rows(jobs, {}))


def cmd_job_upload(ns, cfg):
    job = _manager(cfg).poll(ns.job_id)
    if job.state == "failed":
        raise CliError(f"job {job.job_id} failed: {job.error}", EXIT_FAILED)
    if job.state != "done":
        raise CliError(f"job {job.job_id} is {job.state}; nothing to upload yet", EXIT_FAILED)
    path = _upload(cfg, job.result)
    return Output({"job_id": job.job_id, "path": path}, text=path + "\n")


def cmd_job_estimate(ns, cfg):
    params = validate_benchmark_params(_read_json(ns.config_file))
    pricing = None
    try:
        if ns.pricing:
            pricing = PricingModel.from_dict(_read_json(ns.pricing))
        elif ns.model:
            pricing = PricingModel.from_dict({"model": ns.model})
    except PricingError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    reg = _registry(cfg)
    name = _need_device(cfg)
    if name not in reg:
        raise CliError(f"unknown device {name!r}", EXIT_NOT_FOUND)
    est = estimate_cost(params, reg[name], pricing, seed=cfg.seed or 0)
    d = est.to_dict()
    return Output(d, rows=[["field", "value"], *([k, "" if v is None else v] for k, v in d.items())])


def _load_suite(ref: str) -> SuiteSpec:
    path = Path(ref)
    if path.exists():
        return SuiteSpec.from_dict(_read_json(ref))
    try:
        return bundled_suite(path.stem)
    except FileNotFoundError:
        raise CliError(f"suite file {ref} not found", EXIT_IO) from None


def cmd_suite_dispatch(ns, cfg):
    suite = _load_suite(ns.suite_file)
    suite_id, ids = _manager(cfg).dispatch_suite(suite, cfg.provider, _need_device(cfg), seed=cfg.seed)
    return Output({"suite_id": suite_id, "job_ids": ids}, text="\n".join([f"suite {suite_id}", *ids]) + "\n")


def cmd_suite_poll(ns, cfg):
    jobs = _manager(cfg).poll_suite(ns.suite_id)
    uploads = {}
    if ns.upload:
        for j in jobs:
            if j.state == "done":
                uploads[j.job_id] = _upload(cfg, j.result)
    data = {"suite_id": ns.suite_id, "jobs": [_job_summary(j) for j in jobs]}
    if uploads:
        data["uploaded"] = uploads
    failed = any(j.state == "failed" for j in jobs)
    return Output(data, rows=_poll_rows(jobs, uploads), code=EXIT_FAILED if failed else EXIT_OK)


def _series(ref: str) -> SeriesSpec:
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        try:
            return SeriesSpec.from_dict(_read_json(ref))
        except (KeyError, TypeError, ValueError) as exc:
            raise CliError(f"invalid series file {ref}: {exc}", EXIT_USAGE) from exc
    try:
        return bundled_series(ref)
    except FileNotFoundError:
        raise CliError(f"no bundled series {ref!r}", EXIT_NOT_FOUND) from None


def _table1_output(path):
    try:
        rows = load_table1(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    spec = bundled_series("v0.4")
    weights = spec.weights()
    computed = score_subscores({r.device: r.subscores for r in rows}, weights)
    data = {
        "weights": weights,
        "devices": [
            {
                "device": r.device,
                "subscores": r.subscores,
                "printed_score": r.metriq_score,
                "metriq_score": computed[r.device],
                "flags": r.flags,
            }
            for r in rows
        ],
    }
    table = [["device", "printed", "computed", "diff"]]
    for r in rows:
        table.append([r.device, f"{r.metriq_score:.2f}", f"{computed[r.device]:.2f}", f"{computed[r.device] - r.metriq_score:+.2f}"])
    return data, table


def cmd_score_compute(ns, cfg):
    if ns.table1 is not None:
        data, rows = _table1_output(ns.table1 or None)
        out = Output(data, rows=rows)
    else:
        spec = _series(ns.series)
        if ns.baseline:
            spec.baseline_device = ns.baseline
        records = _scan(cfg, provider=ns.filter_provider).records
        values = values_from_records(records, spec)
        if spec.baseline_device not in values:
            raise CliError(
                f"baseline device {spec.baseline_device!r} has no records under {cfg.dataset_root} "
                f"(devices with records: {sorted(values)})",
                EXIT_NOT_FOUND,
            )
        table = compute_score_table(spec, values)
        out = Output(json.loads(table.to_json()), text=table.to_csv())
        out.rows = list(csv.reader(io.StringIO(table.to_csv())))
    if ns.out:
        _write(ns.out, out.render(cfg.format))
    return out


def _matrix(ns, cfg) -> ScoreMatrix:
    if ns.source == "table1":
        return ScoreMatrix.table1()
    spec = _series(ns.series)
    values = values_from_records(_scan(cfg).records, spec)
    if spec.baseline_device not in values:
        raise CliError(f"baseline device {spec.baseline_device!r} has no records", EXIT_NOT_FOUND)
    return ScoreMatrix.from_score_table(compute_score_table(spec, values))


def cmd_analyze(ns, cfg):
    matrix = _matrix(ns, cfg)
    report = analyze(matrix, lam=ns.lam)
    out_dir = Path(ns.out_dir)
    files = {
        "correlation_csv": str(_write(out_dir / "correlation.csv", correlation_csv(matrix))),
        "report_json": str(_write(out_dir / "analysis.json", json.dumps(report, indent=2, sort_keys=True) + "\n")),
    }
    if ns.svg:
        svg = heatmap(matrix.benchmarks, correlation_matrix(matrix), "Spearman correlation")
        files["heatmap_svg"] = str(_write(out_dir / "correlation.svg", svg))
    summary = {
        "files": files,
        "pca_first_component_variance": report["pca"]["first_component_variance"],
        "ridge_r2_log": report["ridge"]["r2_log"],
        "ridge_lambda": report["ridge"]["lambda"],
    }
    rows = [["quantity", "value"], *([k, v] for k, v in summary.items() if k != "files"), *(list(kv) for kv in files.items())]
    return Output(summary, rows=rows)


def cmd_dataset_scan(ns, cfg):
    res = _scan(cfg, provider=ns.filter_provider, device=ns.filter_device, benchmark=ns.benchmark, version=ns.version)
    data = {
        "records": [
            {"path": str(p), "id": r.id, "benchmark_name": r.benchmark_name, "provider": r.provider,
             "device": r.device, "timestamp": r.timestamp}
            for r, p in zip(res.records, res.paths)
        ],
        "diagnostics": [{"path": p, "error": e} for p, e in res.diagnostics],
    }
    rows = [["id", "benchmark", "provider", "device", "timestamp"]]
    rows += [[r.id, r.benchmark_name, r.provider, r.device, r.timestamp] for r in res.records]
    text = _table(rows) + "".join(f"skipped {p}: {e}\n" for p, e in res.diagnostics)
    return Output(data, rows=rows, text=text)


def cmd_dataset_export(ns, cfg):
    res = _scan(cfg)
    try:
        bench, plat = export_bundle(res.records, ns.out_dir)
    except OSError as exc:
        raise CliError(f"export failed: {exc}", EXIT_IO) from exc
    data = {"benchmarks": str(bench), "platforms": str(plat), "num_records": len(res.records)}
    return Output(data, rows=[["field", "value"], *([k, v] for k, v in data.items())])


def cmd_devices_list(ns, cfg):
    reg = _registry(cfg)
    rows = [["name", "device_id", "provider", "qubits", "edges"]]
    data = []
    for name in sorted(reg):
        d = reg[name]
        data.append({"name": name, "device_id": d.device_id, "provider": d.provider, "qubits": d.num_qubits,
                     "edges": len(d.edges), "fingerprint": d.fingerprint()})
        rows.append([name, d.device_id, d.provider, d.num_qubits, len(d.edges)])
    return Output(data, rows=rows)


def cmd_plot_job(ns, cfg):
    job = _manager(cfg).view(ns.job_id)
    if not job.result:
        raise CliError(f"job {job.job_id} has no result ({job.state})", EXIT_FAILED)
    rec = job.result
    if job.benchmark_name == "EPLG":
        svg = decay_curves(rec["results"])
    else:
        pts = result_points(job.benchmark_name, rec["params"], rec["results"])
        metric = next(iter(next(iter(pts.values()), {})), "value")
        series = {f"{job.benchmark_name} ({rec['device']})": {w: p.get(metric) for w, p in pts.items() if w is not None}}
        svg = width_chart(series, ylabel=metric)
    path = _write(ns.out, svg)
    return Output({"path": str(path)}, text=f"{path}\n")


def cmd_plot_widths(ns, cfg):
    bench = canonical_name(ns.benchmark)
    spec = bundled_series("v0.4")
    metric = next((e.metric for e in spec.entries if e.benchmark == bench), None)
    series: dict[str, dict[int, float]] = {}
    for rec in _scan(cfg, benchmark=bench).records:
        for w, p in result_points(rec.benchmark_name, rec.params, rec.results).items():
            v = p.get(metric)
            if w is not None and isinstance(v, (int, float)):
                series.setdefault(rec.device, {})[w] = v
    path = _write(ns.out, width_chart(series, f"{bench} vs width", metric or "value"))
    return Output({"path": str(path)}, text=f"{path}\n")


# -- parser -------------------------------------------------------------------


def _common(parser: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    parser.add_argument("--provider", default=s, help="provider name (default local)")
    parser.add_argument("--device", default=s, help="device name or alias")
    parser.add_argument("--dataset-root", dest="dataset_root", default=s, help="dataset directory")
    parser.add_argument("--jobs-root", dest="jobs_root", default=s, help="directory holding the job log")
    parser.add_argument("--registry", default=s, help="device registry JSON")
    parser.add_argument("--format", choices=FORMATS, default=s, help="output format")
    parser.add_argument("--seed", type=int, default=s, help="run seed")
    parser.add_argument("--config", default=s, help="JSON config file")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="qbench", description="Simulated quantum benchmark suite.")
    top.add_argument("--version", action="version", version=f"qbench {__version__}")
    _common(top)
    resources = top.add_subparsers(dest="resource", metavar="RESOURCE")
    resources.required = True

    def action(group, name, func, help_):
        p = group.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(func=func)
        return p

    job = resources.add_parser("job", help="single benchmark jobs").add_subparsers(dest="action", metavar="ACTION")
    job.required = True
    action(job, "dispatch", cmd_job_dispatch, "queue a benchmark").add_argument("config_file")
    p = action(job, "poll", cmd_job_poll, "check a job, running due work")
    p.add_argument("job_id")
    p.add_argument("--upload", action="store_true", help="upload the record when done")
    action(job, "view", cmd_job_view, "show a job without running anything").add_argument("job_id")
    action(job, "list", cmd_job_list, "list jobs in the log")
    action(job, "upload", cmd_job_upload, "upload a finished job's record").add_argument("job_id")
    p = action(job, "estimate", cmd_job_estimate, "estimate resources and cost")
    p.add_argument("config_file")
    p.add_argument("--pricing", help="pricing model JSON")
    p.add_argument("--model", choices=("per_task_shot", "hqc", "runtime"), help="pricing model with default constants")

    suite = resources.add_parser("suite", help="benchmark suites").add_subparsers(dest="action", metavar="ACTION")
    suite.required = True
    action(suite, "dispatch", cmd_suite_dispatch, "queue every suite entry").add_argument("suite_file")
    p = action(suite, "poll", cmd_suite_poll, "check all jobs of a suite")
    p.add_argument("suite_id")
    p.add_argument("--upload", action="store_true")

    score = resources.add_parser("score", help="composite score").add_subparsers(dest="action", metavar="ACTION")
    score.required = True
    p = action(score, "compute", cmd_score_compute, "score devices from records or the bundled summary table")
    p.add_argument("--series", default="v0.4", help="bundled series name or series JSON file")
    p.add_argument("--baseline", help="override the baseline device")
    p.add_argument("--table1", nargs="?", const="", default=None, metavar="CSV", help="score the device summary table")
    p.add_argument("--filter-provider", dest="filter_provider")
    p.add_argument("--out", help="also write the rendered output to a file")

    p = action(resources, "analyze", cmd_analyze, "correlations, PCA and ridge regression")
    p.add_argument("--source", choices=("table1", "dataset"), default="table1")
    p.add_argument("--series", default="v0.4")
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--out-dir", default="analysis")
    p.add_argument("--svg", action="store_true", help="also write a correlation heatmap")

    ds = resources.add_parser("dataset", help="record dataset").add_subparsers(dest="action", metavar="ACTION")
    ds.required = True
    p = action(ds, "scan", cmd_dataset_scan, "list stored records")
    p.add_argument("--benchmark")
    p.add_argument("--version", dest="version")
    p.add_argument("--filter-provider", dest="filter_provider")
    p.add_argument("--filter-device", dest="filter_device")
    action(ds, "export", cmd_dataset_export, "write benchmarks.json and platforms.json").add_argument("out_dir")

    dev = resources.add_parser("devices", help="device registry").add_subparsers(dest="action", metavar="ACTION")
    dev.required = True
    action(dev, "list", cmd_devices_list, "list registered devices")

    plot = resources.add_parser("plot", help="static SVG charts").add_subparsers(dest="action", metavar="ACTION")
    plot.required = True
    p = action(plot, "job", cmd_plot_job, "decay curves (EPLG) or value vs width for a job")
    p.add_argument("job_id")
    p.add_argument("--out", required=True)
    p = action(plot, "widths", cmd_plot_widths, "value vs width across stored records")
    p.add_argument("benchmark")
    p.add_argument("--out", required=True)
    return top


def run_command(argv: list[str] | None = None, stdout=None, stderr=None, env=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns, env)
        out = ns.func(ns, cfg)
        stdout.write(out.render(cfg.format))
        return out.code
    except CliError as exc:
        stderr.write(f"error: {exc}\n")
        return exc.code
    except ValidationError as exc:
        stderr.write("error: invalid parameters\n" + "".join(f"  {e}\n" for e in exc.errors))
        return EXIT_USAGE
    except (UnknownJobError, UnknownDeviceError) as exc:
        stderr.write(f"error: {exc.args[0] if exc.args else exc}\n")
        return EXIT_NOT_FOUND
    except (OSError, StoreError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except KeyboardInterrupt:
        stderr.write("interrupted\n")
        return EXIT_INTERRUPTED


def main(argv: list[str] | None = None) -> None:
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
