"""Asynchronous dispatch/poll job model over simulated devices.

Jobs move queued -> running -> done | failed. Every transition is appended
to a JSON-lines log, so a later process can replay the log and keep polling.
Each device is a single FIFO server. With ``background=True`` worker threads
drain the queues; otherwise queued work is executed lazily by ``poll`` (the
command-line mode, where no process outlives a command).
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..circuits.devices import DeviceModel, load_registry
from ..dataset.records import BenchmarkRecord, utc_now
from ..dataset.validate import ValidationError, validate_benchmark_params
from ..registry import canonical_name
from .runners import dispatch_data, run_benchmark

STATES = ("queued", "running", "done", "failed")
_NEXT = {"queued": ("running", "failed"), "running": ("done", "failed"), "done": (), "failed": ()}
LOG_NAME = "jobs.jsonl"


class JobError(RuntimeError):
    pass


class UnknownJobError(JobError, KeyError):
    pass


class UnknownDeviceError(JobError, KeyError):
    pass


def stream_seed(job_id: str) -> int:
    """RNG stream id for a job: 63 bits of SHA-256 of the job id."""
    return int.from_bytes(hashlib.sha256(job_id.encode()).digest()[:8], "big") >> 1


def derived_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(2, dtype=np.uint32).view(np.uint64)[0] >> 1)


def provenance(seed: int, device: DeviceModel) -> dict:
    return {"seed": int(seed), "engine": f"qbench {__version__}", "device_fingerprint": device.fingerprint()}


def execute(params: dict, provider: str, device: DeviceModel, seed: int) -> BenchmarkRecord:
    """Synchronous run producing the record a job would produce (aliases resolve to the device id)."""
    results = run_benchmark(params, device, seed)
    return BenchmarkRecord(
        benchmark_name=params["benchmark_name"],
        provider=provider,
        device=device.device_id,
        params=params,
        results=results,
        provenance=provenance(seed, device),
    )


@dataclass
class QueueModel:
    """Simulated queue latency: exponential with ``mean_latency_s``, times a multiplier."""

    mean_latency_s: float = 0.0
    service_multiplier: float = 1.0

    def latency(self, job_id: str, device: DeviceModel) -> float:
        base = self.mean_latency_s
        if device.timing is not None:
            base += device.timing.overhead_us * 1e-6
        if base <= 0:
            return 0.0
        rng = np.random.default_rng(stream_seed(job_id))
        return float(rng.exponential(base) * self.service_multiplier)


@dataclass
class Job:
    job_id: str
    benchmark_name: str
    params: dict
    provider: str
    device: str
    seed: int
    fingerprint: str
    sequence: int
    ready_at: float = 0.0
    suite_id: str | None = None
    state: str = "queued"
    dispatch_data: dict = field(default_factory=dict)
    result: dict | None = None
    error: str | None = None
    timestamps: dict = field(default_factory=dict)

    @property
    def record(self) -> BenchmarkRecord | None:
        return BenchmarkRecord.from_dict(self.result) if self.result else None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "benchmark_name": self.benchmark_name,
            "params": self.params,
            "provider": self.provider,
            "device": self.device,
            "seed": self.seed,
            "fingerprint": self.fingerprint,
            "sequence": self.sequence,
            "ready_at": self.ready_at,
            "suite_id": self.suite_id,
            "state": self.state,
            "dispatch_data": self.dispatch_data,
            "result": self.result,
            "error": self.error,
            "timestamps": self.timestamps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Job:
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    def copy(self) -> Job:
        return Job.from_dict(json.loads(json.dumps(self.to_dict())))


class JobLog:
    """Append-only JSON-lines event log; one line per dispatch or transition."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, event: dict) -> None:
        line = json.dumps(event, sort_keys=True, separators=(",", ":")) + "\n"
        with open(self.path, "a", encoding="utf-8") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def replay(self) -> tuple[dict[str, Job], dict[str, list[str]]]:
        jobs: dict[str, Job] = {}
        suites: dict[str, list[str]] = {}
        if not self.path.exists():
            return jobs, suites
        with open(self.path, encoding="utf-8") as fh:
            for raw in fh:
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    ev = json.loads(raw)
                except json.JSONDecodeError:
                    # a torn final line from an interrupted writer; ignore it
                    continue
                kind = ev.get("event")
                if kind == "dispatch":
                    job = Job.from_dict(ev["job"])
                    jobs[job.job_id] = job
                elif kind == "suite":
                    suites[ev["suite_id"]] = list(ev["job_ids"])
                elif kind == "state" and ev.get("job_id") in jobs:
                    job = jobs[ev["job_id"]]
                    job.state = ev["state"]
                    job.timestamps[ev["state"]] = ev["time"]
                    if "result" in ev:
                        job.result = ev["result"]
                    if "error" in ev:
                        job.error = ev["error"]
        return jobs, suites


@dataclass
class SuiteSpec:
    name: str
    entries: list[dict]

    @classmethod
    def from_dict(cls, data: dict) -> SuiteSpec:
        entries = data.get("benchmarks")
        if not isinstance(entries, list) or not entries:
            raise ValidationError(["suite: 'benchmarks' must be a non-empty list"])
        return cls(str(data.get("name", "suite")), entries)

    @classmethod
    def load(cls, path: str | Path) -> SuiteSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def validated(self) -> list[dict]:
        """All entries with defaults applied; any failure aborts with every violation listed."""
        out, errors = [], []
        for i, entry in enumerate(self.entries):
            try:
                out.append(validate_benchmark_params(entry))
            except ValidationError as exc:
                errors.extend(f"benchmarks[{i}] {e}" for e in exc.errors)
        if errors:
            raise ValidationError(errors)
        return out


def bundled_suite(name: str = "uf_complete") -> SuiteSpec:
    from importlib import resources

    return SuiteSpec.from_dict(json.loads(resources.files("qbench.data").joinpath(f"{name}.json").read_text()))


class JobManager:
    def __init__(
        self,
        root: str | Path | None = None,
        registry: dict[str, DeviceModel] | None = None,
        workers: int = 2,
        queue: QueueModel | None = None,
        background: bool = True,
        clock=time.time,
    ):
        self.registry = registry if registry is not None else load_registry()
        self.queue = queue or QueueModel()
        self.background = background
        self.clock = clock
        self.log = JobLog(Path(root) / LOG_NAME) if root is not None else None
        self._lock = threading.RLock()
        self._jobs, self._suites = self.log.replay() if self.log else ({}, {})
        self._queues: dict[str, deque[str]] = {}
        self._threads: dict[str, threading.Thread] = {}
        self._wake = threading.Condition(self._lock)
        self._slots = threading.BoundedSemaphore(max(1, workers))
        self._stop = False
        for job in sorted(self._jobs.values(), key=lambda j: j.sequence):
            if job.state == "queued":
                self._queues.setdefault(job.device, deque()).append(job.job_id)

    # -- bookkeeping -------------------------------------------------------

    def _device(self, provider: str, name: str) -> DeviceModel:
        dev = self.registry.get(name)
        if dev is None or dev.provider != provider:
            raise UnknownDeviceError(f"unknown device {name!r} for provider {provider!r}")
        return dev

    def _transition(self, job: Job, state: str, **extra) -> None:
        if state not in _NEXT[job.state]:
            raise JobError(f"illegal transition {job.state} -> {state} for {job.job_id}")
        now = utc_now()
        job.state = state
        job.timestamps[state] = now
        for k, v in extra.items():
            setattr(job, k, v)
        if self.log:
            self.log.append({"event": "state", "job_id": job.job_id, "state": state, "time": now, **extra})

    def _new_job(self, params: dict, provider: str, device_name: str, dev: DeviceModel, seed, suite_id, fingerprint) -> Job:
        job_id = uuid.uuid4().hex[:16]
        seq = len(self._jobs)
        job = Job(
            job_id=job_id,
            benchmark_name=canonical_name(params["benchmark_name"]),
            params=params,
            provider=provider,
            device=device_name,
            seed=int(seed) if seed is not None else stream_seed(job_id),
            fingerprint=fingerprint,
            sequence=seq,
            ready_at=self.clock() + self.queue.latency(job_id, dev),
            suite_id=suite_id,
            dispatch_data=dispatch_data(params, dev),
        )
        job.timestamps["queued"] = utc_now()
        return job

    def _enqueue(self, jobs: list[Job]) -> None:
        for job in jobs:
            self._jobs[job.job_id] = job
            if self.log:
                self.log.append({"event": "dispatch", "job": job.to_dict()})
            self._queues.setdefault(job.device, deque()).append(job.job_id)
        if self.background:
            for dev in {j.device for j in jobs}:
                self._ensure_worker(dev)
            self._wake.notify_all()

    # -- public API --------------------------------------------------------

    def dispatch(self, params: dict, provider: str, device: str, seed: int | None = None) -> str:
        """Validate and queue one benchmark; returns immediately with the job id."""
        validated = validate_benchmark_params(params)
        with self._lock:
            dev = self._device(provider, device)
            job = self._new_job(validated, provider, device, dev, seed, None, dev.fingerprint())
            self._enqueue([job])
            return job.job_id

    def dispatch_suite(self, suite: SuiteSpec, provider: str, device: str, seed: int | None = None) -> tuple[str, list[str]]:
        """Validate every entry first, then queue them all with one device fingerprint."""
        entries = suite.validated()
        with self._lock:
            dev = self._device(provider, device)
            fingerprint = dev.fingerprint()
            suite_id = uuid.uuid4().hex[:12]
            jobs = [
                self._new_job(p, provider, device, dev, None if seed is None else derived_seed(seed, i), suite_id, fingerprint)
                for i, p in enumerate(entries)
            ]
            self._suites[suite_id] = [j.job_id for j in jobs]
            if self.log:
                self.log.append({"event": "suite", "suite_id": suite_id, "name": suite.name, "job_ids": self._suites[suite_id]})
            self._enqueue(jobs)
            return suite_id, [j.job_id for j in jobs]

    def poll(self, job_id: str) -> Job:
        """Snapshot of a job. Without background workers, due work up to this job runs first."""
        with self._lock:
            if job_id not in self._jobs:
                raise UnknownJobError(f"unknown job {job_id!r}")
            device = self._jobs[job_id].device
        if not self.background:
            self._drain(device, until=job_id)
        with self._lock:
            return self._jobs[job_id].copy()

    def view(self, job_id: str) -> Job:
        """Snapshot without executing anything."""
        with self._lock:
            if job_id not in self._jobs:
                raise UnknownJobError(f"unknown job {job_id!r}")
            return self._jobs[job_id].copy()

    def poll_suite(self, suite_id: str) -> list[Job]:
        with self._lock:
            if suite_id not in self._suites:
                raise UnknownJobError(f"unknown suite {suite_id!r}")
            ids = list(self._suites[suite_id])
        return [self.poll(j) for j in ids]

    def jobs(self) -> list[Job]:
        with self._lock:
            return [j.copy() for j in sorted(self._jobs.values(), key=lambda j: j.sequence)]

    def suites(self) -> dict[str, list[str]]:
        with self._lock:
            return {k: list(v) for k, v in self._suites.items()}

    def wait(self, job_id: str, timeout: float | None = None, interval: float = 0.01) -> Job:
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            job = self.poll(job_id)
            if job.state in ("done", "failed"):
                return job
            if deadline is not None and time.monotonic() > deadline:
                return job
            time.sleep(interval)

    def run_pending(self) -> None:
        """Execute every queued job now, ignoring simulated latency."""
        with self._lock:
            devices = list(self._queues)
        for dev in devices:
            self._drain(dev, until=None, ignore_latency=True)

    def close(self) -> None:
        with self._lock:
            self._stop = True
            self._wake.notify_all()
        for t in list(self._threads.values()):
            t.join(timeout=5)

    # -- execution ---------------------------------------------------------

    def _run(self, job_id: str) -> None:
        with self._lock:
            job = self._jobs[job_id]
            if job.state != "queued":
                return
            self._transition(job, "running")
            params, provider, device_name, seed = job.params, job.provider, job.device, job.seed
        try:
            dev = self._device(provider, device_name)
            if dev.fingerprint() != job.fingerprint:
                raise JobError("device model changed since dispatch")
            with self._slots:
                rec = execute(params, provider, dev, seed)
            outcome = ("done", {"result": rec.to_dict()})
        except Exception as exc:  # any benchmark failure is recorded, not raised
            outcome = ("failed", {"error": f"{type(exc).__name__}: {exc}"})
        with self._lock:
            self._transition(job, outcome[0], **outcome[1])

    def _drain(self, device: str, until: str | None, ignore_latency: bool = False) -> None:
        while True:
            with self._lock:
                q = self._queues.get(device)
                if not q:
                    return
                head = self._jobs[q[0]]
                if head.state != "queued":
                    q.popleft()
                    continue
                if not ignore_latency and head.ready_at > self.clock():
                    return
                if until is not None and self._jobs[until].state in ("done", "failed"):
                    return
                q.popleft()
            self._run(head.job_id)
            if until is not None and head.job_id == until:
                return

    def _ensure_worker(self, device: str) -> None:
        t = self._threads.get(device)
        if t is not None and t.is_alive():
            return
        t = threading.Thread(target=self._worker, args=(device,), daemon=True, name=f"qbench-{device}")
        self._threads[device] = t
        t.start()

    def _worker(self, device: str) -> None:
        while True:
            with self._lock:
                while not self._stop and not self._queues.get(device):
                    self._wake.wait(timeout=0.5)
                if self._stop:
                    return
                head = self._jobs[self._queues[device][0]]
                delay = head.ready_at - self.clock()
            if delay > 0:
                time.sleep(min(delay, 0.5))
                continue
            with self._lock:
                job_id = self._queues[device].popleft()
            self._run(job_id)
