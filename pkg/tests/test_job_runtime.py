import json

import pytest

from qbench.dataset.validate import ValidationError
from qbench.runtime.cost import PricingError, PricingModel, estimate_cost, hqc_credits
from qbench.runtime.jobs import (
    LOG_NAME,
    JobError,
    JobLog,
    JobManager,
    QueueModel,
    SuiteSpec,
    UnknownDeviceError,
    UnknownJobError,
    bundled_suite,
    derived_seed,
    execute,
    stream_seed,
)

from conftest import SMALL_PARAMS, small_registry  # noqa: E402


class FakeClock:
    def __init__(self):
        self.t = 1000.0

    def __call__(self):
        return self.t


class TickingClock(FakeClock):
    """Advances one second per reading, so sub-second simulated latency has always elapsed by the next poll."""

    def __call__(self):
        self.t += 1.0
        return self.t


def lazy_manager(reg, root=None, **kw):
    kw.setdefault("clock", TickingClock())
    return JobManager(root=root, registry=reg, background=False, **kw)


class TestDispatch:
    def test_dispatch_returns_queued_immediately(self, small_reg, tmp_path):
        clock = FakeClock()
        mgr = lazy_manager(small_reg, tmp_path, queue=QueueModel(mean_latency_s=5.0), clock=clock)
        job_id = mgr.dispatch(SMALL_PARAMS["QML Kernel"], "local", "line-12", seed=3)
        job = mgr.view(job_id)
        assert job.state == "queued" and job.result is None
        assert job.dispatch_data["num_qubits"] == 4
        assert job.params["shots"] == 100
        # not due yet: poll leaves it queued
        assert mgr.poll(job_id).state == "queued"
        clock.t += 1e6
        done = mgr.poll(job_id)
        assert done.state == "done" and done.record.results["accuracy"] <= 1.0
        assert set(done.timestamps) == {"queued", "running", "done"}

    def test_unknown_device_and_provider(self, small_reg):
        mgr = lazy_manager(small_reg)
        with pytest.raises(UnknownDeviceError):
            mgr.dispatch(SMALL_PARAMS["WIT"], "local", "nope")
        with pytest.raises(UnknownDeviceError):
            mgr.dispatch(SMALL_PARAMS["WIT"], "elsewhere", "line-12")
        assert mgr.jobs() == []

    def test_invalid_params_queue_nothing(self, small_reg):
        mgr = lazy_manager(small_reg)
        with pytest.raises(ValidationError):
            mgr.dispatch({"benchmark_name": "QML Kernel", "num_qubits": 1}, "local", "line-12")
        assert mgr.jobs() == []

    def test_unknown_job(self, small_reg):
        mgr = lazy_manager(small_reg)
        with pytest.raises(UnknownJobError):
            mgr.poll("missing")
        with pytest.raises(KeyError):
            mgr.view("missing")

    def test_fifo_per_device(self, small_reg, tmp_path):
        mgr = lazy_manager(small_reg, tmp_path)
        ids = [mgr.dispatch(SMALL_PARAMS["QML Kernel"], "local", "line-12", seed=i) for i in range(3)]
        other = mgr.dispatch(SMALL_PARAMS["QML Kernel"], "local", "line-12b", seed=9)
        assert mgr.poll(ids[2]).state == "done"
        assert all(mgr.view(j).state == "done" for j in ids)
        assert mgr.view(other).state == "queued"
        events = [json.loads(line) for line in (tmp_path / LOG_NAME).read_text().splitlines()]
        running = [e["job_id"] for e in events if e["event"] == "state" and e["state"] == "running"]
        assert running == ids

    def test_seed_derivation(self):
        assert stream_seed("abc") == stream_seed("abc") != stream_seed("abd")
        assert 0 <= stream_seed("abc") < 2**63
        assert derived_seed(5, 0) != derived_seed(5, 1)


class TestPollMatchesSync:
    @pytest.mark.parametrize("name", sorted(SMALL_PARAMS))
    def test_bit_identical(self, small_reg, name):
        mgr = lazy_manager(small_reg)
        job_id = mgr.dispatch(SMALL_PARAMS[name], "local", "l12", seed=42)
        job = mgr.poll(job_id)
        assert job.state == "done", job.error
        sync = execute(job.params, "local", small_reg["l12"], 42)
        assert job.record.results == sync.results
        assert job.record.id == sync.id
        assert job.record.device == "line-12"

    def test_background_workers(self, small_reg):
        mgr = JobManager(registry=small_reg, background=True)
        try:
            job_id = mgr.dispatch(SMALL_PARAMS["WIT"], "local", "line-12", seed=1)
            job = mgr.wait(job_id, timeout=60)
            assert job.state == "done"
            assert job.record.results == execute(job.params, "local", small_reg["line-12"], 1).results
        finally:
            mgr.close()

    def test_failure_is_recorded(self, small_reg):
        mgr = lazy_manager(small_reg)
        params = dict(SMALL_PARAMS["EPLG"], num_qubits_in_chain=40)
        job = mgr.poll(mgr.dispatch(params, "local", "line-12", seed=0))
        assert job.state == "failed" and job.error.startswith("ChainSamplingError")
        assert job.record is None

    def test_device_change_fails_job(self, small_reg):
        mgr = lazy_manager(small_reg)
        job_id = mgr.dispatch(SMALL_PARAMS["WIT"], "local", "line-12", seed=0)
        mgr.registry = small_registry()
        job = mgr.poll(job_id)
        assert job.state == "failed" and "changed" in job.error

    def test_illegal_transition(self, small_reg):
        mgr = lazy_manager(small_reg)
        job_id = mgr.dispatch(SMALL_PARAMS["WIT"], "local", "line-12", seed=0)
        mgr.poll(job_id)
        with pytest.raises(JobError):
            mgr._transition(mgr._jobs[job_id], "running")


class TestSuites:
    def test_bundled_suite_validates(self):
        suite = bundled_suite()
        entries = suite.validated()
        assert len(entries) == 8
        assert len({e["benchmark_name"] for e in entries}) == 8

    def test_suite_shares_fingerprint(self, small_reg):
        mgr = lazy_manager(small_reg)
        suite = SuiteSpec("s", [SMALL_PARAMS["WIT"], SMALL_PARAMS["QML Kernel"]])
        sid, ids = mgr.dispatch_suite(suite, "local", "line-12", seed=1)
        sid2, ids2 = mgr.dispatch_suite(suite, "local", "line-12b", seed=1)
        fp = {mgr.view(j).fingerprint for j in ids}
        fp2 = {mgr.view(j).fingerprint for j in ids2}
        assert len(fp) == 1 and len(fp2) == 1 and fp != fp2
        assert {j.state for j in mgr.poll_suite(sid)} == {"done"}
        assert mgr.suites()[sid] == ids

    def test_bad_entry_queues_nothing(self, small_reg):
        mgr = lazy_manager(small_reg)
        suite = SuiteSpec("s", [SMALL_PARAMS["WIT"], {"benchmark_name": "QML Kernel", "num_qubits": 0}, {"benchmark_name": "X"}])
        with pytest.raises(ValidationError) as exc:
            mgr.dispatch_suite(suite, "local", "line-12")
        assert [e.split(" ")[0] for e in exc.value.errors] == ["benchmarks[1]", "benchmarks[2]"]
        assert mgr.jobs() == [] and mgr.suites() == {}

    def test_empty_suite(self):
        with pytest.raises(ValidationError):
            SuiteSpec.from_dict({"benchmarks": []})

    def test_unknown_suite(self, small_reg):
        with pytest.raises(UnknownJobError):
            lazy_manager(small_reg).poll_suite("nope")


class TestJobLog:
    def test_replay_restores_state(self, small_reg, tmp_path):
        clock = TickingClock()
        mgr = lazy_manager(small_reg, tmp_path, clock=clock)
        done = mgr.dispatch(SMALL_PARAMS["WIT"], "local", "line-12", seed=2)
        pending = mgr.dispatch(SMALL_PARAMS["QML Kernel"], "local", "line-12b", seed=2)
        sid, _ = mgr.dispatch_suite(SuiteSpec("s", [SMALL_PARAMS["WIT"]]), "local", "line-12")
        first = mgr.poll(done)
        again = lazy_manager(small_reg, tmp_path, clock=clock)
        assert again.view(done).to_dict() == first.to_dict()
        assert again.view(pending).state == "queued"
        assert sid in again.suites()
        # the restored queue is still runnable
        assert again.poll(pending).state == "done"

    def test_torn_line_ignored(self, small_reg, tmp_path):
        mgr = lazy_manager(small_reg, tmp_path)
        job_id = mgr.dispatch(SMALL_PARAMS["WIT"], "local", "line-12", seed=2)
        with open(tmp_path / LOG_NAME, "a") as fh:
            fh.write('{"event": "state", "job_id": "')
        jobs, _ = JobLog(tmp_path / LOG_NAME).replay()
        assert list(jobs) == [job_id]

    def test_run_pending_ignores_latency(self, small_reg):
        clock = FakeClock()
        mgr = lazy_manager(small_reg, queue=QueueModel(mean_latency_s=100.0), clock=clock)
        ids = [mgr.dispatch(SMALL_PARAMS["WIT"], "local", d, seed=0) for d in ("line-12", "line-12b")]
        mgr.run_pending()
        assert [mgr.view(j).state for j in ids] == ["done", "done"]


class TestQueueModel:
    def test_latency(self, small_reg):
        dev = small_reg["line-12"]
        assert QueueModel().latency("a", small_registry()["line-12"]) == 0.0
        q = QueueModel(mean_latency_s=2.0, service_multiplier=3.0)
        base = QueueModel(mean_latency_s=2.0).latency("job", dev)
        assert q.latency("job", dev) == pytest.approx(3 * base)
        assert q.latency("job", dev) == q.latency("job", dev)


class TestCost:
    def test_hqc_formula(self):
        assert hqc_credits(10, 5, 2, 100) == pytest.approx(5 + (10 + 50 + 10) * 100 / 5000)

    def test_per_task_shot(self, small_reg):
        pricing = PricingModel.from_dict({"model": "per_task_shot", "per_task": 0.3, "per_shot": 0.001})
        est = estimate_cost(SMALL_PARAMS["Mirror Circuits"], small_reg["line-12"], pricing)
        assert est.tasks == 2 and est.total_shots == 200
        assert est.cost == pytest.approx(0.6 + 0.2)

    def test_hqc_and_runtime(self, small_reg):
        dev = small_reg["line-12"]
        hqc = estimate_cost(SMALL_PARAMS["QML Kernel"], dev, PricingModel.from_dict({"model": "hqc"}))
        assert hqc.hqc == pytest.approx(hqc_credits(hqc.one_qubit_gates, hqc.two_qubit_gates, hqc.measurements, 100))
        rt = estimate_cost(SMALL_PARAMS["QML Kernel"], dev, PricingModel.from_dict({"model": "runtime", "per_second": 2.0}))
        assert rt.runtime_estimate > 100 * 250e-6
        assert rt.cost == pytest.approx(2 * rt.runtime_estimate)

    def test_no_timing(self):
        est = estimate_cost(SMALL_PARAMS["WIT"], small_registry()["line-12"])
        assert est.runtime_estimate is None and est.cost is None and est.two_qubit_gates > 0

    def test_every_benchmark(self, small_reg):
        for name, params in SMALL_PARAMS.items():
            est = estimate_cost(params, small_reg["line-12"])
            assert est.tasks > 0 and est.total_shots > 0, name

    @pytest.mark.parametrize("data", [{}, {"model": "flat"}, {"model": "per_task_shot", "per_task": 1}])
    def test_bad_pricing(self, data):
        with pytest.raises(PricingError):
            PricingModel.from_dict(data)
