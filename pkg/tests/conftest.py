import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qbench.circuits.devices import DeviceModel, NoiseProfile, TimingModel, load_registry
from qbench.circuits.graphs import line_edges

settings.register_profile("qbench", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qbench")


def line_device(n, noise=None, device_id=None, **kw):
    return DeviceModel(device_id or f"line-{n}", n, tuple(line_edges(n)), noise=noise or NoiseProfile(), **kw)


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def timing():
    return TimingModel(gate_ns={"rz": 0.0, "rx": 32.0, "cz": 68.0, "measure": 1000.0}, overhead_us=100.0, rep_delay_us=250.0, compile_us=50.0)


# one small, fast parameter set per benchmark (fits a 12-qubit line)
SMALL_PARAMS = {
    "BSEQ": {"benchmark_name": "BSEQ", "shots": 200},
    "EPLG": {"benchmark_name": "EPLG", "num_samples": 2, "shots": 100, "lengths": [2, 4, 8], "num_qubits_in_chain": 6},
    "Mirror Circuits": {"benchmark_name": "Mirror Circuits", "width": 4, "num_layers": 3, "num_circuits": 2, "shots": 100},
    "CLOPS": {"benchmark_name": "CLOPS", "num_qubits": 4, "num_layers": 4, "num_circuits": 5, "shots": 10},
    "QML Kernel": {"benchmark_name": "QML Kernel", "num_qubits": 4, "shots": 100},
    "WIT": {"benchmark_name": "WIT", "num_qubits": 7, "shots": 200},
    "Linear Ramp QAOA": {"benchmark_name": "Linear Ramp QAOA", "num_qubits": 6, "shots": 50, "trials": 2,
                         "num_random_trials": 3, "qaoa_layers": [3], "seed": 7},
    "Quantum Fourier Transform": {"benchmark_name": "Quantum Fourier Transform", "min_qubits": 2, "max_qubits": 4,
                                  "skip_qubits": 2, "max_circuits": 2, "shots": 100},
}


def small_registry(timing_model=None):
    """Noisy 12-qubit line (with an alias) plus a second device for fingerprint checks."""
    noise = NoiseProfile(p1=1e-3, p2=1e-2, readout_eps=1e-2)
    dev = line_device(12, noise, device_id="line-12", timing=timing_model)
    other = line_device(12, NoiseProfile(p2=2e-2), device_id="line-12b", timing=timing_model)
    return {"line-12": dev, "l12": dev, "line-12b": other}


@pytest.fixture
def small_reg(timing):
    return small_registry(timing)


# acceptance verdict lines, echoed again at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
