"""CLOPS: layered-circuit throughput from a device timing model.

No circuit is simulated here. The layered template is lowered once to the
device basis, its critical path is timed with the gate durations of the
device, and the workload time follows from per-shot, per-circuit and
compile costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..circuits.circuit import Circuit, GateOp
from ..circuits.devices import DeviceModel, TimingModel
from ..circuits.graphs import random_chain
from ..sim.execute import native
from ..sim.sampler import as_rng
from ..system.eplg import sublayers

MODES = ("instantiated", "parameterized", "twirled")


@dataclass
class ClopsResult:
    num_qubits: int
    num_layers: int
    num_circuits: int
    shots: int
    mode: str
    t_total: float | None
    clops: float | None
    steady_state_clops: float | None = None
    circuit_time: float | None = None

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "num_layers": self.num_layers,
            "num_circuits": self.num_circuits,
            "shots": self.shots,
            "mode": self.mode,
            "t_total": self.t_total,
            "clops": self.clops,
            "steady_state_clops": self.steady_state_clops,
        }


def clops_value(num_layers: int, num_circuits: int, shots: int, t_total: float) -> float:
    if t_total <= 0:
        raise ValueError("total time must be positive")
    return num_layers * num_circuits * shots / t_total


def clops_template(
    num_qubits: int,
    qubits: list[int],
    num_layers: int,
    two_qubit_gate: str = "cz",
    angles: np.ndarray | None = None,
) -> Circuit:
    """Layered circuit: entanglers on alternating chain sublayers, then rotations.

    ``angles`` has shape (num_layers, len(qubits), 3) and fills an
    rz-ry-rz rotation per qubit per layer; zeros if omitted.
    """
    if angles is None:
        angles = np.zeros((num_layers, len(qubits), 3))
    layers = sublayers(qubits)
    circ = Circuit(num_qubits)
    for ell in range(num_layers):
        pairs, _ = layers[ell % 2]
        circ.extend(GateOp(two_qubit_gate, p) for p in pairs)
        for i, q in enumerate(qubits):
            a, b, c = angles[ell, i]
            circ.rz(float(a), q)
            circ.ry(float(b), q)
            circ.rz(float(c), q)
        circ.barrier(qubits)
    for q in qubits:
        circ.append("measure", (q,))
    return circ


def random_angles(num_layers: int, width: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * math.pi, size=(num_layers, width, 3))


def critical_path_ns(circuit: Circuit, timing: TimingModel) -> float:
    """Longest per-qubit schedule, with barriers synchronizing their qubits."""
    clock = [0.0] * circuit.num_qubits
    for op in circuit.ops:
        if op.name == "barrier":
            top = max(clock[q] for q in op.qubits)
            for q in op.qubits:
                clock[q] = top
            continue
        end = max(clock[q] for q in op.qubits) + timing.duration_ns(op.name)
        for q in op.qubits:
            clock[q] = end
    return max(clock) if clock else 0.0


def workload_times(
    duration_ns: float,
    timing: TimingModel,
    num_circuits: int,
    shots: int,
    mode: str,
) -> np.ndarray:
    """Wall time in seconds charged to each circuit of the workload."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    per_shot = duration_ns * 1e-9 + timing.rep_delay_us * 1e-6
    base = per_shot * shots + timing.overhead_us * 1e-6
    times = np.full(num_circuits, base)
    compile_s = timing.compile_us * 1e-6
    if mode == "instantiated":
        times += compile_s
    elif num_circuits:
        times[0] += compile_s
    return times


def clops_run(
    device: DeviceModel,
    num_qubits: int = 100,
    num_layers: int = 100,
    num_circuits: int = 1000,
    shots: int = 100,
    mode: str = "twirled",
    seed=None,
    two_qubit_gate: str = "cz",
) -> ClopsResult:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if device.timing is None:
        return ClopsResult(num_qubits, num_layers, num_circuits, shots, mode, None, None)
    rng = as_rng(seed)
    if device.all_to_all or not device.edges:
        qubits = list(range(min(num_qubits, device.num_qubits)))
    else:
        qubits = random_chain(device.edges, num_qubits, rng)
    template = clops_template(device.num_qubits, qubits, num_layers, two_qubit_gate, random_angles(num_layers, len(qubits), rng))
    duration = critical_path_ns(native(template, device), device.timing)
    times = workload_times(duration, device.timing, num_circuits, shots, mode)
    t_total = float(times.sum())
    steady = None
    if num_circuits > 1:
        steady = clops_value(num_layers, num_circuits - 1, shots, float(times[1:].sum()))
    return ClopsResult(
        num_qubits=len(qubits),
        num_layers=num_layers,
        num_circuits=num_circuits,
        shots=shots,
        mode=mode,
        t_total=t_total,
        clops=clops_value(num_layers, num_circuits, shots, t_total),
        steady_state_clops=steady,
        circuit_time=duration * 1e-9,
    )
