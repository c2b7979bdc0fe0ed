"""Quantum Fourier transform benchmark, two variants.

Method 1 loads |x>, applies the QFT, adds one in the Fourier basis with
single-qubit phases and transforms back, so the ideal outcome is x+1 mod 2^n.
Method 2 writes x directly into the Fourier basis with H and Rz and applies
the inverse QFT, so the ideal outcome is x.

Registers are big-endian: qubit 0 carries the most significant bit, matching
the bitstring order of the sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..circuits.circuit import Circuit, GateOp
from ..circuits.devices import DeviceModel
from ..sim.execute import run_bits
from ..sim.sampler import MAX_STATEVECTOR_QUBITS, as_rng
from .layout import line_layout

SCORE_WIDTHS = (4, 8, 12, 20)
METHODS = (1, 2)


@dataclass
class QftResult:
    method: int
    shots: int
    max_circuits: int
    fidelities: dict[int, float] = field(default_factory=dict)
    circuit_fidelities: dict[int, list[float]] = field(default_factory=dict)
    unsupported: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "shots": self.shots,
            "max_circuits": self.max_circuits,
            "fidelities": {str(n): f for n, f in sorted(self.fidelities.items())},
            "circuit_fidelities": {str(n): f for n, f in sorted(self.circuit_fidelities.items())},
            "unsupported": list(self.unsupported),
        }


def cphase(circ: Circuit, theta: float, c: int, t: int) -> None:
    """Controlled phase diag(1,1,1,e^{i theta}) up to a global phase."""
    circ.rz(theta / 2, c)
    circ.rz(theta / 2, t)
    circ.rzz(-theta / 2, c, t)


def qft_ops(qubits: Sequence[int], num_qubits: int) -> list[GateOp]:
    """Exact DFT |x> -> sum_k e^{2 pi i x k / N} |k> / sqrt(N), including the final swaps."""
    n = len(qubits)
    circ = Circuit(num_qubits)
    for j in range(n):
        circ.h(qubits[j])
        for m in range(j + 1, n):
            cphase(circ, 2 * math.pi / 2 ** (m - j + 1), qubits[m], qubits[j])
    for j in range(n // 2):
        circ.append("swap", (qubits[j], qubits[n - 1 - j]))
    return circ.ops


def inverse_ops(ops: Sequence[GateOp]) -> list[GateOp]:
    return [op.inverse() for op in reversed(ops)]


def _load(circ: Circuit, x: int, qubits: Sequence[int]) -> None:
    n = len(qubits)
    for j, q in enumerate(qubits):
        if (x >> (n - 1 - j)) & 1:
            circ.x(q)


def build_qft_circuit(
    n: int,
    x: int,
    method: int = 1,
    qubits: Sequence[int] | None = None,
    num_qubits: int | None = None,
) -> Circuit:
    if method not in METHODS:
        raise ValueError("method must be 1 or 2")
    if not 0 <= x < 2**n:
        raise ValueError("x out of range")
    qubits = list(range(n)) if qubits is None else list(qubits)
    width = num_qubits if num_qubits is not None else max(qubits) + 1
    circ = Circuit(width, metadata={"x": int(x), "method": method, "expected": expected_output(n, x, method)})
    fwd = qft_ops(qubits, width)
    if method == 1:
        _load(circ, x, qubits)
        circ.extend(fwd)
        circ.barrier(qubits)
        for j, q in enumerate(qubits):
            circ.rz(2 * math.pi / 2 ** (j + 1), q)
        circ.barrier(qubits)
    else:
        for q in qubits:
            circ.h(q)
        for j, q in enumerate(qubits):
            circ.rz(2 * math.pi * x * 2 ** (n - 1 - j) / 2**n, q)
        circ.barrier(qubits)
    circ.extend(inverse_ops(fwd))
    for q in qubits:
        circ.append("measure", (q,))
    return circ


def expected_output(n: int, x: int, method: int) -> int:
    return (x + 1) % 2**n if method == 1 else x


def hellinger_fidelity(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return float(sum(math.sqrt(p.get(k, 0.0) * q.get(k, 0.0)) for k in keys) ** 2)


def normalized_fidelity(ideal: dict, measured: dict, num_outcomes: int) -> float:
    """Hellinger fidelity rescaled so a uniformly random device scores 0."""
    f_raw = hellinger_fidelity(ideal, measured)
    f_unif = sum(math.sqrt(v / num_outcomes) for v in ideal.values()) ** 2
    if f_unif >= 1.0:
        return 1.0 if f_raw >= 1.0 else 0.0
    return max(0.0, (f_raw - f_unif) / (1.0 - f_unif))


def delta_fidelity(hit_fraction: float, n: int) -> float:
    """normalized_fidelity for a single-outcome ideal, p_meas(target) given."""
    unif = 2.0**-n
    return max(0.0, (hit_fraction - unif) / (1.0 - unif))


def qft_widths(min_qubits: int, max_qubits: int, skip_qubits: int = 1) -> list[int]:
    if min_qubits < 1 or max_qubits < min_qubits or skip_qubits < 1:
        raise ValueError("invalid width range")
    return list(range(min_qubits, max_qubits + 1, skip_qubits))


def qft_run(
    device: DeviceModel,
    min_qubits: int = 2,
    max_qubits: int = 8,
    skip_qubits: int = 1,
    max_circuits: int = 3,
    shots: int = 1000,
    method: int = 1,
    seed=None,
    use_midcircuit_measurement: bool = False,
) -> QftResult:
    if use_midcircuit_measurement:
        raise ValueError("mid-circuit measurement variant is not supported")
    if method not in METHODS:
        raise ValueError("method must be 1 or 2")
    rng = as_rng(seed)
    result = QftResult(method, shots, max_circuits)
    for n in qft_widths(min_qubits, max_qubits, skip_qubits):
        if n > MAX_STATEVECTOR_QUBITS or n > device.num_qubits:
            result.unsupported.append(n)
            result.fidelities[n] = 0.0
            continue
        qubits = line_layout(device, n, rng)
        count = min(max_circuits, 2**n)
        xs = rng.choice(2**n, size=count, replace=False) if 2**n <= 1 << 20 else rng.integers(0, 2**n, size=count)
        circuits = [build_qft_circuit(n, int(x), method, qubits, device.num_qubits) for x in xs]
        fids = []
        for circ, bits in zip(circuits, run_bits(circuits, device, shots, rng)):
            order = circ.measured_qubits()
            col = [order.index(q) for q in qubits]
            weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
            values = bits[:, col].astype(np.int64) @ weights
            fids.append(delta_fidelity(float(np.mean(values == circ.metadata["expected"])), n))
        result.circuit_fidelities[n] = fids
        result.fidelities[n] = float(np.mean(fids))
    return result


def qft_score(fidelity: dict[int, float | None], widths: Sequence[int] = SCORE_WIDTHS) -> float:
    total = float(sum(widths))
    return float(sum(n * (fidelity.get(n) or 0.0) for n in widths) / total)
