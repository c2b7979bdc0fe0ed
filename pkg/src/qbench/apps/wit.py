"""Wormhole-inspired teleportation: a fixed 6 or 7 qubit echo circuit.

Bell pairs are prepared, scrambled by three layers of Rx/Rz/Rzz evolution,
hit by the insertion step (reset or SWAP), unscrambled by the time-reversed
layers, coupled by two Rzz(pi/2) traversal gates and read out on one qubit
whose ideal Z expectation is +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..circuits.circuit import Circuit
from ..circuits.devices import DeviceModel
from ..sim.execute import run_counts
from ..sim.sampler import as_rng
from .layout import line_layout

COUPLING = math.pi / 2
WIDTHS = (6, 7)

# evolution angle table, one row per forward layer
_RX = (
    (0.31, 1.12, 0.77, 0.54, 1.36),
    (0.92, 0.43, 1.21, 0.68, 0.25),
    (0.58, 1.03, 0.36, 1.27, 0.81),
)
_RZ = (
    (0.47, 0.88, 1.19, 0.29),
    (1.05, 0.62, 0.33, 0.94),
    (0.71, 0.26, 0.99, 1.14),
)
_RZZ = (
    (0.40, 0.85, 0.60),
    (0.75, 0.35, 0.95),
    (0.55, 0.90, 0.45),
)

_LAYOUT = {
    # bell pairs, evolution support, rzz bonds, rz targets, traversal pairs, readout
    7: ((0, 1), (2, 3), (5, 6)),
    6: ((0, 1), (2, 3), (4, 5)),
}
_SUPPORT = {7: (1, 2, 3, 4, 5), 6: (1, 2, 3, 4)}
_BONDS = {7: ((1, 2), (3, 4), (4, 5)), 6: ((1, 2), (2, 3), (3, 4))}
_RZ_TARGETS = {7: (1, 2, 4, 5), 6: (1, 2, 3, 4)}
_TRAVERSAL = {7: ((1, 6), (0, 5)), 6: ((0, 5), (1, 4))}
READOUT = {7: 4, 6: 2}


@dataclass
class WitResult:
    num_qubits: int
    expectation: float
    f2q_proxy: float | None
    shots: int
    stderr: float

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "expectation": self.expectation,
            "f2q_proxy": self.f2q_proxy,
            "shots": self.shots,
            "stderr": self.stderr,
        }


def f2q_proxy(expectation: float, two_qubit_gates: int = 24) -> float | None:
    """Effective two-qubit fidelity E**(1/n2q); undefined for E <= 0."""
    if expectation <= 0:
        return None
    return expectation ** (1.0 / two_qubit_gates)


def _layer(circ: Circuit, n: int, row: int, sign: float, q) -> None:
    for t, a in zip(_SUPPORT[n], _RX[row]):
        circ.rx(sign * a, q[t])
    for (a, b), g in zip(_BONDS[n], _RZZ[row]):
        circ.rzz(sign * g, q[a], q[b])
    for t, a in zip(_RZ_TARGETS[n], _RZ[row]):
        circ.rz(sign * a, q[t])


def _reverse_layer(circ: Circuit, n: int, row: int, q) -> None:
    # exact inverse of _layer: same gates, reversed order, negated angles
    for t, a in reversed(list(zip(_RZ_TARGETS[n], _RZ[row]))):
        circ.rz(-a, q[t])
    for (a, b), g in reversed(list(zip(_BONDS[n], _RZZ[row]))):
        circ.rzz(-g, q[a], q[b])
    for t, a in reversed(list(zip(_SUPPORT[n], _RX[row]))):
        circ.rx(-a, q[t])


def build_wit_circuit(num_qubits: int = 7, qubits=None, width: int | None = None) -> Circuit:
    if num_qubits not in WIDTHS:
        raise ValueError("WIT is defined for 6 or 7 qubits")
    n = num_qubits
    q = list(range(n)) if qubits is None else list(qubits)
    circ = Circuit(width if width is not None else max(q) + 1, metadata={"readout": q[READOUT[n]]})
    for a, b in _LAYOUT[n]:
        circ.h(q[a])
        circ.cx(q[a], q[b])
    for row in range(3):
        _layer(circ, n, row, 1.0, q)
    circ.barrier(q)
    if n == 7:
        circ.append("swap", (q[0], q[6]))
    else:
        circ.append("reset", (q[0],))
    circ.barrier(q)
    for row in reversed(range(3)):
        _reverse_layer(circ, n, row, q)
    for a, b in _TRAVERSAL[n]:
        circ.rzz(COUPLING, q[a], q[b])
    if n == 6:
        # return the untouched pair to |00> so the readout is deterministic
        circ.cx(q[2], q[3])
        circ.h(q[2])
    circ.append("measure", (q[READOUT[n]],))
    return circ


def expectation_from_counts(counts: dict[str, int]) -> tuple[float, int]:
    shots = sum(counts.values())
    n0 = sum(c for k, c in counts.items() if k[-1] == "0")
    return (2 * n0 - shots) / shots, shots


def wit_run(device: DeviceModel, num_qubits: int = 7, shots: int = 8192, seed=None) -> WitResult:
    rng = as_rng(seed)
    qubits = line_layout(device, num_qubits, rng)
    circ = build_wit_circuit(num_qubits, qubits, device.num_qubits)
    (counts,) = run_counts([circ], device, shots, rng)
    e, total = expectation_from_counts(counts)
    stderr = math.sqrt(max(0.0, 1.0 - e * e) / total)
    return WitResult(num_qubits, e, f2q_proxy(e), total, stderr)
