"""Randomized mirror circuits and the width-weighted MC score."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..circuits.circuit import Circuit, GateOp
from ..circuits.devices import DeviceModel
from ..circuits.graphs import Edge, connected_region, induced_edges
from ..sim.clifford import Pauli, clifford_conjugate_pauli, clifford_group
from ..sim.execute import run_bits
from ..sim.sampler import as_rng

PANEL: tuple[tuple[int, int], ...] = ((8, 64), (16, 32), (24, 16), (32, 8), (64, 4), (128, 2))
PANEL_WEIGHTS = tuple(w / 34.0 for w in (1, 2, 3, 4, 8, 16))
PASS_THRESHOLD = 1.0 / math.e


@dataclass
class MirrorCircuitSpec:
    width: int
    num_layers: int
    two_qubit_gate_prob: float
    qubits: list[int]
    prep: list[GateOp]
    layers: list[list[GateOp]]
    pauli: str  # central Pauli layer, one letter per entry of ``qubits``
    seed: int | None = None

    def forward_ops(self) -> list[GateOp]:
        ops = list(self.prep)
        for layer in self.layers:
            ops.extend(layer)
        return ops

    def mirror_ops(self) -> list[GateOp]:
        """Quasi-inverse half: the body layers undone in reverse, then the prep."""
        return [op.inverse() for op in reversed(self.forward_ops())]

    def pauli_ops(self) -> list[GateOp]:
        return [GateOp(p.lower(), (q,)) for q, p in zip(self.qubits, self.pauli) if p != "I"]

    def two_qubit_count(self) -> int:
        return sum(op.is_two_qubit for layer in self.layers for op in layer)


def _random_matching(edges: Sequence[Edge], rng: np.random.Generator) -> list[Edge]:
    order = rng.permutation(len(edges))
    used: set[int] = set()
    matching = []
    for i in order:
        a, b = edges[i]
        if a not in used and b not in used:
            used.update((a, b))
            matching.append((a, b))
    return matching


def sample_mirror_spec(
    device: DeviceModel,
    width: int,
    num_layers: int,
    two_qubit_gate_prob: float = 0.5,
    seed=None,
    two_qubit_gate: str = "cz",
) -> MirrorCircuitSpec:
    """Draw one random mirror circuit on a connected ``width``-qubit region.

    Each body layer applies a random single-qubit Clifford to every qubit.
    With probability ``two_qubit_gate_prob`` the layer also carries
    entanglers on a random subset of a random matching of the region's
    couplings (at least one gate).
    """
    if width > device.num_qubits:
        raise ValueError(f"width {width} exceeds {device.num_qubits} qubits")
    rng = as_rng(seed)
    qubits = connected_region(device.edges, width, rng=rng) if device.edges else list(range(width))
    if len(qubits) < width:
        raise ValueError(f"no connected region of {width} qubits")
    edges = induced_edges(device.edges, qubits)
    g1 = clifford_group(1)
    prep = [op for q in qubits for op in g1.sample(rng, (q,))]
    layers = []
    for _ in range(num_layers):
        layer = [op for q in qubits for op in g1.sample(rng, (q,))]
        if edges and rng.random() < two_qubit_gate_prob:
            matching = _random_matching(edges, rng)
            keep = [e for e in matching if rng.random() < 0.5] or [matching[int(rng.integers(len(matching)))]]
            layer += [GateOp(two_qubit_gate, e) for e in keep]
        layers.append(layer)
    pauli = "".join("IXYZ"[int(k)] for k in rng.integers(4, size=width))
    return MirrorCircuitSpec(width, num_layers, two_qubit_gate_prob, list(qubits), prep, layers, pauli,
                             seed if isinstance(seed, int) else None)


def build_mirror_circuit(spec: MirrorCircuitSpec, num_qubits: int) -> Circuit:
    circ = Circuit(num_qubits)
    barrier = GateOp("barrier", tuple(spec.qubits))
    circ.extend(spec.prep)
    for layer in spec.layers:
        circ.append(barrier.name, barrier.qubits)
        circ.extend(layer)
    circ.append(barrier.name, barrier.qubits)
    circ.extend(spec.pauli_ops())
    circ.append(barrier.name, barrier.qubits)
    circ.extend(spec.mirror_ops())
    for q in spec.qubits:
        circ.append("measure", (q,))
    return circ


def expected_mirror_bitstring(spec: MirrorCircuitSpec) -> np.ndarray:
    """Ideal outcome bits, ordered like ``sorted(spec.qubits)``.

    The circuit maps |0> to C Q C^dagger |0> with C the quasi-inverse half,
    so the outcome is the X part of the central Pauli conjugated through it.
    """
    n = max(spec.qubits) + 1
    x = [0] * n
    z = [0] * n
    for q, p in zip(spec.qubits, spec.pauli):
        x[q] = int(p in "XY")
        z[q] = int(p in "YZ")
    image = clifford_conjugate_pauli(spec.mirror_ops(), Pauli(tuple(x), tuple(z)))
    return np.array([image.x[q] for q in sorted(spec.qubits)], dtype=np.uint8)


def polarization(success: float, width: int) -> float:
    base = 2.0**-width
    return max(0.0, (success - base) / (1.0 - base))


@dataclass
class MirrorResult:
    width: int
    num_layers: int
    success_prob: float
    polarization: float
    pass_flag: bool
    shots_total: int
    matches: int
    per_circuit_success: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "num_layers": self.num_layers,
            "success_prob": self.success_prob,
            "polarization": self.polarization,
            "pass": self.pass_flag,
            "shots_total": self.shots_total,
            "matches": self.matches,
            "per_circuit_success": self.per_circuit_success,
        }


def mirror_run(
    device: DeviceModel,
    width: int = 10,
    num_layers: int = 16,
    two_qubit_gate_prob: float = 0.5,
    num_circuits: int = 10,
    shots: int = 1000,
    seed=None,
) -> MirrorResult:
    if width > device.num_qubits:
        return MirrorResult(width, num_layers, 0.0, 0.0, False, 0, 0)
    rng = as_rng(seed)
    matches = 0
    per_circuit = []
    for _ in range(num_circuits):
        spec = sample_mirror_spec(device, width, num_layers, two_qubit_gate_prob, rng)
        circ = build_mirror_circuit(spec, device.num_qubits)
        expected = expected_mirror_bitstring(spec)
        (bits,) = run_bits([circ], device, shots, rng)
        hits = int(np.all(bits == expected, axis=1).sum())
        matches += hits
        per_circuit.append(hits / shots)
    total = num_circuits * shots
    s_hat = matches / total if total else 0.0
    return MirrorResult(
        width=width,
        num_layers=num_layers,
        success_prob=s_hat,
        polarization=polarization(s_hat, width),
        pass_flag=s_hat > PASS_THRESHOLD,
        shots_total=total,
        matches=matches,
        per_circuit_success=per_circuit,
    )


def mc_score(polarizations: Sequence[float | None]) -> float:
    """Width-weighted polarization over the six panel shapes (missing counts as 0)."""
    if len(polarizations) != len(PANEL):
        raise ValueError(f"expected {len(PANEL)} panel entries")
    return float(sum(w * (p or 0.0) for w, p in zip(PANEL_WEIGHTS, polarizations)))


def mirror_panel(
    device: DeviceModel,
    two_qubit_gate_prob: float = 0.5,
    num_circuits: int = 10,
    shots: int = 1000,
    seed=None,
    panel: Sequence[tuple[int, int]] = PANEL,
) -> list[MirrorResult]:
    rng = as_rng(seed)
    return [mirror_run(device, w, d, two_qubit_gate_prob, num_circuits, shots, rng) for w, d in panel]
