"""Bell State Effective Qubits: device-wide CHSH test on every coupled pair."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..circuits.circuit import Circuit
from ..circuits.devices import DeviceModel
from ..circuits.graphs import Edge, edge_coloring, largest_connected_component
from ..sim.execute import run_bits
from ..sim.sampler import as_rng

BASES = ("ZZ", "ZX", "XZ", "XX")
CLASSICAL_BOUND = 2.0


@dataclass
class BseqResult:
    per_edge_S: dict[Edge, float]
    violating_subgraph: list[Edge]
    lccs: int
    connection_fraction: float
    num_qubits: int
    num_color_classes: int = 0
    bseq_score: float | None = None
    correlators: dict[Edge, dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_edge_S": {f"{a}-{b}": s for (a, b), s in sorted(self.per_edge_S.items())},
            "violating_subgraph": [list(e) for e in self.violating_subgraph],
            "lccs": self.lccs,
            "connection_fraction": self.connection_fraction,
            "num_qubits": self.num_qubits,
            "num_color_classes": self.num_color_classes,
            "bseq_score": self.bseq_score,
        }

    @classmethod
    def from_dict(cls, data: dict) -> BseqResult:
        per_edge = {}
        for key, s in data.get("per_edge_S", {}).items():
            a, b = key.split("-")
            per_edge[(int(a), int(b))] = float(s)
        return cls(
            per_edge_S=per_edge,
            violating_subgraph=[tuple(e) for e in data.get("violating_subgraph", [])],
            lccs=int(data["lccs"]),
            connection_fraction=float(data["connection_fraction"]),
            num_qubits=int(data["num_qubits"]),
            num_color_classes=int(data.get("num_color_classes", 0)),
            bseq_score=data.get("bseq_score"),
        )


def default_max_colors(device: DeviceModel) -> int | None:
    # all-to-all devices have n-1 classes; a logarithmic number of perfect
    # matchings already connects every qubit
    if device.all_to_all:
        return 2 * math.ceil(math.log2(max(device.num_qubits, 2)))
    return None


def chsh_circuit(num_qubits: int, edges: list[Edge], basis: str) -> Circuit:
    """CHSH circuit measuring ``basis`` on every (disjoint) edge in parallel.

    Each pair gets a Bell state, then ry(pi/4) on its first qubit. X readout
    on the first qubit rotates +X onto Z; on the second qubit it rotates -X
    onto Z, which places the four settings at the CHSH-optimal angles for
    S = |<ZZ> + <ZX> + <XZ> - <XX>|.
    """
    circ = Circuit(num_qubits)
    for a, b in edges:
        circ.h(a)
        circ.cx(a, b)
        circ.ry(math.pi / 4, a)
    for a, b in edges:
        if basis[0] == "X":
            circ.ry(-math.pi / 2, a)
        if basis[1] == "X":
            circ.ry(math.pi / 2, b)
    for a, b in edges:
        circ.append("measure", (a,))
        circ.append("measure", (b,))
    return circ


def bseq_circuits(device: DeviceModel, max_colors: int | None = None) -> list[tuple[int, str, Circuit]]:
    """All (color class, basis, circuit) triples for ``device``."""
    if max_colors is None:
        max_colors = default_max_colors(device)
    classes = edge_coloring(device.edges, max_colors)
    out = []
    for ci, cls in enumerate(classes):
        for basis in BASES:
            out.append((ci, basis, chsh_circuit(device.num_qubits, cls, basis)))
    return out


def chsh_value(corr: dict[str, float]) -> float:
    return abs(corr["ZZ"] + corr["ZX"] + corr["XZ"] - corr["XX"])


def bseq_run(device: DeviceModel, shots: int = 1000, max_colors: int | None = None, seed=None) -> BseqResult:
    rng = as_rng(seed)
    if max_colors is None:
        max_colors = default_max_colors(device)
    classes = edge_coloring(device.edges, max_colors)
    correlators: dict[Edge, dict[str, float]] = {}
    for cls in classes:
        for basis in BASES:
            circ = chsh_circuit(device.num_qubits, cls, basis)
            (bits,) = run_bits([circ], device, shots, rng)
            measured = circ.measured_qubits()
            col = {q: i for i, q in enumerate(measured)}
            for a, b in cls:
                agree = bits[:, col[a]] == bits[:, col[b]]
                correlators.setdefault((a, b), {})[basis] = float(2.0 * agree.mean() - 1.0)
    per_edge = {e: chsh_value(c) for e, c in correlators.items()}
    violating = sorted(e for e, s in per_edge.items() if s > CLASSICAL_BOUND)
    lccs = len(largest_connected_component(violating))
    return BseqResult(
        per_edge_S=per_edge,
        violating_subgraph=violating,
        lccs=lccs,
        connection_fraction=lccs / device.num_qubits,
        num_qubits=device.num_qubits,
        num_color_classes=len(classes),
        correlators=correlators,
    )


def bseq_score_values(lccs: float, fraction: float, base_lccs: float, base_fraction: float) -> float:
    """Weighted blend: 7/8 on absolute connectivity, 1/8 on the connected fraction."""
    if base_lccs <= 0 or base_fraction <= 0:
        raise ValueError("baseline LCCS and connection fraction must be positive")
    return 7.0 / 8.0 * 100.0 * lccs / base_lccs + 1.0 / 8.0 * 100.0 * fraction / base_fraction


def bseq_score(result: BseqResult, baseline: BseqResult) -> float:
    return bseq_score_values(result.lccs, result.connection_fraction, baseline.lccs, baseline.connection_fraction)


def shot_noise_sigma(shots: int) -> float:
    """One standard deviation of S for the ideal correlators (each +-1/sqrt(2))."""
    var_each = (1.0 - 0.5) / shots
    return float(np.sqrt(4 * var_each))
