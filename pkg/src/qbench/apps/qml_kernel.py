"""Quantum kernel diagonal entry: ZZ feature map followed by its inverse."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..circuits.circuit import Circuit, GateOp
from ..circuits.devices import DeviceModel
from ..sim.execute import run_bits
from ..sim.sampler import as_rng
from .layout import line_layout

SCORE_WIDTHS = (10, 20, 30, 50)


@dataclass
class QmlKernelResult:
    num_qubits: int
    accuracy: float
    shots: int
    x: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"num_qubits": self.num_qubits, "accuracy": self.accuracy, "shots": self.shots, "x": self.x}


def entangling_pairs(n: int) -> list[tuple[int, int]]:
    """Even bonds (0,1),(2,3),... then odd bonds (1,2),(3,4),..."""
    return [(i, i + 1) for i in range(0, n - 1, 2)] + [(i, i + 1) for i in range(1, n - 1, 2)]


def zz_feature_map(x: Sequence[float], qubits: Sequence[int] | None = None, num_qubits: int | None = None) -> Circuit:
    n = len(x)
    qubits = list(range(n)) if qubits is None else list(qubits)
    circ = Circuit(num_qubits if num_qubits is not None else max(qubits) + 1)
    for q in qubits:
        circ.h(q)
    for q, xk in zip(qubits, x):
        circ.rz(float(xk), q)
    for i, j in entangling_pairs(n):
        a, b = qubits[i], qubits[j]
        circ.cx(a, b)
        circ.rz(float((math.pi - x[i]) * (math.pi - x[j])), b)
        circ.cx(a, b)
    return circ


def build_qml_overlap(
    n: int,
    x: Sequence[float] | None = None,
    seed=None,
    barrier: bool = True,
    qubits: Sequence[int] | None = None,
    num_qubits: int | None = None,
) -> Circuit:
    """U(x), a barrier, then U(x)^dagger and a full measurement.

    Ideally the register returns to all zeros. Dropping the barrier lets a
    peephole pass cancel the two halves, which is kept as an option so the
    failure mode can be demonstrated.
    """
    if n < 2:
        raise ValueError("the overlap circuit needs at least 2 qubits")
    if x is None:
        x = as_rng(seed).uniform(0.0, 2.0 * math.pi, size=n)
    x = [float(v) for v in x]
    if len(x) != n:
        raise ValueError("feature vector length must equal n")
    qubits = list(range(n)) if qubits is None else list(qubits)
    forward = zz_feature_map(x, qubits, num_qubits)
    circ = Circuit(forward.num_qubits, list(forward.ops), {"x": x})
    if barrier:
        circ.barrier(qubits)
    circ.extend(op.inverse() for op in reversed(forward.ops))
    circ.extend(GateOp("measure", (q,)) for q in qubits)
    return circ


def qml_run(device: DeviceModel, num_qubits: int, shots: int = 1000, seed=None) -> QmlKernelResult:
    rng = as_rng(seed)
    qubits = line_layout(device, num_qubits, rng)
    circ = build_qml_overlap(num_qubits, seed=rng, qubits=qubits, num_qubits=device.num_qubits)
    (bits,) = run_bits([circ], device, shots, rng)
    accuracy = float(np.mean(~bits.any(axis=1)))
    return QmlKernelResult(num_qubits, accuracy, shots, circ.metadata["x"])


def qmlk_score(accuracy: dict[int, float | None], widths: Sequence[int] = SCORE_WIDTHS) -> float:
    total = float(sum(widths))
    return float(sum(n * (accuracy.get(n) or 0.0) for n in widths) / total)
