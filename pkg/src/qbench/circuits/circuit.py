"""Gate-level circuit representation shared by every benchmark."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

# name -> (number of qubits, number of parameters); barrier arity is variable
GATE_SPECS: dict[str, tuple[int, int]] = {
    "id": (1, 0),
    "h": (1, 0),
    "x": (1, 0),
    "y": (1, 0),
    "z": (1, 0),
    "s": (1, 0),
    "sdg": (1, 0),
    "rx": (1, 1),
    "ry": (1, 1),
    "rz": (1, 1),
    "r": (1, 2),
    "cx": (2, 0),
    "cz": (2, 0),
    "swap": (2, 0),
    "iswap": (2, 0),
    "rzz": (2, 1),
    "measure": (1, 0),
    "reset": (1, 0),
    "barrier": (-1, 0),
}

NON_UNITARY = frozenset({"measure", "reset", "barrier"})
SELF_INVERSE = frozenset({"id", "h", "x", "y", "z", "cx", "cz", "swap"})


@dataclass(frozen=True, slots=True)
class GateOp:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    @property
    def is_two_qubit(self) -> bool:
        return self.name != "barrier" and len(self.qubits) == 2

    @property
    def is_unitary(self) -> bool:
        return self.name not in NON_UNITARY

    def inverse(self) -> GateOp:
        name = self.name
        if name in SELF_INVERSE or name == "barrier":
            return self
        if name == "s":
            return GateOp("sdg", self.qubits)
        if name == "sdg":
            return GateOp("s", self.qubits)
        if name in ("rx", "ry", "rz", "rzz"):
            return GateOp(name, self.qubits, (-self.params[0],))
        if name == "r":
            return GateOp("r", self.qubits, (-self.params[0], self.params[1]))
        raise ValueError(f"gate {name!r} has no inverse in the gate vocabulary")


def _check_op(op: GateOp, num_qubits: int) -> None:
    spec = GATE_SPECS.get(op.name)
    if spec is None:
        raise ValueError(f"unknown gate {op.name!r}")
    arity, nparams = spec
    if arity >= 0 and len(op.qubits) != arity:
        raise ValueError(f"{op.name} acts on {arity} qubit(s), got {op.qubits}")
    if len(op.params) != nparams:
        raise ValueError(f"{op.name} takes {nparams} parameter(s), got {op.params}")
    if len(set(op.qubits)) != len(op.qubits):
        raise ValueError(f"{op.name} repeats a qubit: {op.qubits}")
    for q in op.qubits:
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit {q} outside register of size {num_qubits}")


@dataclass
class Circuit:
    """Ordered gate list on ``num_qubits`` qubits.

    Qubit 0 is the leftmost character of every bitstring produced from this
    circuit, and the most significant bit of statevector indices.
    """

    num_qubits: int
    ops: list[GateOp] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        for op in self.ops:
            _check_op(op, self.num_qubits)

    @classmethod
    def trusted(cls, num_qubits: int, ops: list[GateOp], metadata: dict | None = None) -> Circuit:
        """Build without per-op checks; for ops derived from an already validated circuit."""
        circ = object.__new__(cls)
        circ.num_qubits, circ.ops, circ.metadata = num_qubits, ops, metadata if metadata is not None else {}
        return circ

    def __iter__(self) -> Iterator[GateOp]:
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def append(self, name: str, qubits: Sequence[int], params: Sequence[float] = ()) -> Circuit:
        op = GateOp(name, tuple(int(q) for q in qubits), tuple(float(p) for p in params))
        _check_op(op, self.num_qubits)
        self.ops.append(op)
        return self

    def extend(self, ops: Iterable[GateOp]) -> Circuit:
        for op in ops:
            _check_op(op, self.num_qubits)
            self.ops.append(op)
        return self

    # convenience builders
    def h(self, q: int) -> Circuit:
        return self.append("h", (q,))

    def x(self, q: int) -> Circuit:
        return self.append("x", (q,))

    def rx(self, theta: float, q: int) -> Circuit:
        return self.append("rx", (q,), (theta,))

    def ry(self, theta: float, q: int) -> Circuit:
        return self.append("ry", (q,), (theta,))

    def rz(self, theta: float, q: int) -> Circuit:
        return self.append("rz", (q,), (theta,))

    def cx(self, c: int, t: int) -> Circuit:
        return self.append("cx", (c, t))

    def cz(self, a: int, b: int) -> Circuit:
        return self.append("cz", (a, b))

    def rzz(self, theta: float, a: int, b: int) -> Circuit:
        return self.append("rzz", (a, b), (theta,))

    def barrier(self, qubits: Sequence[int] | None = None) -> Circuit:
        qs = tuple(range(self.num_qubits)) if qubits is None else tuple(qubits)
        return self.append("barrier", qs)

    def measure_all(self) -> Circuit:
        for q in range(self.num_qubits):
            self.append("measure", (q,))
        return self

    # inspection
    def count_ops(self) -> Counter:
        return Counter(op.name for op in self.ops)

    def gate_counts(self) -> tuple[int, int, int]:
        """Return (one-qubit gates, two-qubit gates, measurements)."""
        n1 = n2 = nm = 0
        for op in self.ops:
            if op.name == "measure":
                nm += 1
            elif op.name in ("barrier", "reset"):
                continue
            elif len(op.qubits) == 2:
                n2 += 1
            else:
                n1 += 1
        return n1, n2, nm

    def two_qubit_count(self) -> int:
        return self.gate_counts()[1]

    def measured_qubits(self) -> list[int]:
        return sorted({op.qubits[0] for op in self.ops if op.name == "measure"})

    def unitary_ops(self) -> list[GateOp]:
        return [op for op in self.ops if op.is_unitary]

    def depth(self) -> int:
        level = [0] * self.num_qubits
        for op in self.ops:
            if op.name == "barrier":
                top = max(level[q] for q in op.qubits)
                for q in op.qubits:
                    level[q] = top
                continue
            top = max(level[q] for q in op.qubits) + 1
            for q in op.qubits:
                level[q] = top
        return max(level)

    def copy(self) -> Circuit:
        return Circuit(self.num_qubits, list(self.ops), dict(self.metadata))

    def inverse(self) -> Circuit:
        if any(op.name in ("measure", "reset") for op in self.ops):
            raise ValueError("cannot invert a circuit containing measure or reset")
        return Circuit(self.num_qubits, [op.inverse() for op in reversed(self.ops)])

    def compose(self, other: Circuit) -> Circuit:
        if other.num_qubits != self.num_qubits:
            raise ValueError("register sizes differ")
        return Circuit(self.num_qubits, self.ops + other.ops, dict(self.metadata))
