"""Error per layered gate from simultaneous direct randomized benchmarking.

A random chain is split into two disjoint sublayers of adjacent pairs.
Each sublayer is benchmarked with direct RB run simultaneously on all of its
pairs (two-qubit subsystems) and leftover qubits (one-qubit subsystems).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..circuits.circuit import Circuit, GateOp
from ..circuits.devices import DeviceModel
from ..circuits.graphs import random_chain
from ..sim.clifford import clifford_group
from ..sim.execute import native
from ..sim.sampler import as_rng, sample_bits_with_reference
from .rb_fit import RbFit, fit_rb_decay

DEFAULT_LENGTHS = (2, 4, 8, 16, 30, 50, 70, 100, 150, 200, 300, 500)
REPORT_LENGTHS = (10, 20, 50, 100)


class ChainSamplingError(RuntimeError):
    pass


@dataclass
class Subsystem:
    qubits: tuple[int, ...]
    sublayer: int
    success: dict[int, float] = field(default_factory=dict)
    fit: RbFit | None = None

    @property
    def fidelity(self) -> float:
        return self.fit.process_fidelity if self.fit else 0.0

    def to_dict(self) -> dict:
        return {
            "qubits": list(self.qubits),
            "sublayer": self.sublayer,
            "success": {str(k): v for k, v in sorted(self.success.items())},
            "alpha": self.fit.alpha if self.fit else None,
            "a": self.fit.a if self.fit else None,
            "process_fidelity": self.fidelity,
        }


@dataclass
class EplgResult:
    chain: list[int]
    lengths: list[int]
    subsystems: list[Subsystem]
    layer_fidelity: float
    eplg: float
    eplg_by_length: dict[int, float]

    @property
    def n_2q(self) -> int:
        return len(self.chain) - 1

    @property
    def subsystem_fidelities(self) -> dict[tuple[int, int], float]:
        """(sublayer, element index) -> process fidelity."""
        out, counters = {}, [0, 0]
        for sub in self.subsystems:
            out[(sub.sublayer, counters[sub.sublayer])] = sub.fidelity
            counters[sub.sublayer] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "chain": self.chain,
            "lengths": self.lengths,
            "n_2q": self.n_2q,
            "layer_fidelity": self.layer_fidelity,
            "eplg": self.eplg,
            "eplg_by_length": {str(k): v for k, v in sorted(self.eplg_by_length.items())},
            "subsystems": [s.to_dict() for s in self.subsystems],
        }


def sublayers(chain: Sequence[int]) -> list[tuple[list[tuple[int, int]], list[int]]]:
    """The two disjoint pair layers of a chain, each with its unpaired qubits."""
    out = []
    for offset in (0, 1):
        pairs = [(chain[i], chain[i + 1]) for i in range(offset, len(chain) - 1, 2)]
        paired = {q for p in pairs for q in p}
        out.append((pairs, [q for q in chain if q not in paired]))
    return out


def layer_fidelity(fidelities: Sequence[float]) -> float:
    return float(np.prod(fidelities))


def eplg_from_lf(lf: float, n2q: int) -> float:
    """Per-gate error implied by layer fidelity ``lf`` over ``n2q`` two-qubit gates."""
    if n2q < 1:
        raise ValueError("need at least one two-qubit gate")
    if lf <= 0:
        return 1.0
    return 1.0 - lf ** (1.0 / n2q)


def drb_circuit(
    num_qubits: int,
    pairs: Sequence[tuple[int, int]],
    idles: Sequence[int],
    depth: int,
    rng: np.random.Generator,
    two_qubit_gate: str = "cz",
) -> Circuit:
    """Simultaneous direct RB circuit of ``depth`` layers.

    Every subsystem starts in a uniformly random stabilizer state, each layer
    applies random single-qubit Cliffords everywhere followed by the entangler
    on every pair, and a final Clifford per subsystem returns it to a
    computational basis state.
    """
    g1, g2 = clifford_group(1), clifford_group(2)
    pairs = [tuple(p) for p in pairs]
    idles = list(idles)
    active = sorted({q for p in pairs for q in p} | set(idles))
    ops: list[GateOp] = []
    pair_tables = np.repeat(g2.identity_table()[None], len(pairs), axis=0).astype(np.int64)
    idle_tables = np.repeat(g1.identity_table()[None], len(idles), axis=0).astype(np.int64)

    # opening random Clifford on every subsystem
    for i, pair in enumerate(pairs):
        cls, new_ops = g2.sample_element(rng, pair)
        pair_tables[i] = g2.matrices[cls]
        ops.extend(new_ops)
    for i, q in enumerate(idles):
        cls, new_ops = g1.sample_element(rng, (q,))
        idle_tables[i] = g1.matrices[cls]
        ops.extend(new_ops)
    ops.append(GateOp("barrier", tuple(active)))

    # a layer maps a pair table T to T @ L0[c_a] @ L1[c_b] @ CZ; the two lifts commute
    m1 = g1.matrices.astype(np.int64)
    lift = np.zeros((2, len(g1), 4, 4), dtype=np.int64)
    for slot in (0, 1):
        cols = [slot, 2 + slot]
        lift[slot][:] = np.eye(4, dtype=np.int64)
        lift[slot][:, [[c] for c in cols], cols] = m1
    entangler = g2.table_of([(two_qubit_gate, (0, 1))]).astype(np.int64)
    first = np.array([active.index(a) for a, _ in pairs], dtype=np.int64)
    second = np.array([active.index(b) for _, b in pairs], dtype=np.int64)
    lone = np.array([active.index(q) for q in idles], dtype=np.int64)
    templates: dict[tuple[int, int, int], list[GateOp]] = {}
    barrier = GateOp("barrier", tuple(active))
    entanglers = [GateOp(two_qubit_gate, p) for p in pairs]
    for _ in range(depth):
        classes = rng.integers(len(g1), size=len(active))
        paulis = rng.integers(4, size=len(active))
        for q, c, p in zip(active, classes.tolist(), paulis.tolist()):
            word = templates.get((q, c, p))
            if word is None:
                word = [GateOp(name, (q,)) for name, _ in g1.words[c]]
                if p:
                    word.append(GateOp("ixyz"[p], (q,)))
                templates[(q, c, p)] = word
            ops.extend(word)
        if len(pairs):
            layer = lift[0][classes[first]] @ lift[1][classes[second]] @ entangler
            pair_tables = (pair_tables @ layer) & 1
        if len(idles):
            idle_tables = (idle_tables @ m1[classes[lone]]) & 1
        ops.extend(entanglers)
        ops.append(barrier)
    for i, pair in enumerate(pairs):
        ops.extend(g2.inverse_ops(pair_tables[i].astype(np.uint8), pair))
    for i, q in enumerate(idles):
        ops.extend(g1.inverse_ops(idle_tables[i].astype(np.uint8), (q,)))
    ops.extend(GateOp("measure", (q,)) for q in active)
    return Circuit(num_qubits, ops)


def eplg_run(
    device: DeviceModel,
    num_samples: int = 10,
    shots: int = 1000,
    lengths: Sequence[int] = DEFAULT_LENGTHS,
    num_qubits_in_chain: int = 100,
    seed=None,
    chain: Sequence[int] | None = None,
    restarts: int = 1000,
) -> EplgResult:
    rng = as_rng(seed)
    if chain is None:
        if num_qubits_in_chain > device.num_qubits:
            raise ChainSamplingError(f"{num_qubits_in_chain}-qubit chain requested on a {device.num_qubits}-qubit device")
        if device.all_to_all:
            chain = list(range(num_qubits_in_chain))
        else:
            chain = random_chain(device.edges, num_qubits_in_chain, rng, restarts)
        if len(chain) < num_qubits_in_chain:
            raise ChainSamplingError(f"no {num_qubits_in_chain}-qubit chain found after {restarts} restarts")
    chain = list(chain)
    if len(chain) < 2:
        raise ChainSamplingError("no chain of at least two coupled qubits")
    lengths = sorted(int(x) for x in lengths)
    if not lengths:
        raise ValueError("lengths must be non-empty")
    subsystems: list[Subsystem] = []
    for layer_idx, (pairs, idles) in enumerate(sublayers(chain)):
        members = [Subsystem(tuple(p), layer_idx) for p in pairs] + [Subsystem((q,), layer_idx) for q in idles]
        for depth in lengths:
            tallies = np.zeros(len(members))
            for _ in range(num_samples):
                circ = drb_circuit(device.num_qubits, pairs, idles, depth, rng)
                circ = native(circ, device)
                bits, ideal, order = sample_bits_with_reference(circ, shots, device.noise, rng)
                col = {q: i for i, q in enumerate(order)}
                for m_idx, sub in enumerate(members):
                    cols = [col[q] for q in sub.qubits]
                    hit = np.all(bits[:, cols] == ideal[cols], axis=1)
                    tallies[m_idx] += hit.mean()
            for m_idx, sub in enumerate(members):
                sub.success[depth] = float(tallies[m_idx] / num_samples)
        for sub in members:
            ls = sorted(sub.success)
            sub.fit = fit_rb_decay(ls, [sub.success[x] for x in ls], len(sub.qubits))
        subsystems.extend(members)

    lf = layer_fidelity([s.fidelity for s in subsystems])
    n2q = len(chain) - 1
    by_length = {}
    position = {q: i for i, q in enumerate(chain)}
    for ell in sorted(set(REPORT_LENGTHS) | {len(chain)}):
        if ell > len(chain) or ell < 2:
            continue
        inside = [s for s in subsystems if all(position[q] < ell for q in s.qubits)]
        by_length[ell] = eplg_from_lf(layer_fidelity([s.fidelity for s in inside]), ell - 1)
    return EplgResult(
        chain=chain,
        lengths=lengths,
        subsystems=subsystems,
        layer_fidelity=lf,
        eplg=eplg_from_lf(lf, n2q),
        eplg_by_length=by_length,
    )


def eplg_score(values: dict[int, float], baseline: dict[int, float], lengths: Sequence[int] = REPORT_LENGTHS) -> float:
    """Weighted harmonic mean of per-length ratios, scaled by the weight present.

    ``S_l = 100 * baseline_l / value_l`` over the lengths both sides report,
    with weights ``l / sum(lengths)``. The harmonic mean over the available
    set is multiplied by the total weight of that set, so lengths a device
    cannot reach pull its score down. Missing or non-positive values count
    as unavailable.
    """
    total = float(sum(lengths))
    avail = [
        ell
        for ell in lengths
        if values.get(ell) is not None and baseline.get(ell) is not None and values[ell] > 0 and baseline[ell] > 0
    ]
    if not avail:
        return 0.0
    w = np.array([ell / total for ell in avail])
    s = np.array([100.0 * baseline[ell] / values[ell] for ell in avail])
    w_sum = w.sum()
    return float(w_sum * w_sum / np.sum(w / s))
