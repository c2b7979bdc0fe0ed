"""Rewrite circuits into a device's native basis and simple peephole passes."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable

import numpy as np

from .circuit import Circuit, GateOp
from .gates import gate_matrix

_PASS_THROUGH = frozenset({"measure", "reset", "barrier"})
_TWO_PI = 2.0 * math.pi


class UnsupportedBasisError(ValueError):
    pass


def _negligible(angle: float) -> bool:
    # rotations by multiples of 2*pi differ from identity only by a global phase
    return abs(math.remainder(angle, _TWO_PI)) < 1e-12


def zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Return (a, b, c) with u equal to rz(a) @ ry(b) @ rz(c) up to global phase."""
    v = u / np.sqrt(np.linalg.det(u))
    b = 2.0 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[1, 0]) < 1e-12:
        return 2.0 * float(np.angle(v[1, 1])), 0.0, 0.0
    if abs(v[0, 0]) < 1e-12:
        return 2.0 * float(np.angle(v[1, 0])), b, 0.0
    plus = 2.0 * float(np.angle(v[1, 1]))
    minus = 2.0 * float(np.angle(v[1, 0]))
    return 0.5 * (plus + minus), b, 0.5 * (plus - minus)


@lru_cache(maxsize=4096)
def _gate_template(name: str, params: tuple[float, ...], basis: frozenset[str]):
    return _word_template(gate_matrix(name, params), basis)


def _word_template(u: np.ndarray, basis: frozenset[str]) -> tuple[tuple[str, tuple[float, ...]], ...]:
    a, b, c = zyz_angles(u)
    words: list[tuple[str, tuple[float, ...]]]
    if {"rz", "rx"} <= basis:
        words = [("rz", (c - math.pi / 2,)), ("rx", (b,)), ("rz", (a + math.pi / 2,))]
    elif {"rz", "ry"} <= basis:
        words = [("rz", (c,)), ("ry", (b,)), ("rz", (a,))]
    elif "r" in basis:
        if "rz" in basis:
            words = [("rz", (a + c,))]
        else:
            words = [("r", (math.pi, 0.0)), ("r", (math.pi, 0.5 * (a + c)))]
        words.append(("r", (b, a + math.pi / 2)))
    elif {"h", "rz"} <= basis:
        words = [("rz", (c - math.pi / 2,)), ("h", ()), ("rz", (b,)), ("h", ()), ("rz", (a + math.pi / 2,))]
    else:
        raise UnsupportedBasisError(f"no single-qubit decomposition into {sorted(basis)}")
    out = []
    for name, params in words:
        if name in ("rz", "rx", "ry", "r") and _negligible(params[0]):
            continue
        out.append((name, tuple(float(p) for p in params)))
    return tuple(out)


def _two_qubit_rewrite(op: GateOp, basis: frozenset[str]) -> list[GateOp]:
    a, b = op.qubits
    name = op.name
    if name == "cx":
        return [GateOp("h", (b,)), GateOp("cz", (a, b)), GateOp("h", (b,))]
    if name == "cz":
        if "cx" in basis:
            return [GateOp("h", (b,)), GateOp("cx", (a, b)), GateOp("h", (b,))]
        # rzz(pi/2) equals cz (s x s) up to global phase
        return [
            GateOp("rzz", (a, b), (math.pi / 2,)),
            GateOp("rz", (a,), (-math.pi / 2,)),
            GateOp("rz", (b,), (-math.pi / 2,)),
        ]
    if name == "swap":
        return [GateOp("cx", (a, b)), GateOp("cx", (b, a)), GateOp("cx", (a, b))]
    if name == "rzz":
        return [GateOp("cx", (a, b)), GateOp("rz", (b,), op.params), GateOp("cx", (a, b))]
    if name == "iswap":
        return [
            GateOp("h", (b,)),
            GateOp("cx", (b, a)),
            GateOp("cx", (a, b)),
            GateOp("h", (a,)),
            GateOp("s", (a,)),
            GateOp("s", (b,)),
        ]
    raise UnsupportedBasisError(f"cannot rewrite {name}")


def _lower_ops(ops: Iterable[GateOp], basis: frozenset[str], depth: int = 0) -> list[GateOp]:
    if depth > 4:
        raise UnsupportedBasisError(f"rewrite did not converge for basis {sorted(basis)}")
    out: list[GateOp] = []
    done: dict[GateOp, list[GateOp]] = {}
    for op in ops:
        if op.name in _PASS_THROUGH or op.name in basis:
            out.append(op)
            continue
        word = done.get(op)
        if word is None:
            if op.is_two_qubit:
                if not basis & {"cx", "cz", "rzz"}:
                    raise UnsupportedBasisError(f"basis {sorted(basis)} has no cx, cz or rzz entangler")
                word = _lower_ops(_two_qubit_rewrite(op, basis), basis, depth + 1)
            else:
                q = op.qubits[0]
                word = [GateOp(name, (q,), params) for name, params in _gate_template(op.name, op.params, basis)]
            done[op] = word
        out.extend(word)
    return out


def lower_to_basis(circuit: Circuit, basis: Iterable[str]) -> Circuit:
    """Rewrite every gate not in ``basis`` into gates that are.

    Supported targets combine an entangler from {cx, cz, rzz} with one of the
    single-qubit sets {rz, rx}, {rz, ry}, {r}, {r, rz} or {h, rz}. Gates
    already in the basis, barriers, measurements and resets are untouched.
    """
    target = frozenset(basis)
    if not target:
        raise UnsupportedBasisError("empty target basis")
    ops = _lower_ops(circuit.ops, target)
    # rewrites only touch qubits of validated ops
    return Circuit.trusted(circuit.num_qubits, ops, dict(circuit.metadata))


def _is_inverse_pair(a: GateOp, b: GateOp) -> bool:
    if a.qubits != b.qubits or not a.is_unitary or not b.is_unitary:
        # cx and swap are symmetric or ordered; only identical wiring cancels
        if a.name in ("cz", "swap", "rzz") and b.name == a.name and set(a.qubits) == set(b.qubits):
            return a.name != "rzz" or math.isclose(a.params[0], -b.params[0], abs_tol=1e-12)
        return False
    try:
        inv = a.inverse()
    except ValueError:
        return False
    if inv.name != b.name:
        return False
    return all(math.isclose(x, y, abs_tol=1e-12) for x, y in zip(inv.params, b.params))


def cancel_adjacent_inverses(circuit: Circuit) -> Circuit:
    """Remove gate pairs that are adjacent on their wires and mutually inverse.

    Barriers block cancellation across them, so a mirrored circuit keeps its
    two halves while an unbarriered one collapses to the identity.
    """
    kept: list[GateOp | None] = []
    last: dict[int, int] = {}  # qubit -> index into kept of the latest op touching it
    for op in circuit.ops:
        prev_idx = {last.get(q) for q in op.qubits}
        if len(prev_idx) == 1:
            (idx,) = prev_idx
            if idx is not None and kept[idx] is not None and _is_inverse_pair(kept[idx], op):
                partner = kept[idx]
                kept[idx] = None
                for q in partner.qubits:
                    # rewind this wire to the most recent surviving op
                    last.pop(q, None)
                    for j in range(idx - 1, -1, -1):
                        prior = kept[j]
                        if prior is not None and q in prior.qubits:
                            last[q] = j
                            break
                continue
        kept.append(op)
        for q in op.qubits:
            last[q] = len(kept) - 1
    return Circuit(circuit.num_qubits, [op for op in kept if op is not None], dict(circuit.metadata))
