"""Clifford gate words, small Clifford groups and Pauli conjugation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from ..circuits.circuit import GateOp
from .kernels import OPCODES

_HALF_PI = math.pi / 2


def _quarter_turns(angle: float) -> int | None:
    k = angle / _HALF_PI
    nearest = round(k)
    if abs(k - nearest) > 1e-9:
        return None
    return nearest % 4


def clifford_word(op: GateOp) -> tuple[tuple[str, tuple[int, ...]], ...] | None:
    """Express ``op`` as opcode gates (up to global phase), or None if non-Clifford."""
    if op.name in OPCODES:
        return ((op.name, op.qubits),)
    return _clifford_word(op)


@lru_cache(maxsize=1 << 16)
def _clifford_word(op: GateOp):
    word = _word(op)
    return None if word is None else tuple(word)


def _word(op: GateOp) -> list[tuple[str, tuple[int, ...]]] | None:
    name, qs = op.name, op.qubits
    if name in OPCODES:
        return [(name, qs)]
    if name in ("rz", "rx", "ry"):
        k = _quarter_turns(op.params[0])
        if k is None:
            return None
        q = qs
        if name == "rz":
            return [[], [("s", q)], [("z", q)], [("sdg", q)]][k]
        if name == "rx":
            inner = [[], [("s", q)], [("z", q)], [("sdg", q)]][k]
            return [("h", q)] + inner + [("h", q)] if inner else []
        return [[], [("z", q), ("h", q)], [("y", q)], [("h", q), ("z", q)]][k]
    if name == "rzz":
        k = _quarter_turns(op.params[0])
        if k is None:
            return None
        a, b = qs
        return [
            [],
            [("cz", qs), ("s", (a,)), ("s", (b,))],
            [("z", (a,)), ("z", (b,))],
            [("cz", qs), ("sdg", (a,)), ("sdg", (b,))],
        ][k]
    if name == "r":
        theta, phi = _quarter_turns(op.params[0]), _quarter_turns(op.params[1])
        if theta is None or phi is None:
            return None
        # r(theta, phi) = rz(phi) rx(theta) rz(-phi)
        q = qs
        turn = [[], [("s", q)], [("z", q)], [("sdg", q)]]
        inner = turn[theta]
        if not inner:
            return []
        return turn[(-phi) % 4] + [("h", q)] + inner + [("h", q)] + turn[phi]
    if name == "iswap":
        a, b = qs
        return [("h", (b,)), ("cx", (b, a)), ("cx", (a, b)), ("h", (a,)), ("s", (a,)), ("s", (b,))]
    return None


def is_clifford_circuit(ops: Iterable[GateOp]) -> bool:
    for op in ops:
        if op.name in ("measure", "barrier"):
            continue
        if op.name == "reset" or clifford_word(op) is None:
            return False
    return True


# ---------------------------------------------------------------------------
# Pauli conjugation with sign tracking (CHP update rules)


@dataclass(frozen=True)
class Pauli:
    """n-qubit Pauli operator ``(-1)**sign * X^x Z^z`` per qubit (x=z=1 is Y)."""

    x: tuple[int, ...]
    z: tuple[int, ...]
    sign: int = 0

    @classmethod
    def from_label(cls, label: str) -> Pauli:
        sign = 0
        if label.startswith("-"):
            sign, label = 1, label[1:]
        elif label.startswith("+"):
            label = label[1:]
        table = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
        pairs = [table[c] for c in label.upper()]
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), sign)

    def label(self) -> str:
        chars = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
        body = "".join(chars[(a, b)] for a, b in zip(self.x, self.z))
        return ("-" if self.sign else "+") + body


def _conjugate_step(x: list[int], z: list[int], r: int, code: int, a: int, b: int) -> int:
    if code == 1:
        r ^= x[a] & z[a]
        x[a], z[a] = z[a], x[a]
    elif code == 2:
        r ^= x[a] & z[a]
        z[a] ^= x[a]
    elif code == 3:
        z[a] ^= x[a]
        r ^= x[a] & z[a]
    elif code == 4:
        r ^= z[a]
    elif code == 5:
        r ^= x[a] ^ z[a]
    elif code == 6:
        r ^= x[a]
    elif code == 7:
        r ^= x[a] & z[b] & (x[b] ^ z[a] ^ 1)
        x[b] ^= x[a]
        z[a] ^= z[b]
    elif code == 8:
        r ^= x[a] & x[b] & (z[a] ^ z[b])
        z[a] ^= x[b]
        z[b] ^= x[a]
    elif code == 9:
        x[a], x[b] = x[b], x[a]
        z[a], z[b] = z[b], z[a]
    return r


def clifford_conjugate_pauli(ops: Sequence[GateOp], pauli: Pauli) -> Pauli:
    """Return C P C^dagger where C applies ``ops`` in order."""
    x, z, r = list(pauli.x), list(pauli.z), pauli.sign
    for op in ops:
        if op.name in ("barrier", "measure"):
            continue
        word = clifford_word(op)
        if word is None:
            raise ValueError(f"{op.name}{op.params} is not a Clifford gate")
        for name, qs in word:
            r = _conjugate_step(x, z, r, OPCODES[name], qs[0], qs[1] if len(qs) > 1 else -1)
    return Pauli(tuple(x), tuple(z), r)


# ---------------------------------------------------------------------------
# Clifford groups on one and two qubits, enumerated modulo Paulis


def _apply_symplectic(table: np.ndarray, name: str, qs: tuple[int, ...], k: int) -> None:
    # table rows are images of X_0..X_{k-1}, Z_0..Z_{k-1} as (x | z) bit rows
    xs, zs = table[:, :k], table[:, k:]
    a = qs[0]
    if name == "h":
        tmp = xs[:, a].copy()
        xs[:, a] = zs[:, a]
        zs[:, a] = tmp
    elif name in ("s", "sdg"):
        zs[:, a] ^= xs[:, a]
    elif name == "cx":
        b = qs[1]
        xs[:, b] ^= xs[:, a]
        zs[:, a] ^= zs[:, b]
    elif name == "cz":
        b = qs[1]
        zs[:, a] ^= xs[:, b]
        zs[:, b] ^= xs[:, a]
    elif name == "swap":
        b = qs[1]
        xs[:, [a, b]] = xs[:, [b, a]]
        zs[:, [a, b]] = zs[:, [b, a]]


@dataclass(frozen=True)
class CliffordGroup:
    """All Cliffords on ``k`` qubits modulo Paulis, each with a shortest word."""

    k: int
    words: tuple[tuple[tuple[str, tuple[int, ...]], ...], ...]
    index: dict

    def __len__(self) -> int:
        return len(self.words)

    def key(self, table: np.ndarray) -> bytes:
        return np.ascontiguousarray(table, dtype=np.uint8).tobytes()

    def identity_table(self) -> np.ndarray:
        return np.eye(2 * self.k, dtype=np.uint8)

    def word_for(self, table: np.ndarray):
        return self.words[self.index[self.key(table)]]

    def sample(self, rng: np.random.Generator, qubits: Sequence[int]) -> list[GateOp]:
        """Uniformly random Clifford on ``qubits`` as gate ops (class word plus Pauli)."""
        return self.sample_element(rng, qubits)[1]

    def sample_element(self, rng: np.random.Generator, qubits: Sequence[int]) -> tuple[int, list[GateOp]]:
        """Like :meth:`sample`, also returning the class index into :attr:`matrices`."""
        idx = int(rng.integers(len(self.words)))
        ops = [GateOp(name, tuple(qubits[q] for q in qs)) for name, qs in self.words[idx]]
        for q in qubits:
            p = int(rng.integers(4))
            if p:
                ops.append(GateOp("ixyz"[p], (q,)))
        return idx, ops

    @cached_property
    def matrices(self) -> np.ndarray:
        """Symplectic matrix of every class; applying class i maps a table T to T @ M[i] mod 2."""
        out = np.zeros((len(self.words), 2 * self.k, 2 * self.k), dtype=np.uint8)
        for i, word in enumerate(self.words):
            out[i] = self.table_of(word)
        return out

    def table_of(self, word) -> np.ndarray:
        t = self.identity_table()
        for name, qs in word:
            _apply_symplectic(t, name, tuple(qs), self.k)
        return t

    def update(self, table: np.ndarray, ops: Iterable[GateOp], local: dict[int, int]) -> None:
        """Fold gate ops (on device qubits mapped through ``local``) into ``table``."""
        for op in ops:
            word = clifford_word(op)
            for name, qs in word:
                _apply_symplectic(table, name, tuple(local[q] for q in qs), self.k)

    def inverse_ops(self, table: np.ndarray, qubits: Sequence[int]) -> list[GateOp]:
        """Gate ops undoing the Clifford whose table is ``table`` (modulo Paulis)."""
        word = self.word_for(table)
        out = []
        for name, qs in reversed(word):
            inv = {"s": "sdg", "sdg": "s"}.get(name, name)
            out.append(GateOp(inv, tuple(qubits[q] for q in qs)))
        return out


@lru_cache(maxsize=None)
def clifford_group(k: int) -> CliffordGroup:
    if k not in (1, 2):
        raise ValueError("only one- and two-qubit Clifford groups are enumerated")
    gens: list[tuple[str, tuple[int, ...]]] = []
    for q in range(k):
        gens += [("h", (q,)), ("s", (q,))]
    if k == 2:
        gens += [("cx", (0, 1)), ("cx", (1, 0))]
    start = np.eye(2 * k, dtype=np.uint8)
    words = [()]
    index = {start.tobytes(): 0}
    frontier = [(start, ())]
    while frontier:
        nxt = []
        for table, word in frontier:
            for g in gens:
                t = table.copy()
                _apply_symplectic(t, g[0], g[1], k)
                key = t.tobytes()
                if key not in index:
                    index[key] = len(words)
                    words.append(word + (g,))
                    nxt.append((t, word + (g,)))
        frontier = nxt
    return CliffordGroup(k, tuple(words), index)
