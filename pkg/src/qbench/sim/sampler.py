"""Shot sampling with depolarizing gate noise and readout flips.

Backends, chosen per independent block of qubits:

* stabilizer: Clifford circuits at any width, via one tableau reference
  sample plus vectorized Pauli frames for every shot;
* density: noisy (or resetting) blocks of at most 8 qubits, exact channels
  (forced runs accept up to 10);
* statevector: noiseless blocks, or noisy blocks of at most 20 qubits via
  Monte Carlo trajectories grouped by error pattern.

Blocks are connected components of the gate interaction graph; with local
noise their outcomes are independent, so each is simulated on its own.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..circuits.circuit import Circuit, GateOp
from ..circuits.devices import NOISELESS, NoiseProfile
from ..circuits.gates import op_matrix
from .clifford import clifford_word, is_clifford_circuit
from .kernels import OPCODES, apply_1q, apply_2q, propagate_frames, run_gates, tableau_run

MAX_STATEVECTOR_QUBITS = 20
MAX_DENSITY_QUBITS = 10
AUTO_DENSITY_QUBITS = 8  # above this, trajectories beat the 4**k density cost


class SimulationError(RuntimeError):
    pass


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# noiseless statevector


def simulate_statevector(circuit: Circuit) -> np.ndarray:
    """Final state of a measurement-free circuit (terminal measures are ignored)."""
    n = circuit.num_qubits
    if n > MAX_STATEVECTOR_QUBITS:
        raise SimulationError(f"statevector simulation is capped at {MAX_STATEVECTOR_QUBITS} qubits, got {n}")
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    seen_measure: set[int] = set()
    for op in circuit.ops:
        if op.name == "barrier":
            continue
        if op.name == "measure":
            seen_measure.add(op.qubits[0])
            continue
        if op.name == "reset":
            raise SimulationError("reset has no pure-state evolution; sample the circuit instead")
        if seen_measure.intersection(op.qubits):
            raise SimulationError("gates after measurement are not supported")
        _apply_unitary(psi, op, n)
    return psi


def _apply_unitary(psi: np.ndarray, op: GateOp, n: int, qubit_map: dict[int, int] | None = None) -> None:
    qs = op.qubits if qubit_map is None else tuple(qubit_map[q] for q in op.qubits)
    u = op_matrix(op)
    if len(qs) == 1:
        apply_1q(psi, u, qs[0], n)
    else:
        apply_2q(psi, u, qs[0], qs[1], n)


def probabilities(circuit: Circuit) -> np.ndarray:
    psi = simulate_statevector(circuit)
    return np.abs(psi) ** 2


def counts_from_bits(bits: np.ndarray) -> dict[str, int]:
    if bits.shape[1] == 0:
        return {"": bits.shape[0]}
    weights = 1 << np.arange(bits.shape[1] - 1, -1, -1, dtype=np.int64) if bits.shape[1] < 63 else None
    if weights is not None:
        idx = bits.astype(np.int64) @ weights
        uniq, cnt = np.unique(idx, return_counts=True)
        width = bits.shape[1]
        return {format(int(u), f"0{width}b"): int(c) for u, c in zip(uniq, cnt)}
    rows = Counter("".join(map(str, row)) for row in bits.tolist())
    return dict(rows)


def _indices_to_bits(idx: np.ndarray, k: int) -> np.ndarray:
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# error sampling shared by trajectories and frames


def _op_error_prob(op: GateOp, noise: NoiseProfile) -> float:
    if not op.is_unitary:
        return 0.0
    if len(op.qubits) == 2:
        return noise.p2_for(*op.qubits)
    return noise.p1_for(op.qubits[0])


def _sample_events(probs: np.ndarray, arity: np.ndarray, shots: int, rng: np.random.Generator):
    """Independent error events for every (location, shot) cell.

    Returns (location, shot, pauli) arrays sorted by location then shot; the
    Pauli index is uniform over the non-identity Paulis on the support.
    """
    locs, hits = [], []
    for p in np.unique(probs[probs > 0]):
        where = np.flatnonzero(probs == p)
        cells = where.size * shots
        k = int(rng.binomial(cells, min(p, 1.0)))
        if k == 0:
            continue
        picked = rng.choice(cells, size=k, replace=False)
        locs.append(where[picked // shots])
        hits.append(picked % shots)
    if not locs:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    loc = np.concatenate(locs)
    shot = np.concatenate(hits)
    order = np.lexsort((shot, loc))
    loc, shot = loc[order], shot[order]
    npaulis = np.where(arity[loc] == 2, 15, 3)
    pauli = (rng.random(loc.size) * npaulis).astype(np.int64) + 1
    return loc, shot, pauli


# ---------------------------------------------------------------------------
# blocks


@dataclass
class _Block:
    qubits: list[int]  # circuit qubits, ascending
    ops: list[GateOp]


def _blocks(circuit: Circuit) -> list[_Block]:
    parent = list(range(circuit.num_qubits))

    def find(q: int) -> int:
        while parent[q] != q:
            parent[q] = parent[parent[q]]
            q = parent[q]
        return q

    for op in circuit.ops:
        if op.name == "barrier" or len(op.qubits) < 2:
            continue
        ra, rb = find(op.qubits[0]), find(op.qubits[1])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for q in range(circuit.num_qubits):
        groups.setdefault(find(q), []).append(q)
    ops_by_root: dict[int, list[GateOp]] = {r: [] for r in groups}
    for op in circuit.ops:
        if op.name == "barrier":
            continue
        ops_by_root[find(op.qubits[0])].append(op)
    return [_Block(groups[r], ops_by_root[r]) for r in sorted(groups)]


def _check_terminal_measurements(circuit: Circuit) -> None:
    measured: set[int] = set()
    for op in circuit.ops:
        if op.name == "measure":
            measured.add(op.qubits[0])
        elif op.name != "barrier" and measured.intersection(op.qubits):
            raise SimulationError("only terminal measurements are supported")


# ---------------------------------------------------------------------------
# stabilizer backend


def _stabilizer_bits(n: int, ops: Sequence[GateOp], noise: NoiseProfile, shots: int, rng, with_reference: bool = False):
    codes, q0s, q1s, carriers, carrier_p, carrier_arity = [], [], [], [], [], []
    # circuits repeat the same few hundred ops many times
    expanded: dict[GateOp, tuple] = {}
    for op in ops:
        if op.name in ("measure", "barrier"):
            continue
        entry = expanded.get(op)
        if entry is None:
            word = clifford_word(op)
            qs = op.qubits
            entry = expanded[op] = (
                [OPCODES[name] for name, _ in word],
                [w[0] for _, w in word],
                [w[1] if len(w) > 1 else -1 for _, w in word],
                _op_error_prob(op, noise),
                len(qs),
                qs[0],
                qs[1] if len(qs) > 1 else -1,
            )
        w_codes, w_q0, w_q1, p, arity, a, b = entry
        codes.extend(w_codes)
        q0s.extend(w_q0)
        q1s.extend(w_q1)
        if p > 0:
            carriers.append(len(codes))
            carrier_p.append(p)
            carrier_arity.append(arity)
            codes.append(OPCODES["id"])
            q0s.append(a)
            q1s.append(b)
    codes_a = np.asarray(codes, dtype=np.int64)
    q0_a = np.asarray(q0s, dtype=np.int64)
    q1_a = np.asarray(q1s, dtype=np.int64)

    # noiseless reference sample from the tableau
    x = np.zeros((2 * n + 1, n), dtype=np.uint8)
    z = np.zeros((2 * n + 1, n), dtype=np.uint8)
    x[np.arange(n), np.arange(n)] = 1
    z[n + np.arange(n), np.arange(n)] = 1
    r = np.zeros(2 * n + 1, dtype=np.uint8)
    coins = rng.integers(0, 2, size=n).astype(np.uint8)
    reference = tableau_run(x, z, r, codes_a, q0_a, q1_a, np.arange(n, dtype=np.int64), coins)

    # Pauli frames; random initial Z frames randomize non-deterministic outcomes
    xs = np.zeros((n, shots), dtype=np.uint8)
    zs = rng.integers(0, 2, size=(n, shots)).astype(np.uint8)
    loc, shot, pauli = _sample_events(
        np.asarray(carrier_p, dtype=float), np.asarray(carrier_arity, dtype=np.int64), shots, rng
    )
    carriers_a = np.asarray(carriers, dtype=np.int64)
    op_of_event = carriers_a[loc] if loc.size else loc
    ptr = np.zeros(codes_a.size + 1, dtype=np.int64)
    np.add.at(ptr, op_of_event + 1, 1)
    ptr = np.cumsum(ptr)
    propagate_frames(xs, zs, codes_a, q0_a, q1_a, ptr, shot.astype(np.int64), pauli.astype(np.int64))
    bits = (reference[:, None] ^ xs).T.copy()
    return (bits, reference) if with_reference else bits


# ---------------------------------------------------------------------------
# density-matrix backend


def _dm_apply(rho: np.ndarray, u: np.ndarray, qs: Sequence[int], k: int) -> None:
    uc = np.conj(u)
    if len(qs) == 1:
        apply_1q(rho, u, qs[0], 2 * k)
        apply_1q(rho, uc, qs[0] + k, 2 * k)
    else:
        apply_2q(rho, u, qs[0], qs[1], 2 * k)
        apply_2q(rho, uc, qs[0] + k, qs[1] + k, 2 * k)


def _dm_depolarize(rho: np.ndarray, qs: Sequence[int], p: float, k: int) -> np.ndarray:
    m = len(qs)
    dim = 1 << m
    axes = list(qs) + [q + k for q in qs]
    front = np.moveaxis(rho.reshape((2,) * (2 * k)), axes, list(range(2 * m)))
    shape = front.shape
    flat = front.reshape(dim, dim, -1)
    # the uniform Pauli twirl of the support is Tr_support(rho) (x) I / dim
    reduced = np.einsum("iir->r", flat)
    twirled = np.eye(dim)[:, :, None] * reduced[None, None, :] / dim
    d2 = dim * dim
    mixed = (1 - p - p / (d2 - 1)) * flat + (p * d2 / (d2 - 1)) * twirled
    back = np.moveaxis(mixed.reshape(shape), list(range(2 * m)), axes)
    return np.ascontiguousarray(back).reshape(-1)


def _dm_reset(rho: np.ndarray, q: int, k: int) -> np.ndarray:
    t = rho.reshape((2,) * (2 * k)).copy()
    idx0 = [slice(None)] * (2 * k)
    new = np.zeros_like(t)
    # |0><0| rho |0><0| + |0><1| rho |1><0|
    for bit in (0, 1):
        src = list(idx0)
        src[q] = bit
        src[q + k] = bit
        dst = list(idx0)
        dst[q] = 0
        dst[q + k] = 0
        new[tuple(dst)] += t[tuple(src)]
    return new.reshape(-1)


def _density_probs(k: int, ops: Sequence[GateOp], local: dict[int, int], noise: NoiseProfile) -> np.ndarray:
    rho = np.zeros(1 << (2 * k), dtype=np.complex128)
    rho[0] = 1.0
    for op in ops:
        if op.name == "measure":
            continue
        qs = tuple(local[q] for q in op.qubits)
        if op.name == "reset":
            rho = _dm_reset(rho, qs[0], k)
            continue
        _dm_apply(rho, op_matrix(op), qs, k)
        p = _op_error_prob(op, noise)
        if p > 0:
            rho = _dm_depolarize(rho, qs, p, k)
    diag = rho.reshape(1 << k, 1 << k).diagonal().real
    diag = np.clip(diag, 0.0, None)
    return diag / diag.sum()


# ---------------------------------------------------------------------------
# statevector trajectories


def _trajectory_bits(k, ops, local, noise, shots, rng) -> np.ndarray:
    gate_ops = [op for op in ops if op.is_unitary]
    if any(op.name == "reset" for op in ops):
        raise SimulationError(f"reset on noisy blocks above {MAX_DENSITY_QUBITS} qubits is not supported")
    probs = np.array([_op_error_prob(op, noise) for op in gate_ops])
    arity = np.array([len(op.qubits) for op in gate_ops], dtype=np.int64)
    loc, shot, pauli = _sample_events(probs, arity, shots, rng)
    patterns: dict[int, list[tuple[int, int]]] = {}
    for l_, s_, p_ in zip(loc.tolist(), shot.tolist(), pauli.tolist()):
        patterns.setdefault(s_, []).append((l_, p_))
    groups: dict[tuple, list[int]] = {}
    for s_ in range(shots):
        groups.setdefault(tuple(patterns.get(s_, ())), []).append(s_)
    out = np.zeros((shots, k), dtype=np.uint8)
    g = len(gate_ops)
    mats = np.zeros((g, 4, 4), dtype=np.complex128)
    q0s = np.zeros(g, dtype=np.int64)
    q1s = np.full(g, -1, dtype=np.int64)
    for i, op in enumerate(gate_ops):
        u = op_matrix(op)
        mats[i, : u.shape[0], : u.shape[1]] = u
        q0s[i] = local[op.qubits[0]]
        if len(op.qubits) == 2:
            q1s[i] = local[op.qubits[1]]
    base = np.zeros(1 << k, dtype=np.complex128)
    base[0] = 1.0
    base_pos = 0  # number of gate ops already applied to ``base``
    for pattern in sorted(groups, key=lambda pt: pt[0][0] if pt else g):
        first = pattern[0][0] if pattern else g
        if base_pos < first:
            run_gates(base, mats, q0s, q1s, base_pos, first, k)
            base_pos = first
        psi = base.copy()
        err_pos = np.array([e[0] for e in pattern], dtype=np.int64)
        err_pauli = np.array([e[1] for e in pattern], dtype=np.int64)
        run_gates(psi, mats, q0s, q1s, first, g, k, err_pos, err_pauli)
        p = np.abs(psi) ** 2
        p /= p.sum()
        members = groups[pattern]
        idx = rng.choice(p.size, size=len(members), p=p)
        out[members] = _indices_to_bits(idx, k)
    return out


# ---------------------------------------------------------------------------
# public entry points


def sample_bits(
    circuit: Circuit,
    shots: int,
    noise: NoiseProfile | None = None,
    seed=None,
    method: str = "auto",
) -> tuple[np.ndarray, list[int]]:
    """Sample measurement outcomes.

    Returns a (shots, m) uint8 array over the measured qubits (all qubits if
    the circuit has no measure ops) in ascending qubit order, and that order.
    ``method`` forces "stabilizer", "statevector" or "density" for the whole
    circuit; "auto" picks per block.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    noise = noise or NOISELESS
    rng = as_rng(seed)
    _check_terminal_measurements(circuit)
    measured = circuit.measured_qubits() or list(range(circuit.num_qubits))
    n = circuit.num_qubits
    full = np.zeros((shots, n), dtype=np.uint8)

    if method in ("stabilizer", "auto") and is_clifford_circuit(circuit.ops):
        full[:] = _stabilizer_bits(n, circuit.ops, noise, shots, rng)
    elif method == "stabilizer":
        raise SimulationError("stabilizer backend needs a Clifford circuit")
    elif method in ("statevector", "density"):
        blocks = [_Block(list(range(n)), [op for op in circuit.ops if op.name != "barrier"])]
        _run_blocks(blocks, full, noise, shots, rng, method)
    elif method == "auto":
        _run_blocks(_blocks(circuit), full, noise, shots, rng, "auto")
    else:
        raise ValueError(f"unknown method {method!r}")

    flips = np.array([noise.readout_for(q) for q in range(n)])
    if flips.any():
        full ^= (rng.random((shots, n)) < flips).astype(np.uint8)
    return full[:, measured], measured


def sample_bits_with_reference(
    circuit: Circuit,
    shots: int,
    noise: NoiseProfile | None = None,
    seed=None,
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Stabilizer sampling that also returns one noiseless reference outcome.

    The reference is what a noiseless run would give; for circuits with a
    deterministic ideal outcome it is that outcome. Readout error is applied
    to the noisy shots only. Returns (bits, reference, measured qubits).
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    noise = noise or NOISELESS
    rng = as_rng(seed)
    _check_terminal_measurements(circuit)
    if not is_clifford_circuit(circuit.ops):
        raise SimulationError("stabilizer backend needs a Clifford circuit")
    measured = circuit.measured_qubits() or list(range(circuit.num_qubits))
    n = circuit.num_qubits
    full, reference = _stabilizer_bits(n, circuit.ops, noise, shots, rng, with_reference=True)
    flips = np.array([noise.readout_for(q) for q in range(n)])
    if flips.any():
        full ^= (rng.random((shots, n)) < flips).astype(np.uint8)
    return full[:, measured], reference[measured].astype(np.uint8), measured


def _run_blocks(blocks, full, noise, shots, rng, method) -> None:
    for block in blocks:
        k = len(block.qubits)
        local = {q: i for i, q in enumerate(block.qubits)}
        if not any(op.is_unitary or op.name == "reset" for op in block.ops):
            continue  # idle qubits stay in |0>
        has_reset = any(op.name == "reset" for op in block.ops)
        noisy = any(_op_error_prob(op, noise) > 0 for op in block.ops)
        if method == "auto" and not has_reset and is_clifford_circuit(block.ops):
            remapped = [GateOp(op.name, tuple(local[q] for q in op.qubits), op.params) for op in block.ops]
            sub_noise = _localize_noise(noise, block.qubits)
            full[:, block.qubits] = _stabilizer_bits(k, remapped, sub_noise, shots, rng)
            continue
        use_density = method == "density" or (method == "auto" and (noisy or has_reset) and (k <= AUTO_DENSITY_QUBITS or has_reset))
        if use_density:
            if k > MAX_DENSITY_QUBITS:
                raise SimulationError(f"density backend is capped at {MAX_DENSITY_QUBITS} qubits")
            p = _density_probs(k, block.ops, local, noise)
            idx = rng.choice(p.size, size=shots, p=p)
            full[:, block.qubits] = _indices_to_bits(idx, k)
            continue
        if k > MAX_STATEVECTOR_QUBITS:
            raise SimulationError(
                f"non-Clifford block of {k} qubits exceeds the {MAX_STATEVECTOR_QUBITS}-qubit statevector cap"
            )
        if noisy:
            full[:, block.qubits] = _trajectory_bits(k, block.ops, local, noise, shots, rng)
            continue
        psi = np.zeros(1 << k, dtype=np.complex128)
        psi[0] = 1.0
        for op in block.ops:
            if op.is_unitary:
                _apply_unitary(psi, op, k, local)
            elif op.name == "reset":
                raise SimulationError("reset needs the density backend")
        p = np.abs(psi) ** 2
        p /= p.sum()
        idx = rng.choice(p.size, size=shots, p=p)
        full[:, block.qubits] = _indices_to_bits(idx, k)


def _localize_noise(noise: NoiseProfile, qubits: list[int]) -> NoiseProfile:
    if not noise.overrides:
        return noise
    local = {q: i for i, q in enumerate(qubits)}
    qov = {str(local[int(q)]): v for q, v in noise.overrides.get("qubits", {}).items() if int(q) in local}
    eov = {}
    for key, v in noise.overrides.get("edges", {}).items():
        a, b = (int(t) for t in key.split("-"))
        if a in local and b in local:
            la, lb = local[a], local[b]
            eov[f"{min(la, lb)}-{max(la, lb)}"] = v
    return NoiseProfile(noise.p1, noise.p2, noise.readout_eps, {"qubits": qov, "edges": eov})


def sample_counts(
    circuit: Circuit,
    shots: int,
    noise: NoiseProfile | None = None,
    seed=None,
    method: str = "auto",
) -> dict[str, int]:
    """Counts keyed by bitstrings over the measured qubits (qubit 0 leftmost)."""
    bits, _ = sample_bits(circuit, shots, noise, seed, method)
    return counts_from_bits(bits)


def exact_probabilities(circuit: Circuit, noise: NoiseProfile | None = None) -> dict[str, float]:
    """Noisy outcome distribution over measured qubits, exact for small circuits."""
    noise = noise or NOISELESS
    n = circuit.num_qubits
    measured = circuit.measured_qubits() or list(range(n))
    if noise.is_noiseless and not any(op.name == "reset" for op in circuit.ops):
        p = probabilities(circuit)
    else:
        if n > MAX_DENSITY_QUBITS:
            raise SimulationError("exact noisy probabilities are limited to the density backend")
        p = _density_probs(n, [op for op in circuit.ops if op.name != "barrier"], {q: q for q in range(n)}, noise)
    p = p.reshape((2,) * n)
    # readout flips act independently per qubit
    for q in range(n):
        eps = noise.readout_for(q)
        if eps:
            p = (1 - eps) * p + eps * np.flip(p, axis=q)
    unmeasured = tuple(q for q in range(n) if q not in measured)
    if unmeasured:
        p = p.sum(axis=unmeasured)
    flat = p.reshape(-1)
    m = len(measured)
    return {format(i, f"0{m}b"): float(v) for i, v in enumerate(flat) if v > 1e-15}
