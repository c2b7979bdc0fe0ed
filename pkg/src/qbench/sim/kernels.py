"""Hot inner loops, each with a numba loop version and a numpy version.

Statevector indices put qubit 0 in the most significant bit. Pauli-frame
and tableau kernels share an integer opcode table (``OPCODES``).
"""

from __future__ import annotations

import numpy as np

from .._accel import njit, numba_active

# ---------------------------------------------------------------------------
# statevector gate application


@njit
def _apply_1q_loop(psi, u, q, n):
    stride = 1 << (n - 1 - q)
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for i in range(psi.shape[0]):
        if i & stride:
            continue
        j = i | stride
        a = psi[i]
        b = psi[j]
        psi[i] = u00 * a + u01 * b
        psi[j] = u10 * a + u11 * b


def _apply_1q_numpy(psi, u, q, n):
    view = psi.reshape(1 << q, 2, 1 << (n - 1 - q))
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = u[0, 0] * a + u[0, 1] * b
    view[:, 1, :] = u[1, 0] * a + u[1, 1] * b


@njit
def _apply_2q_loop(psi, u, q0, q1, n):
    s0 = 1 << (n - 1 - q0)
    s1 = 1 << (n - 1 - q1)
    amps = np.empty(4, dtype=psi.dtype)
    for i in range(psi.shape[0]):
        if i & s0 or i & s1:
            continue
        idx = (i, i | s1, i | s0, i | s0 | s1)
        for k in range(4):
            amps[k] = psi[idx[k]]
        for r in range(4):
            acc = 0j
            for c in range(4):
                acc += u[r, c] * amps[c]
            psi[idx[r]] = acc


def _apply_2q_numpy(psi, u, q0, q1, n):
    tensor = psi.reshape((2,) * n)
    moved = np.tensordot(u.reshape(2, 2, 2, 2), tensor, axes=([2, 3], [q0, q1]))
    psi[:] = np.moveaxis(moved, (0, 1), (q0, q1)).reshape(-1)


def apply_1q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> None:
    """Apply a 2x2 unitary to qubit ``q`` of ``psi`` in place."""
    if numba_active():
        _apply_1q_loop(psi, np.ascontiguousarray(u, dtype=np.complex128), q, n)
    else:
        _apply_1q_numpy(psi, u, q, n)


def apply_2q(psi: np.ndarray, u: np.ndarray, q0: int, q1: int, n: int) -> None:
    """Apply a 4x4 unitary to qubits (q0, q1) in place; q0 is the high bit of ``u``."""
    if numba_active():
        _apply_2q_loop(psi, np.ascontiguousarray(u, dtype=np.complex128), q0, q1, n)
    else:
        _apply_2q_numpy(psi, u, q0, q1, n)


_PAULIS = np.array(
    [[[1, 0], [0, 1]], [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
    dtype=np.complex128,
)


@njit
def _run_gates_loop(psi, mats, q0s, q1s, start, stop, n, err_pos, err_pauli, paulis):
    e = 0
    while e < err_pos.shape[0] and err_pos[e] < start:
        e += 1
    for i in range(start, stop):
        if q1s[i] < 0:
            _apply_1q_loop(psi, mats[i, :2, :2], q0s[i], n)
        else:
            _apply_2q_loop(psi, mats[i], q0s[i], q1s[i], n)
        while e < err_pos.shape[0] and err_pos[e] == i:
            idx = err_pauli[e]
            if idx & 3:
                _apply_1q_loop(psi, paulis[idx & 3], q0s[i], n)
            if q1s[i] >= 0 and (idx >> 2) & 3:
                _apply_1q_loop(psi, paulis[(idx >> 2) & 3], q1s[i], n)
            e += 1


def _run_gates_numpy(psi, mats, q0s, q1s, start, stop, n, err_pos, err_pauli, paulis):
    errors = {}
    for pos, idx in zip(err_pos.tolist(), err_pauli.tolist()):
        errors.setdefault(pos, []).append(idx)
    for i in range(start, stop):
        if q1s[i] < 0:
            _apply_1q_numpy(psi, mats[i, :2, :2], q0s[i], n)
        else:
            _apply_2q_numpy(psi, mats[i], q0s[i], q1s[i], n)
        for idx in errors.get(i, ()):
            if idx & 3:
                _apply_1q_numpy(psi, paulis[idx & 3], q0s[i], n)
            if q1s[i] >= 0 and (idx >> 2) & 3:
                _apply_1q_numpy(psi, paulis[(idx >> 2) & 3], q1s[i], n)


def run_gates(psi, mats, q0s, q1s, start, stop, n, err_pos=None, err_pauli=None) -> None:
    """Apply gates ``start..stop-1`` of a packed gate list to ``psi`` in place.

    ``mats`` is (G, 4, 4) with one-qubit matrices in the top-left 2x2 block
    and ``q1s[i] = -1`` marking one-qubit gates. A Pauli error ``err_pauli[e]``
    (two bits per qubit, I X Y Z = 0..3, first qubit lowest) follows gate
    ``err_pos[e]``; ``err_pos`` must be sorted.
    """
    if err_pos is None:
        err_pos = np.zeros(0, dtype=np.int64)
        err_pauli = np.zeros(0, dtype=np.int64)
    kernel = _run_gates_loop if numba_active() else _run_gates_numpy
    kernel(psi, mats, q0s, q1s, start, stop, n, err_pos, err_pauli, _PAULIS)


# ---------------------------------------------------------------------------
# Clifford opcodes shared by the frame simulator and the tableau

OPCODES = {"id": 0, "h": 1, "s": 2, "sdg": 3, "x": 4, "y": 5, "z": 6, "cx": 7, "cz": 8, "swap": 9}


@njit
def _frames_loop(xs, zs, codes, q0s, q1s, ev_ptr, ev_shot, ev_pauli):
    # xs, zs: (num_qubits, shots) uint8 frames; events after op k live in
    # ev_*[ev_ptr[k]:ev_ptr[k + 1]] with a Pauli index over the op's support
    shots = xs.shape[1]
    for k in range(codes.shape[0]):
        code = codes[k]
        a = q0s[k]
        b = q1s[k]
        if code == 1:
            for t in range(shots):
                tmp = xs[a, t]
                xs[a, t] = zs[a, t]
                zs[a, t] = tmp
        elif code == 2 or code == 3:
            for t in range(shots):
                zs[a, t] ^= xs[a, t]
        elif code == 7:
            for t in range(shots):
                xs[b, t] ^= xs[a, t]
                zs[a, t] ^= zs[b, t]
        elif code == 8:
            for t in range(shots):
                zs[a, t] ^= xs[b, t]
                zs[b, t] ^= xs[a, t]
        elif code == 9:
            for t in range(shots):
                tmp = xs[a, t]
                xs[a, t] = xs[b, t]
                xs[b, t] = tmp
                tmp = zs[a, t]
                zs[a, t] = zs[b, t]
                zs[b, t] = tmp
        for e in range(ev_ptr[k], ev_ptr[k + 1]):
            t = ev_shot[e]
            p = ev_pauli[e]
            # Pauli index: 2 bits per qubit, (x, z) with I=0, X=1, Y=2, Z=3
            pa = p & 3
            xs[a, t] ^= np.uint8(pa == 1 or pa == 2)
            zs[a, t] ^= np.uint8(pa == 2 or pa == 3)
            if b >= 0:
                pb = p >> 2
                xs[b, t] ^= np.uint8(pb == 1 or pb == 2)
                zs[b, t] ^= np.uint8(pb == 2 or pb == 3)


_PX = np.array([0, 1, 1, 0], dtype=np.uint8)
_PZ = np.array([0, 0, 1, 1], dtype=np.uint8)


def _frames_numpy(xs, zs, codes, q0s, q1s, ev_ptr, ev_shot, ev_pauli):
    for k in range(codes.shape[0]):
        code, a, b = codes[k], q0s[k], q1s[k]
        if code == 1:
            xs[a], zs[a] = zs[a].copy(), xs[a].copy()
        elif code in (2, 3):
            zs[a] ^= xs[a]
        elif code == 7:
            xs[b] ^= xs[a]
            zs[a] ^= zs[b]
        elif code == 8:
            zs[a] ^= xs[b]
            zs[b] ^= xs[a]
        elif code == 9:
            xs[[a, b]] = xs[[b, a]]
            zs[[a, b]] = zs[[b, a]]
        lo, hi = ev_ptr[k], ev_ptr[k + 1]
        if lo == hi:
            continue
        shots = ev_shot[lo:hi]
        paulis = ev_pauli[lo:hi]
        # shots within one op are distinct, so fancy-index xor is safe
        xs[a, shots] ^= _PX[paulis & 3]
        zs[a, shots] ^= _PZ[paulis & 3]
        if b >= 0:
            xs[b, shots] ^= _PX[paulis >> 2]
            zs[b, shots] ^= _PZ[paulis >> 2]


def propagate_frames(xs, zs, codes, q0s, q1s, ev_ptr, ev_shot, ev_pauli) -> None:
    if numba_active():
        _frames_loop(xs, zs, codes, q0s, q1s, ev_ptr, ev_shot, ev_pauli)
    else:
        _frames_numpy(xs, zs, codes, q0s, q1s, ev_ptr, ev_shot, ev_pauli)


# ---------------------------------------------------------------------------
# CHP stabilizer tableau
#
# Rows 0..n-1 are destabilizers, n..2n-1 stabilizers; row 2n is scratch.
# x, z are uint8 (2n+1, n) arrays and r is a uint8 (2n+1,) phase vector.


@njit
def _g(x1, z1, x2, z2):
    # exponent of i picked up when multiplying Pauli (x1,z1) into (x2,z2);
    # signed ints, since unsigned differences wrap (and promote to float in numba)
    x2 = np.int64(x2)
    z2 = np.int64(z2)
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1 and z1 == 0:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@njit
def _rowsum(x, z, r, h, i, n):
    total = 2 * np.int64(r[h]) + 2 * np.int64(r[i])
    for j in range(n):
        total += _g(x[i, j], z[i, j], x[h, j], z[h, j])
    r[h] = 0 if total % 4 == 0 else 1
    for j in range(n):
        x[h, j] ^= x[i, j]
        z[h, j] ^= z[i, j]


@njit
def _tableau_gate(x, z, r, code, a, b):
    rows = x.shape[0]
    if code == 1:
        for i in range(rows):
            r[i] ^= x[i, a] & z[i, a]
            tmp = x[i, a]
            x[i, a] = z[i, a]
            z[i, a] = tmp
    elif code == 2:
        for i in range(rows):
            r[i] ^= x[i, a] & z[i, a]
            z[i, a] ^= x[i, a]
    elif code == 3:
        for i in range(rows):
            z[i, a] ^= x[i, a]
            r[i] ^= x[i, a] & z[i, a]
    elif code == 4:
        for i in range(rows):
            r[i] ^= z[i, a]
    elif code == 5:
        for i in range(rows):
            r[i] ^= x[i, a] ^ z[i, a]
    elif code == 6:
        for i in range(rows):
            r[i] ^= x[i, a]
    elif code == 7:
        for i in range(rows):
            r[i] ^= x[i, a] & z[i, b] & (x[i, b] ^ z[i, a] ^ 1)
            x[i, b] ^= x[i, a]
            z[i, a] ^= z[i, b]
    elif code == 8:
        for i in range(rows):
            # cz = h(b) cx h(b), folded into one update
            r[i] ^= x[i, a] & x[i, b] & (z[i, a] ^ z[i, b])
            z[i, a] ^= x[i, b]
            z[i, b] ^= x[i, a]
    elif code == 9:
        for i in range(rows):
            tmp = x[i, a]
            x[i, a] = x[i, b]
            x[i, b] = tmp
            tmp = z[i, a]
            z[i, a] = z[i, b]
            z[i, b] = tmp


@njit
def _tableau_measure(x, z, r, a, n, coin):
    p = -1
    for i in range(n, 2 * n):
        if x[i, a]:
            p = i
            break
    if p >= 0:
        for i in range(2 * n):
            if i != p and x[i, a]:
                _rowsum(x, z, r, i, p, n)
        for j in range(n):
            x[p - n, j] = x[p, j]
            z[p - n, j] = z[p, j]
            x[p, j] = 0
            z[p, j] = 0
        r[p - n] = r[p]
        z[p, a] = 1
        r[p] = coin
        return coin
    scratch = 2 * n
    for j in range(n):
        x[scratch, j] = 0
        z[scratch, j] = 0
    r[scratch] = 0
    for i in range(n):
        if x[i, a]:
            _rowsum(x, z, r, scratch, i + n, n)
    return r[scratch]


@njit
def _tableau_run_loop(x, z, r, codes, q0s, q1s, measure_qubits, coins):
    n = x.shape[1]
    for k in range(codes.shape[0]):
        _tableau_gate(x, z, r, codes[k], q0s[k], q1s[k])
    out = np.zeros(measure_qubits.shape[0], dtype=np.uint8)
    for m in range(measure_qubits.shape[0]):
        out[m] = _tableau_measure(x, z, r, measure_qubits[m], n, coins[m])
    return out


def _g_numpy(x1, z1, x2, z2):
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    return np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1), np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)),
    )


def _rowsum_numpy(x, z, r, h, i):
    total = 2 * int(r[h]) + 2 * int(r[i]) + int(_g_numpy(x[i], z[i], x[h], z[h]).sum())
    r[h] = 0 if total % 4 == 0 else 1
    x[h] ^= x[i]
    z[h] ^= z[i]


def _tableau_gate_numpy(x, z, r, code, a, b):
    if code == 1:
        r ^= x[:, a] & z[:, a]
        x[:, a], z[:, a] = z[:, a].copy(), x[:, a].copy()
    elif code == 2:
        r ^= x[:, a] & z[:, a]
        z[:, a] ^= x[:, a]
    elif code == 3:
        z[:, a] ^= x[:, a]
        r ^= x[:, a] & z[:, a]
    elif code == 4:
        r ^= z[:, a]
    elif code == 5:
        r ^= x[:, a] ^ z[:, a]
    elif code == 6:
        r ^= x[:, a]
    elif code == 7:
        r ^= x[:, a] & z[:, b] & (x[:, b] ^ z[:, a] ^ 1)
        x[:, b] ^= x[:, a]
        z[:, a] ^= z[:, b]
    elif code == 8:
        r ^= x[:, a] & x[:, b] & (z[:, a] ^ z[:, b])
        z[:, a] ^= x[:, b]
        z[:, b] ^= x[:, a]
    elif code == 9:
        x[:, [a, b]] = x[:, [b, a]]
        z[:, [a, b]] = z[:, [b, a]]


def _tableau_measure_numpy(x, z, r, a, n, coin):
    hits = np.flatnonzero(x[n : 2 * n, a])
    if hits.size:
        p = n + int(hits[0])
        for i in np.flatnonzero(x[: 2 * n, a]):
            if i != p:
                _rowsum_numpy(x, z, r, int(i), p)
        x[p - n], z[p - n], r[p - n] = x[p], z[p], r[p]
        x[p] = 0
        z[p] = 0
        z[p, a] = 1
        r[p] = coin
        return coin
    s = 2 * n
    x[s] = 0
    z[s] = 0
    r[s] = 0
    for i in np.flatnonzero(x[:n, a]):
        _rowsum_numpy(x, z, r, s, int(i) + n)
    return int(r[s])


def _tableau_run_numpy(x, z, r, codes, q0s, q1s, measure_qubits, coins):
    n = x.shape[1]
    for k in range(codes.shape[0]):
        _tableau_gate_numpy(x, z, r, int(codes[k]), int(q0s[k]), int(q1s[k]))
    out = np.zeros(measure_qubits.shape[0], dtype=np.uint8)
    for m in range(measure_qubits.shape[0]):
        out[m] = _tableau_measure_numpy(x, z, r, int(measure_qubits[m]), n, int(coins[m]))
    return out


def tableau_run(x, z, r, codes, q0s, q1s, measure_qubits, coins) -> np.ndarray:
    """Apply Clifford opcodes to a tableau then measure in the Z basis.

    ``coins`` supplies the outcome used whenever a measurement is random.
    """
    if numba_active():
        return _tableau_run_loop(x, z, r, codes, q0s, q1s, measure_qubits, coins)
    return _tableau_run_numpy(x, z, r, codes, q0s, q1s, measure_qubits, coins)
