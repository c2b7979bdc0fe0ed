"""Weighted MaxCut instances, exhaustive search and simulated annealing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .._accel import njit, numba_active

WEIGHT_SET = (0.1, 0.2, 0.3, 0.5, 1.0)
BRUTE_FORCE_LIMIT = 20


@dataclass
class MaxCutInstance:
    num_nodes: int
    edges: list[tuple[int, int]]
    weights: np.ndarray
    optimal_bitstring: np.ndarray
    optimal_value: float

    def cut_values(self, bits: np.ndarray) -> np.ndarray:
        return cut_values(bits, self.edges, self.weights)

    def to_dict(self) -> dict:
        return {
            "num_nodes": self.num_nodes,
            "edges": [list(e) for e in self.edges],
            "weights": [float(w) for w in self.weights],
            "optimal_bitstring": "".join(str(int(b)) for b in self.optimal_bitstring),
            "optimal_value": self.optimal_value,
        }


def cut_values(bits: np.ndarray, edges: Sequence[tuple[int, int]], weights: np.ndarray) -> np.ndarray:
    """Cut value of each row of a (shots, n) 0/1 array."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    if not edges:
        return np.zeros(bits.shape[0])
    e = np.asarray(edges)
    differ = bits[:, e[:, 0]] ^ bits[:, e[:, 1]]
    return differ @ np.asarray(weights, dtype=float)


def random_weights(num_edges: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(np.array(WEIGHT_SET), size=num_edges)


def brute_force_maxcut(num_nodes: int, edges, weights) -> tuple[np.ndarray, float]:
    """Exhaustive optimum; node 0 is pinned to 0 (cuts are symmetric under complement)."""
    if num_nodes > BRUTE_FORCE_LIMIT + 4:
        raise ValueError("too many nodes for exhaustive search")
    if num_nodes == 1:
        return np.zeros(1, dtype=np.uint8), 0.0
    free = num_nodes - 1
    best_val, best_bits = -1.0, None
    chunk = 1 << min(free, 16)
    for start in range(0, 1 << free, chunk):
        idx = np.arange(start, min(start + chunk, 1 << free), dtype=np.int64)
        bits = np.zeros((idx.size, num_nodes), dtype=np.uint8)
        bits[:, 1:] = (idx[:, None] >> np.arange(free - 1, -1, -1)) & 1
        vals = cut_values(bits, edges, weights)
        k = int(np.argmax(vals))
        if vals[k] > best_val + 1e-12:
            best_val, best_bits = float(vals[k]), bits[k].copy()
    return best_bits, best_val


@njit
def _anneal_numba(nbr_ptr, nbr_idx, nbr_w, spins, temps, uniforms):
    restarts, n = spins.shape
    best = spins.copy()
    best_val = np.zeros(restarts)
    for r in range(restarts):
        s = spins[r]
        # cut value = sum over edges of w * [s_i != s_j]; delta when flipping i
        cur = 0.0
        for i in range(n):
            for k in range(nbr_ptr[i], nbr_ptr[i + 1]):
                j = nbr_idx[k]
                if j > i and s[i] != s[j]:
                    cur += nbr_w[k]
        best_val[r] = cur
        u = 0
        for t in range(temps.shape[0]):
            temp = temps[t]
            for i in range(n):
                delta = 0.0
                for k in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    j = nbr_idx[k]
                    if s[i] == s[j]:
                        delta += nbr_w[k]
                    else:
                        delta -= nbr_w[k]
                if delta >= 0.0 or uniforms[r, u] < np.exp(delta / temp):
                    s[i] ^= 1
                    cur += delta
                    if cur > best_val[r] + 1e-12:
                        best_val[r] = cur
                        best[r] = s
                u += 1
    return best, best_val


def _anneal_numpy(nbr_ptr, nbr_idx, nbr_w, spins, temps, uniforms):
    # vectorized across restarts; the sweep over nodes stays sequential
    restarts, n = spins.shape
    s = spins.copy()
    owners = np.repeat(np.arange(n), np.diff(nbr_ptr))
    upper = nbr_idx > owners
    cur = ((s[:, owners[upper]] != s[:, nbr_idx[upper]]) * nbr_w[upper]).sum(axis=1)
    best, best_val = s.copy(), cur.copy()
    u = 0
    for temp in temps:
        for i in range(n):
            sl = slice(nbr_ptr[i], nbr_ptr[i + 1])
            same = s[:, nbr_idx[sl]] == s[:, [i]]
            delta = np.where(same, nbr_w[sl], -nbr_w[sl]).sum(axis=1)
            accept = (delta >= 0.0) | (uniforms[:, u] < np.exp(np.minimum(delta, 0.0) / temp))
            s[accept, i] ^= 1
            cur = cur + np.where(accept, delta, 0.0)
            improved = cur > best_val + 1e-12
            best[improved] = s[improved]
            best_val = np.where(improved, cur, best_val)
            u += 1
    return best, best_val


def solve_maxcut_annealing(
    num_nodes: int,
    edges,
    weights,
    seed=None,
    restarts: int = 32,
    sweeps: int = 400,
    t_start: float = 2.0,
    t_end: float = 0.01,
) -> tuple[np.ndarray, float]:
    """Single-flip Metropolis annealing on a geometric schedule, best over restarts."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(num_nodes)]
    for (a, b), w in zip(edges, weights):
        adj[a].append((b, float(w)))
        adj[b].append((a, float(w)))
    nbr_ptr = np.zeros(num_nodes + 1, dtype=np.int64)
    nbr_ptr[1:] = np.cumsum([len(x) for x in adj])
    nbr_idx = np.array([j for x in adj for j, _ in x], dtype=np.int64)
    nbr_w = np.array([w for x in adj for _, w in x], dtype=float)
    spins = rng.integers(0, 2, size=(restarts, num_nodes)).astype(np.uint8)
    temps = np.geomspace(t_start, t_end, sweeps)
    uniforms = rng.random((restarts, sweeps * num_nodes))
    kernel = _anneal_numba if numba_active() else _anneal_numpy
    best, best_val = kernel(nbr_ptr, nbr_idx, nbr_w, spins, temps, uniforms)
    k = int(np.argmax(best_val))
    bits = best[k].astype(np.uint8)
    return bits, float(cut_values(bits, edges, weights)[0])


def make_instance(num_nodes: int, edges, rng: np.random.Generator, weights=None) -> MaxCutInstance:
    """Weighted instance on ``edges`` (nodes 0..num_nodes-1) with its optimum.

    Small instances are solved exhaustively; larger ones by annealing.
    """
    edges = [tuple(int(v) for v in e) for e in edges]
    if weights is None:
        weights = random_weights(len(edges), rng)
    weights = np.asarray(weights, dtype=float)
    if num_nodes <= BRUTE_FORCE_LIMIT:
        bits, value = brute_force_maxcut(num_nodes, edges, weights)
    else:
        bits, value = solve_maxcut_annealing(num_nodes, edges, weights, rng)
    return MaxCutInstance(num_nodes, edges, weights, bits, value)
