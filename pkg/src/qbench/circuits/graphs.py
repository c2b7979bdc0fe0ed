"""Coupling-graph algorithms: edge coloring, components, chains, regions."""

from __future__ import annotations

from collections import defaultdict, deque
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]


def normalize_edges(edges: Iterable[Sequence[int]]) -> list[Edge]:
    seen = set()
    out = []
    for a, b in edges:
        a, b = int(a), int(b)
        if a == b:
            raise ValueError(f"self-loop on qubit {a}")
        key = (min(a, b), max(a, b))
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def adjacency(edges: Iterable[Edge], nodes: Iterable[int] = ()) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = defaultdict(list)
    for n in nodes:
        adj[n]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    for n in adj:
        adj[n].sort()
    return dict(adj)


def max_degree(edges: Sequence[Edge]) -> int:
    deg: dict[int, int] = defaultdict(int)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    return max(deg.values(), default=0)


def is_bipartite(edges: Sequence[Edge]) -> bool:
    adj = adjacency(edges)
    side: dict[int, int] = {}
    for root in adj:
        if root in side:
            continue
        side[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in side:
                    side[v] = 1 - side[u]
                    queue.append(v)
                elif side[v] == side[u]:
                    return False
    return True


def _bipartite_coloring(edges: Sequence[Edge], delta: int) -> list[list[Edge]]:
    # color[v][c] = neighbor joined to v by an edge of color c
    color: dict[int, dict[int, int]] = defaultdict(dict)
    for u, v in edges:
        a = next(c for c in range(delta) if c not in color[u])
        b = next(c for c in range(delta) if c not in color[v])
        if a not in color[v]:
            color[u][a] = v
            color[v][a] = u
            continue
        # walk the a/b alternating path from v and swap its colors; in a
        # bipartite graph it can never come back to u
        path = [v]
        current, c = v, a
        while c in color[current]:
            nxt = color[current][c]
            path.append(nxt)
            current = nxt
            c = b if c == a else a
        path_edges = []
        c = a
        for x, y in zip(path, path[1:]):
            path_edges.append((x, y, c))
            c = b if c == a else a
        for x, y, c in path_edges:
            del color[x][c]
            del color[y][c]
        for x, y, c in path_edges:
            swapped = b if c == a else a
            color[x][swapped] = y
            color[y][swapped] = x
        color[u][a] = v
        color[v][a] = u
    classes: dict[int, set[Edge]] = defaultdict(set)
    for x, nbrs in color.items():
        for c, y in nbrs.items():
            classes[c].add((min(x, y), max(x, y)))
    return [sorted(classes[c]) for c in sorted(classes)]


def _greedy_coloring(edges: Sequence[Edge]) -> list[list[Edge]]:
    deg: dict[int, int] = defaultdict(int)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    order = sorted(edges, key=lambda e: (-(deg[e[0]] + deg[e[1]]), e))
    used: dict[int, set[int]] = defaultdict(set)
    classes: list[list[Edge]] = []
    for a, b in order:
        c = 0
        while c in used[a] or c in used[b]:
            c += 1
        if c == len(classes):
            classes.append([])
        classes[c].append((a, b))
        used[a].add(c)
        used[b].add(c)
    return [sorted(cls) for cls in classes]


def _complete_graph_coloring(nodes: list[int]) -> list[list[Edge]]:
    # round-robin (circle method) one-factorization: n-1 perfect matchings for
    # even n, n near-perfect ones for odd n
    n = len(nodes)
    m = n if n % 2 == 0 else n + 1
    rounds = []
    for r in range(m - 1):
        pairs = []
        candidates = [(m - 1, r)] + [((r + i) % (m - 1), (r - i) % (m - 1)) for i in range(1, m // 2)]
        for a, b in candidates:
            if a < n and b < n:
                x, y = nodes[a], nodes[b]
                pairs.append((min(x, y), max(x, y)))
        rounds.append(sorted(pairs))
    return rounds


def edge_coloring(edges: Iterable[Sequence[int]], max_colors: int | None = None) -> list[list[Edge]]:
    """Partition edges into matchings (color classes).

    Bipartite graphs get exactly max-degree classes via alternating-path
    recoloring, complete graphs get a round-robin one-factorization, and
    other graphs use a greedy coloring with at most 2*max_degree - 1 classes. With ``max_colors`` only the largest classes
    are kept, so some edges may go untested.
    """
    es = normalize_edges(edges)
    if not es:
        return []
    nodes = sorted({q for e in es for q in e})
    if len(es) == len(nodes) * (len(nodes) - 1) // 2 and len(nodes) > 2:
        classes = _complete_graph_coloring(nodes)
    elif is_bipartite(es):
        classes = _bipartite_coloring(es, max_degree(es))
    else:
        classes = _greedy_coloring(es)
    classes = [c for c in classes if c]
    if max_colors is not None and len(classes) > max_colors:
        classes = sorted(classes, key=len, reverse=True)[:max_colors]
    return classes


def connected_components(edges: Iterable[Edge], nodes: Iterable[int] = ()) -> list[set[int]]:
    adj = adjacency(edges, nodes)
    seen: set[int] = set()
    comps = []
    for root in sorted(adj):
        if root in seen:
            continue
        comp = {root}
        queue = deque([root])
        seen.add(root)
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.add(v)
                    queue.append(v)
        comps.append(comp)
    return comps


def largest_connected_component(edges: Iterable[Edge]) -> set[int]:
    """Node set of the largest component spanned by ``edges`` (empty if none)."""
    comps = connected_components(list(edges))
    if not comps:
        return set()
    return max(comps, key=lambda c: (len(c), -min(c)))


def random_chain(
    edges: Sequence[Edge],
    length: int,
    rng: np.random.Generator,
    restarts: int = 1000,
) -> list[int]:
    """Random self-avoiding path with ``length`` qubits.

    Each restart walks from a random qubit, stepping to a random unvisited
    neighbor that still has unvisited neighbors of its own (fewest first,
    so the walk hugs the boundary instead of cutting the lattice in two).
    When one end is stuck the walk continues from the other end. The longest
    walk is returned if none reaches ``length``.
    """
    if length < 1:
        raise ValueError("chain length must be positive")
    adj = adjacency(edges)
    nodes = sorted(adj)
    if not nodes:
        return []
    best: list[int] = []
    for _ in range(restarts):
        start = nodes[int(rng.integers(len(nodes)))]
        path = [start]
        visited = {start}
        for _end in range(2):
            while len(path) < length:
                options = [v for v in adj[path[-1]] if v not in visited]
                if not options:
                    break
                onward = [sum(w not in visited for w in adj[v]) for v in options]
                alive = [o for o in onward if o > 0]
                target = min(alive) if alive else 0
                pick = [v for v, o in zip(options, onward) if o == target]
                nxt = pick[int(rng.integers(len(pick)))]
                path.append(nxt)
                visited.add(nxt)
            path.reverse()
        if len(path) > len(best):
            best = path
        if len(best) >= length:
            break
    return best


def connected_region(
    edges: Sequence[Edge],
    size: int,
    start: int | None = None,
    rng: np.random.Generator | None = None,
) -> list[int]:
    """Breadth-first region of ``size`` qubits around ``start`` (sorted)."""
    adj = adjacency(edges)
    if not adj:
        return []
    nodes = sorted(adj)
    if start is None:
        start = nodes[int(rng.integers(len(nodes)))] if rng is not None else nodes[0]
    region = [start]
    seen = {start}
    queue = deque([start])
    while queue and len(region) < size:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen and len(region) < size:
                seen.add(v)
                region.append(v)
                queue.append(v)
    return sorted(region)


def induced_edges(edges: Iterable[Edge], nodes: Iterable[int]) -> list[Edge]:
    keep = set(nodes)
    return [(a, b) for a, b in edges if a in keep and b in keep]


def heavy_hex_edges(rows: int, row_len: int, offsets: tuple[int, int], stubs: int = 0) -> tuple[int, list[Edge]]:
    """Heavy-hex lattice: ``rows`` lines of ``row_len`` qubits joined by bridge qubits.

    Bridges between row r and r+1 sit at columns ``offsets[r % 2]``,
    ``offsets[r % 2] + 4``, ... . ``stubs`` extra bridge qubits hang below the
    last row. Returns (number of qubits, edges).
    """
    edges: list[Edge] = []
    row_start = []
    q = 0
    for r in range(rows):
        row_start.append(q)
        for c in range(row_len - 1):
            edges.append((q + c, q + c + 1))
        q += row_len
        gap_cols = list(range(offsets[r % 2], row_len, 4))
        if r < rows - 1:
            bridges = []
            for c in gap_cols:
                bridges.append((q, c))
                q += 1
            next_start = q
            for bq, c in bridges:
                edges.append((row_start[r] + c, bq))
                edges.append((bq, next_start + c))
        elif stubs:
            for c in gap_cols[:stubs]:
                edges.append((row_start[r] + c, q))
                q += 1
    return q, sorted(edges)


def grid_edges(rows: int, cols: int) -> list[Edge]:
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return sorted(edges)


def line_edges(n: int) -> list[Edge]:
    return [(i, i + 1) for i in range(n - 1)]


def complete_edges(n: int) -> list[Edge]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]
