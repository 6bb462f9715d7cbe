"""Shared experiment plumbing: survivor graphs, components, CSV output."""
from __future__ import annotations

import random
from pathlib import Path
from typing import Iterable, Sequence

from ..core.records import LEFT, RIGHT, GraphSnapshot
from ..seeding import derive_seed


class DisjointSetUnion:
    """Cross-check oracle for component statistics."""

    def __init__(self, items: Iterable[int]):
        self.parent = {i: i for i in items}
        self.size = {i: 1 for i in self.parent}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def component_sizes(self) -> list[int]:
        return [self.size[i] for i in self.parent if self.find(i) == i]


def survivor_edges(snap: GraphSnapshot) -> list[tuple[int, int]]:
    """Undirected edges among alive nodes, across every level and side."""
    edges = set()
    for node_id in snap.alive:
        rec = snap.nodes[node_id]
        for level in range(rec.top_level() + 1):
            for side in (RIGHT, LEFT):
                nb = snap.resolve(rec.neighbor(side, level))
                if nb is not None and nb != node_id:
                    edges.add((min(node_id, nb), max(node_id, nb)))
    return sorted(edges)


def component_stats(snap: GraphSnapshot) -> tuple[float, float, int]:
    """(isolated fraction, fraction in primary component, survivor count).

    Degenerate when nothing survives: both fractions 0.
    """
    alive = sorted(snap.alive)
    if not alive:
        return (0.0, 0.0, 0)
    sizes = _component_sizes_scipy(snap, alive)
    survivors = len(alive)
    isolated = sum(1 for s in sizes if s == 1)
    return (isolated / survivors, max(sizes) / survivors, survivors)


def _component_sizes_scipy(snap: GraphSnapshot, alive: Sequence[int]) -> list[int]:
    import numpy as np
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    index = {node_id: i for i, node_id in enumerate(alive)}
    edges = survivor_edges(snap)
    n = len(alive)
    if not edges:
        return [1] * n
    rows = np.fromiter((index[a] for a, b in edges), dtype=np.int64, count=len(edges))
    cols = np.fromiter((index[b] for a, b in edges), dtype=np.int64, count=len(edges))
    data = np.ones(len(edges), dtype=np.int8)
    graph = coo_matrix((data, (rows, cols)), shape=(n, n))
    _count, labels = connected_components(graph, directed=False)
    counts = np.bincount(labels)
    return counts.tolist()


def component_stats_dsu(snap: GraphSnapshot) -> tuple[float, float, int]:
    """Same statistics via union-find; used to cross-check the sparse path."""
    alive = sorted(snap.alive)
    if not alive:
        return (0.0, 0.0, 0)
    dsu = DisjointSetUnion(alive)
    for a, b in survivor_edges(snap):
        dsu.union(a, b)
    sizes = dsu.component_sizes()
    survivors = len(alive)
    isolated = sum(1 for s in sizes if s == 1)
    return (isolated / survivors, max(sizes) / survivors, survivors)


def crash_sample(node_ids: Sequence[int], p_f: float, seed: int, *, tag: str) -> set[int]:
    """Deterministic independent-failure draw."""
    rng = random.Random(derive_seed(seed, tag, f"{p_f:.6f}"))
    return {node_id for node_id in node_ids if rng.random() < p_f}


def write_csv(path: str | Path, header: str, rows: Iterable[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "\n".join(rows)
    text = header + "\n" + body + ("\n" if body else "")
    path.write_text(text)
    return path
