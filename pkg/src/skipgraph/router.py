"""Search routing evaluated directly on a snapshot.

Mirrors the forwarding rule of the message protocol exactly (same slot
choice, same level descent, same redundant fallback), but walks the links
in process so experiments can run many searches per second. Path
equivalence with the live protocol is pinned by tests.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core.records import LEFT, RIGHT, GraphSnapshot, Key


@dataclass(frozen=True)
class RouteResult:
    outcome: str  # "found" | "boundary" | "stuck"
    terminal: int
    path: tuple[int, ...]
    messages: int


def route_search(
    g: GraphSnapshot,
    start: int,
    target: Key,
    *,
    redundancy: int = 0,
    max_hops: int | None = None,
) -> RouteResult:
    rec = g.nodes[start]
    path = [start]
    if rec.key == target:
        return RouteResult("found", start, tuple(path), 0)
    side = RIGHT if rec.key < target else LEFT
    level = min(rec.max_level, rec.top_level())
    hop_budget = max_hops if max_hops is not None else len(g.alive) + 2
    while True:
        moved = False
        while level >= 0:
            nb = g.resolve(rec.neighbor(side, level))
            if nb is not None and _moves_toward(g.nodes[nb].key, target, side):
                rec = g.nodes[nb]
                path.append(nb)
                moved = True
                break
            level -= 1
        if not moved and side == RIGHT and redundancy > 0:
            for cand in rec.redundant_successors(0):
                if g.resolve(cand) is not None and _moves_toward(g.nodes[cand].key, target, RIGHT):
                    rec = g.nodes[cand]
                    path.append(cand)
                    level = 0
                    moved = True
                    break
        if not moved:
            hops = len(path) - 1
            return RouteResult("boundary", rec.node_id, tuple(path), hops + (1 if hops else 0))
        if rec.key == target:
            hops = len(path) - 1
            return RouteResult("found", rec.node_id, tuple(path), hops + (1 if hops else 0))
        if len(path) > hop_budget:
            return RouteResult("stuck", rec.node_id, tuple(path), len(path) - 1)
        level = max(level, 0)


def _moves_toward(neighbor_key: Key, target: Key, side: str) -> bool:
    if side == RIGHT:
        return neighbor_key <= target
    return neighbor_key >= target
