"""Reference builder: the unique link structure for a given key/vector set.

Built globally by grouping, entirely independent of the message protocol;
used as ground truth by tests and experiments.
"""
from __future__ import annotations

from typing import Sequence

from .membership import MembershipVector
from .records import LEFT, RIGHT, GraphSnapshot, Key, NodeRecord


def build_oracle(
    keys: Sequence[Key],
    mvs: Sequence[MembershipVector],
    *,
    node_ids: Sequence[int] | None = None,
    redundancy: int = 0,
) -> GraphSnapshot:
    """Link every node to its neighbors in each list its vector puts it in.

    max_level is the first level at which the node is alone in its list
    (0 for a one-node graph).
    """
    if len(keys) != len(mvs):
        raise ValueError("keys and mvs must have equal length")
    if len(set(keys)) != len(keys):
        raise ValueError("duplicate key")
    ids = list(node_ids) if node_ids is not None else list(range(len(keys)))
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate node id")

    snap = GraphSnapshot()
    for node_id, key, mv in zip(ids, keys, mvs):
        snap.nodes[node_id] = NodeRecord(node_id=node_id, key=key, mv=mv)
        snap.alive.add(node_id)
    if not ids:
        return snap

    order = sorted(ids, key=lambda i: snap.nodes[i].key)
    groups: list[list[int]] = [order]
    level = 0
    while groups:
        next_groups: list[list[int]] = []
        for group in groups:
            for pos, node_id in enumerate(group):
                rec = snap.nodes[node_id]
                rec.ensure_level(level)
                rec.right[level] = group[pos + 1] if pos + 1 < len(group) else None
                rec.left[level] = group[pos - 1] if pos >= 1 else None
            if len(group) == 1:
                snap.nodes[group[0]].max_level = level
                continue
            split: dict[int, list[int]] = {}
            for node_id in group:
                digit = snap.nodes[node_id].mv.digit(level)
                split.setdefault(digit, []).append(node_id)
            next_groups.extend(split.values())
            if redundancy > 0:
                for pos, node_id in enumerate(group):
                    rec = snap.nodes[node_id]
                    while len(rec.redundant_right) <= level:
                        rec.redundant_right.append([])
                    rec.redundant_right[level] = group[pos + 1 : pos + 1 + redundancy]
        groups = next_groups
        level += 1
    return snap


def skip_list_restriction(g: GraphSnapshot, z: MembershipVector) -> list[list[int]]:
    """Per-level node lists obtained by fixing the infinite word z.

    Level i holds the alive nodes whose vectors match z's first i digits,
    in key order; the sequence stops after the first empty or singleton
    level.
    """
    current = sorted(g.alive, key=lambda i: g.nodes[i].key)
    levels = [current]
    i = 0
    while len(current) > 1:
        want = z.digit(i)
        current = [n for n in current if g.nodes[n].mv.digit(i) == want]
        levels.append(current)
        i += 1
    return levels


def restriction_search_path(
    g: GraphSnapshot, z: MembershipVector, start: int, target: Key
) -> tuple[list[int], str, int | None]:
    """Walk the restriction the way a skip list search would.

    Returns (node sequence, outcome, result node). Outcome is "found" on an
    exact match, else "boundary". Written against the level lists directly;
    deliberately shares no code with the message protocol.
    """
    levels = skip_list_restriction(g, z)
    index_of = [{n: i for i, n in enumerate(lst)} for lst in levels]

    path = [start]
    cur = start
    level = len(levels) - 1
    if g.nodes[cur].key == target:
        return path, "found", cur
    going_right = g.nodes[cur].key < target
    while level >= 0:
        lst = levels[level]
        idx = index_of[level].get(cur)
        if idx is None:
            level -= 1
            continue
        moved = False
        if going_right:
            while idx + 1 < len(lst) and g.nodes[lst[idx + 1]].key <= target:
                idx += 1
                cur = lst[idx]
                path.append(cur)
                moved = True
                if g.nodes[cur].key == target:
                    return path, "found", cur
        else:
            while idx - 1 >= 0 and g.nodes[lst[idx - 1]].key >= target:
                idx -= 1
                cur = lst[idx]
                path.append(cur)
                moved = True
                if g.nodes[cur].key == target:
                    return path, "found", cur
        if not moved:
            level -= 1
    return path, "boundary", cur
