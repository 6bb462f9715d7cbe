"""Self-stabilizing link repair.

Each sweep re-validates a node's neighborhood two ways: neighbor checks
confirm that adjacent nodes point back (order and backpointer constraints),
and level probes walk one level down to confirm that each upper slot names
the first node over there with a matching vector prefix (inter-level
constraints). Discrepancies are healed with guarded writes, zipper merges
of severed lists, and probes that locate the right splice point.

Sweeps are deferred while the node is mid-insert, mid-delete, or owes a
splice to a deleting neighbor; repair of those states belongs to the
operations themselves.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core.records import LEFT, RIGHT, flip
from .protocol import messages as m
from .protocol.messages import MergeProbe, Message, NodeRef, ProbeState
from .seeding import derive_seed


@dataclass(frozen=True)
class RepairConfig:
    check_period: int = 0
    phase_jitter: bool = True
    max_rounds: int = 64


@dataclass
class RepairStats:
    rounds: int
    link_writes: int
    repair_messages: int
    converged: bool


def install_repair(node) -> None:
    node._repair_handler = dispatch_repair


def dispatch_repair(node, msg: Message) -> None:
    if msg.kind == m.CHECK_NEIGHBOR:
        handle_check_neighbor(node, msg)
    elif msg.kind == m.LEVEL_PROBE:
        handle_level_probe(node, msg)
    elif msg.kind == m.MERGE_PROBE:
        handle_merge_probe(node, msg)
    elif msg.kind in (m.ZIPPER_F, m.ZIPPER_B):
        handle_zipper(node, msg)


def sweep_constraints(node) -> tuple[int, int]:
    """Emit one round of checks from this node.

    Returns (neighbor checks sent, level probes sent).
    """
    if node.rec.delete_flag or node._own is not None or node._splice_waits:
        return (0, 0)
    checks = 0
    probes = 0
    for level in range(node.rec.max_level + 1):
        node.validate_level(level)
        right = node._slot_ref(RIGHT, level)
        left = node._slot_ref(LEFT, level)
        if right is not None:
            node.send(
                Message(
                    kind=m.CHECK_NEIGHBOR,
                    src=node.id,
                    dst=right.id,
                    level=level,
                    side=LEFT,
                    node=node.ref,
                )
            )
            checks += 1
        if left is not None:
            node.send(
                Message(
                    kind=m.CHECK_NEIGHBOR,
                    src=node.id,
                    dst=left.id,
                    level=level,
                    side=RIGHT,
                    node=node.ref,
                )
            )
            checks += 1
    for level in range(1, node.rec.max_level + 1):
        node.validate_level(level)
        node.validate_level(level - 1)
        for direction in (RIGHT, LEFT):
            expected = node._slot_ref(direction, level)
            carrier = node._slot_ref(direction, level - 1)
            if carrier is None:
                if expected is not None:
                    # lower list ends here although the upper slot goes on;
                    # splice self back into the target's lower list
                    if direction == RIGHT:
                        mp = MergeProbe(
                            level=level - 1,
                            direction=LEFT,
                            mode="smallest_above",
                            boundary_key=node.key,
                            zipper_kind=m.ZIPPER_B,
                            zipper_node=node.ref,
                        )
                    else:
                        mp = MergeProbe(
                            level=level - 1,
                            direction=RIGHT,
                            mode="largest_below",
                            boundary_key=node.key,
                            zipper_kind=m.ZIPPER_F,
                            zipper_node=node.ref,
                        )
                    node.send(
                        Message(kind=m.MERGE_PROBE, src=node.id, dst=expected.id, merge=mp)
                    )
                    probes += 1
                continue
            probe = ProbeState(
                origin=node.ref,
                level=level,
                direction=direction,
                expected=expected,
                origin_prefix=node.mv.prefix(level),
                last_visited=node.ref,
            )
            node.send(Message(kind=m.LEVEL_PROBE, src=node.id, dst=carrier.id, probe=probe))
            probes += 1
    return (checks, probes)


def handle_check_neighbor(node, msg: Message) -> None:
    side = msg.side
    u = msg.node
    level = msg.level
    assert side is not None and u is not None and level is not None
    if node.rec.delete_flag:
        return
    if side == LEFT and not u.key < node.key:
        return
    if side == RIGHT and not u.key > node.key:
        return
    node.validate_level(level)
    w = node._slot_ref(side, level)
    if w is None:
        node.adopt(side, level, u)
        return
    if w.id == u.id:
        return
    if side == LEFT:
        invalid = w.key >= node.key
        between = u.key < w.key < node.key
    else:
        invalid = w.key <= node.key
        between = node.key < w.key < u.key
    if invalid:
        node.adopt(side, level, u, override=(w.id,))
        return
    if between:
        # a closer node sits between the claimant and us: re-aim both
        node.send(
            Message(kind=m.CHECK_NEIGHBOR, src=node.id, dst=w.id, level=level, side=side, node=u)
        )
        node.send(
            Message(kind=m.UPDATE, src=node.id, dst=u.id, level=level, side=flip(side), node=w)
        )
    else:
        # the claimant sits between our old neighbor and us: splice it in
        node.adopt(side, level, u, override=(w.id,))
        node.send(
            Message(kind=m.UPDATE, src=node.id, dst=u.id, level=level, side=side, node=w)
        )
        node.send(
            Message(kind=m.UPDATE, src=node.id, dst=w.id, level=level, side=flip(side), node=u)
        )


def handle_level_probe(node, msg: Message) -> None:
    p = msg.probe
    assert p is not None
    walk_level = p.level - 1
    node.validate_level(walk_level)
    if not node.rec.delete_flag and node.mv.prefix(p.level) == p.origin_prefix:
        _probe_found_match(node, p)
        return
    nxt = node._slot_ref(p.direction, walk_level)
    monotone = nxt is not None and (
        nxt.key > node.key if p.direction == RIGHT else nxt.key < node.key
    )
    if monotone:
        last = p.last_visited if node.rec.delete_flag else node.ref
        node.send(
            Message(
                kind=m.LEVEL_PROBE,
                src=node.id,
                dst=nxt.id,
                probe=ProbeState(
                    origin=p.origin,
                    level=p.level,
                    direction=p.direction,
                    expected=p.expected,
                    origin_prefix=p.origin_prefix,
                    last_visited=last,
                    hops=p.hops + 1,
                ),
            )
        )
        return
    # dead end without a match
    if p.expected is None:
        return
    # the slot's target was never reached: merge its lower list with ours
    endpoint = p.last_visited if node.rec.delete_flag else node.ref
    if p.direction == RIGHT:
        mp = MergeProbe(
            level=walk_level,
            direction=LEFT,
            mode="smallest_above",
            boundary_key=endpoint.key,
            zipper_kind=m.ZIPPER_B,
            zipper_node=endpoint,
        )
    else:
        mp = MergeProbe(
            level=walk_level,
            direction=RIGHT,
            mode="largest_below",
            boundary_key=endpoint.key,
            zipper_kind=m.ZIPPER_F,
            zipper_node=endpoint,
        )
    node.send(Message(kind=m.MERGE_PROBE, src=node.id, dst=p.expected.id, merge=mp))


def _probe_found_match(node, p: ProbeState) -> None:
    found = node.ref
    expected = p.expected
    if expected is not None and expected.id == found.id:
        return
    lower = p.level - 1
    if expected is None:
        # slot was empty: link the origin to us at the probe level
        kind = m.ZIPPER_B if p.direction == RIGHT else m.ZIPPER_F
        handle_zipper(
            node,
            Message(kind=kind, src=node.id, dst=node.id, level=p.level, node=p.origin),
        )
        return
    overshoot = found.key > expected.key if p.direction == RIGHT else found.key < expected.key
    if not overshoot:
        # a nearer match the slot missed: merge the two upper lists
        handle_zipper(
            node,
            Message(kind=m.ZIPPER_F, src=node.id, dst=node.id, level=p.level, node=expected)
            if p.direction == RIGHT
            else Message(kind=m.ZIPPER_B, src=node.id, dst=node.id, level=p.level, node=expected),
        )
        handle_zipper(
            node,
            Message(
                kind=m.ZIPPER_B if p.direction == RIGHT else m.ZIPPER_F,
                src=node.id,
                dst=node.id,
                level=p.level,
                node=p.origin,
            ),
        )
        return
    # walked past the slot's target: it dropped out of the lower list;
    # zip it back in between the last visited node and us
    for kind, other in ((m.ZIPPER_F, node.ref), (m.ZIPPER_B, p.last_visited)):
        if p.direction == LEFT:
            kind = m.ZIPPER_B if kind == m.ZIPPER_F else m.ZIPPER_F
        node.send(
            Message(kind=kind, src=node.id, dst=expected.id, level=lower, node=other)
        )


def handle_merge_probe(node, msg: Message) -> None:
    mp = msg.merge
    assert mp is not None
    node.validate_level(mp.level)
    nxt = node._slot_ref(mp.direction, mp.level)
    if nxt is not None:
        if mp.mode == "largest_below":
            keep_walking = nxt.key < mp.boundary_key and nxt.key > node.key
        else:
            keep_walking = nxt.key > mp.boundary_key and nxt.key < node.key
        if keep_walking:
            node.send(
                Message(
                    kind=m.MERGE_PROBE,
                    src=node.id,
                    dst=nxt.id,
                    merge=MergeProbe(
                        level=mp.level,
                        direction=mp.direction,
                        mode=mp.mode,
                        boundary_key=mp.boundary_key,
                        zipper_kind=mp.zipper_kind,
                        zipper_node=mp.zipper_node,
                        hops=mp.hops + 1,
                    ),
                )
            )
            return
    handle_zipper(
        node,
        Message(
            kind=mp.zipper_kind, src=node.id, dst=node.id, level=mp.level, node=mp.zipper_node
        ),
    )


def handle_zipper(node, msg: Message) -> None:
    x = msg.node
    level = msg.level
    assert x is not None and level is not None
    if x.id == node.id or node.rec.delete_flag:
        return
    node.learn_key(x.id, x.key)
    node.validate_level(level)
    if msg.kind == m.ZIPPER_F:
        if not node.key < x.key:
            return
        w = node._slot_ref(RIGHT, level)
        if w is not None and w.key <= x.key:
            if w.id != x.id:
                node.send(
                    Message(kind=m.ZIPPER_F, src=node.id, dst=w.id, level=level, node=x)
                )
            return
        node.adopt(RIGHT, level, x)
        node.send(
            Message(kind=m.UPDATE, src=node.id, dst=x.id, level=level, side=LEFT, node=node.ref)
        )
        if w is not None:
            node.send(Message(kind=m.ZIPPER_F, src=node.id, dst=x.id, level=level, node=w))
    else:
        if not node.key > x.key:
            return
        w = node._slot_ref(LEFT, level)
        if w is not None and w.key >= x.key:
            if w.id != x.id:
                node.send(
                    Message(kind=m.ZIPPER_B, src=node.id, dst=w.id, level=level, node=x)
                )
            return
        node.adopt(LEFT, level, x)
        node.send(
            Message(kind=m.UPDATE, src=node.id, dst=x.id, level=level, side=RIGHT, node=node.ref)
        )
        if w is not None:
            node.send(Message(kind=m.ZIPPER_B, src=node.id, dst=x.id, level=level, node=w))


def run_repair_rounds(net, nodes, *, max_rounds: int = 64, step_limit: int | None = None) -> RepairStats:
    """Round-robin sweeps until a full round writes no link, or the round
    budget runs out."""
    repair_msgs_before = _repair_message_count(net)
    writes_before = net.metrics.link_writes
    rounds = 0
    converged = False
    while rounds < max_rounds:
        before = net.metrics.link_writes
        for node_id in sorted(nodes):
            node = nodes[node_id]
            if net.is_alive(node_id):
                sweep_constraints(node)
        if step_limit is None:
            net.run_until_quiescent()
        else:
            net.run_until_quiescent(max_steps=step_limit)
        rounds += 1
        if net.metrics.link_writes == before:
            converged = True
            break
    return RepairStats(
        rounds=rounds,
        link_writes=net.metrics.link_writes - writes_before,
        repair_messages=_repair_message_count(net) - repair_msgs_before,
        converged=converged,
    )


def _repair_message_count(net) -> int:
    counts = net.metrics.delivered_by_kind
    return sum(counts.get(kind, 0) for kind in (m.CHECK_NEIGHBOR, m.LEVEL_PROBE, m.MERGE_PROBE, m.ZIPPER_F, m.ZIPPER_B, m.UPDATE))


def schedule_periodic_repair(net, nodes, config: RepairConfig, *, horizon: int) -> None:
    """Install self-rescheduling sweep calls until the given tick."""
    if config.check_period <= 0:
        return

    def make_tick(node_id: int):
        def tick() -> None:
            node = nodes.get(node_id)
            if node is None or not net.is_alive(node_id):
                return
            sweep_constraints(node)
            nxt = net.now + config.check_period
            if nxt <= horizon:
                net.schedule_call(nxt, tick, label=f"repair@{node_id}")

        return tick

    for node_id in sorted(nodes):
        offset = 1
        if config.phase_jitter:
            offset += derive_seed(net.config.seed, "repair-phase", node_id) % config.check_period
        net.schedule_call(net.now + offset, make_tick(node_id), label=f"repair@{node_id}")
