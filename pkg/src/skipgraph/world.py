"""Assemble simulated worlds: records, protocol nodes, network.

A world built here starts from the reference link structure; protocol
operations and repair then evolve it. Snapshots taken from a world share
the live records, filtered by current liveness.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core.membership import MembershipVector
from .core.oracle import build_oracle
from .core.records import LEFT, RIGHT, GraphSnapshot, Key, NodeRecord, key_from_int
from .protocol.node import Node
from .repair import install_repair
from .seeding import derive_seed
from .simnet import Network, NetworkConfig


def membership_for(
    seed: int, node_id: int, alphabet_size: int = 2, digits: tuple[int, ...] = ()
) -> MembershipVector:
    """The node's vector: deterministic in (world seed, node id), key-free."""
    return MembershipVector(derive_seed(seed, "mv", node_id), alphabet_size, digits)


@dataclass
class World:
    net: Network
    nodes: dict[int, Node]
    seed: int
    alphabet_size: int = 2
    redundancy: int = 0
    records: dict[int, NodeRecord] = field(default_factory=dict)

    def snapshot(self) -> GraphSnapshot:
        snap = GraphSnapshot()
        snap.nodes = dict(self.records)
        snap.alive = self.net.alive_ids()
        return snap

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def alive_nodes(self) -> list[Node]:
        return [self.nodes[i] for i in sorted(self.net.alive_ids())]

    def add_node(self, node_id: int, key: Key, *, digits: tuple[int, ...] = ()) -> Node:
        if node_id in self.records:
            raise ValueError(f"node id {node_id} already exists")
        rec = NodeRecord(
            node_id=node_id,
            key=key,
            mv=membership_for(self.seed, node_id, self.alphabet_size, digits),
        )
        node = Node(rec, self.net, redundancy=self.redundancy)
        install_repair(node)
        self.records[node_id] = rec
        self.nodes[node_id] = node
        self.net.register(node_id, node)
        return node


def empty_world(
    *,
    seed: int = 0,
    alphabet_size: int = 2,
    redundancy: int = 0,
    min_delay: int = 1,
    max_delay: int = 1,
    delivery_jitter: bool = False,
    capture_trace: bool = False,
) -> World:
    net = Network(
        NetworkConfig(
            seed=seed,
            min_delay=min_delay,
            max_delay=max_delay,
            delivery_jitter=delivery_jitter,
        ),
        capture_trace=capture_trace,
    )
    return World(net=net, nodes={}, seed=seed, alphabet_size=alphabet_size, redundancy=redundancy)


def oracle_snapshot(
    n: int, *, seed: int = 0, alphabet_size: int = 2, redundancy: int = 0
) -> GraphSnapshot:
    """Reference-built graph over integer keys 0..n-1 with ids = keys."""
    keys = [key_from_int(i) for i in range(n)]
    mvs = [membership_for(seed, i, alphabet_size) for i in range(n)]
    return build_oracle(keys, mvs, redundancy=redundancy)


def build_world(
    n: int,
    *,
    seed: int = 0,
    alphabet_size: int = 2,
    redundancy: int = 0,
    min_delay: int = 1,
    max_delay: int = 1,
    delivery_jitter: bool = False,
    capture_trace: bool = False,
) -> World:
    """A live world pre-linked by the reference builder."""
    world = empty_world(
        seed=seed,
        alphabet_size=alphabet_size,
        redundancy=redundancy,
        min_delay=min_delay,
        max_delay=max_delay,
        delivery_jitter=delivery_jitter,
        capture_trace=capture_trace,
    )
    snap = oracle_snapshot(n, seed=seed, alphabet_size=alphabet_size, redundancy=redundancy)
    attach_snapshot(world, snap)
    return world


def attach_snapshot(world: World, snap: GraphSnapshot) -> None:
    """Wrap existing records in protocol nodes and prime their key caches."""
    for node_id in sorted(snap.nodes):
        rec = snap.nodes[node_id]
        node = Node(rec, world.net, redundancy=world.redundancy)
        install_repair(node)
        world.records[node_id] = rec
        world.nodes[node_id] = node
        world.net.register(node_id, node)
    for node_id, rec in snap.nodes.items():
        node = world.nodes[node_id]
        for level in range(rec.top_level() + 1):
            for side in (RIGHT, LEFT):
                nb = rec.neighbor(side, level)
                if nb is not None:
                    node.learn_key(nb, snap.nodes[nb].key)
        for successors in rec.redundant_right:
            for nb in successors:
                node.learn_key(nb, snap.nodes[nb].key)


def crash_nodes(world: World, node_ids) -> None:
    """Take nodes down at the current tick, atomically."""
    for node_id in node_ids:
        world.net.schedule_crash(node_id, world.net.now)
    world.net.run_until_quiescent()
