"""Node records and graph snapshots.

Keys are opaque byte strings under lexicographic order. The snapshot is
test/experiment scaffolding: protocol handlers never read it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .membership import MembershipVector

Key = bytes

RIGHT = "R"
LEFT = "L"

_KEY_WIDTH = 8


def flip(side: str) -> str:
    return LEFT if side == RIGHT else RIGHT


def key_from_int(value: int) -> Key:
    """Encode an integer key big-endian so numeric and byte order coincide."""
    if value < 0:
        raise ValueError("integer keys must be non-negative")
    return value.to_bytes(_KEY_WIDTH, "big")


def key_to_int(key: Key) -> int:
    return int.from_bytes(key, "big")


def render_key(key: Key) -> str:
    if len(key) == _KEY_WIDTH:
        return str(key_to_int(key))
    return "0x" + key.hex()


def parse_key(text: str) -> Key:
    if text.startswith("0x"):
        return bytes.fromhex(text[2:])
    return key_from_int(int(text))


@dataclass
class NodeRecord:
    """Local state of one node: key, membership vector, per-level links.

    An absent slot (None) stands for no neighbor and for a failed neighbor
    alike. redundant_right optionally keeps the k nearest level successors
    for routing around dead nodes.
    """

    node_id: int
    key: Key
    mv: MembershipVector
    right: list[int | None] = field(default_factory=lambda: [None])
    left: list[int | None] = field(default_factory=lambda: [None])
    max_level: int = 0
    delete_flag: bool = False
    redundant_right: list[list[int]] = field(default_factory=list)

    def ensure_level(self, level: int) -> None:
        while len(self.right) <= level:
            self.right.append(None)
        while len(self.left) <= level:
            self.left.append(None)

    def top_level(self) -> int:
        return max(self.max_level, len(self.right) - 1, len(self.left) - 1)

    def neighbor(self, side: str, level: int) -> int | None:
        slots = self.right if side == RIGHT else self.left
        if level >= len(slots):
            return None
        return slots[level]

    def set_neighbor(self, side: str, level: int, value: int | None) -> None:
        self.ensure_level(level)
        slots = self.right if side == RIGHT else self.left
        slots[level] = value

    def redundant_successors(self, level: int) -> list[int]:
        if level >= len(self.redundant_right):
            return []
        return self.redundant_right[level]


@dataclass
class GraphSnapshot:
    """Global view used only by the oracle builder, checker and experiments."""

    nodes: dict[int, NodeRecord] = field(default_factory=dict)
    alive: set[int] = field(default_factory=set)

    def resolve(self, ref: int | None) -> int | None:
        """Map a neighbor reference to ⊥ unless it names an alive node."""
        if ref is None or ref not in self.alive:
            return None
        return ref

    def record(self, node_id: int) -> NodeRecord:
        return self.nodes[node_id]

    def alive_records(self) -> list[NodeRecord]:
        return [self.nodes[i] for i in self.alive]

    def sorted_alive_keys(self) -> list[Key]:
        return sorted(r.key for r in self.alive_records())

    def level0_chain(self) -> list[int] | None:
        """Walk level 0 left-to-right over alive nodes.

        Returns the id sequence if the alive nodes form one doubly linked
        sorted chain, else None.
        """
        records = self.alive_records()
        if not records:
            return []
        start = min(records, key=lambda r: r.key)
        if self.resolve(start.neighbor(LEFT, 0)) is not None:
            return None
        chain = [start.node_id]
        seen = {start.node_id}
        cur = start
        while True:
            nxt = self.resolve(cur.neighbor(RIGHT, 0))
            if nxt is None:
                break
            rec = self.nodes[nxt]
            if nxt in seen or rec.key <= cur.key:
                return None
            if self.resolve(rec.neighbor(LEFT, 0)) != cur.node_id:
                return None
            chain.append(nxt)
            seen.add(nxt)
            cur = rec
        if len(chain) != len(records):
            return None
        return chain

    # -- text serialization -------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for node_id in sorted(self.alive):
            rec = self.nodes[node_id]
            prefix = "".join(str(d) for d in rec.mv.prefix(rec.max_level)) or "-"
            top = rec.top_level()
            rights = ",".join(self._render_slot(rec.neighbor(RIGHT, l)) for l in range(top + 1))
            lefts = ",".join(self._render_slot(rec.neighbor(LEFT, l)) for l in range(top + 1))
            lines.append(
                f"{node_id} {render_key(rec.key)} {prefix} {rec.max_level} "
                f"R:[{rights}] L:[{lefts}]"
            )
        return "\n".join(lines) + ("\n" if lines else "")

    def _render_slot(self, ref: int | None) -> str:
        return "-" if self.resolve(ref) is None else str(ref)

    @classmethod
    def from_text(cls, text: str) -> "GraphSnapshot":
        snap = cls()
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            ident, key_text, prefix, max_level, rights, lefts = line.split(" ")
            node_id = int(ident)
            digits = [] if prefix == "-" else [int(c) for c in prefix]
            alphabet = max(2, max(digits) + 1 if digits else 2)
            rec = NodeRecord(
                node_id=node_id,
                key=parse_key(key_text),
                mv=MembershipVector(0, alphabet, digits),
                max_level=int(max_level),
            )
            rec.right = _parse_slots(rights, "R")
            rec.left = _parse_slots(lefts, "L")
            snap.nodes[node_id] = rec
            snap.alive.add(node_id)
        return snap


def _parse_slots(text: str, tag: str) -> list[int | None]:
    if not text.startswith(f"{tag}:[") or not text.endswith("]"):
        raise ValueError(f"malformed slot list: {text}")
    body = text[len(tag) + 2 : -1]
    if not body:
        return [None]
    return [None if item == "-" else int(item) for item in body.split(",")]
