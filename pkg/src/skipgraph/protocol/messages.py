"""Message vocabulary of the node protocols.

Every node reference travels as a NodeRef carrying the key alongside the
id: receivers compare keys without any global lookup, keeping handlers
strictly local.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from ..core.records import Key, render_key

# protocol kinds
SEARCH = "searchOp"
FOUND = "foundOp"
NOT_FOUND = "notFoundOp"
GET_MAX_LEVEL = "getMaxLevelOp"
RET_MAX_LEVEL = "retMaxLevelOp"
GET_NEIGHBOR = "getNeighborOp"
RET_NEIGHBOR = "retNeighborOp"
GET_LINK = "getLinkOp"
SET_LINK = "setLinkOp"
BUDDY = "buddyOp"
UPDATE = "updateOp"
DELETE = "deleteOp"
CONFIRM_DELETE = "confirmDeleteOp"
NO_NEIGHBOR = "noNeighborOp"
FIND_NEIGHBOR = "findNeighborOp"
FOUND_NEIGHBOR = "foundNeighborOp"
SET_NEIGHBOR_NIL = "setNeighborNilOp"
RANGE = "rangeOp"
RANGE_RESULT = "rangeResultOp"

# repair kinds
CHECK_NEIGHBOR = "checkNeighborOp"
ZIPPER_F = "zipperOpF"
ZIPPER_B = "zipperOpB"
LEVEL_PROBE = "levelProbeOp"
MERGE_PROBE = "mergeProbeOp"

PROTOCOL_KINDS = frozenset(
    {
        SEARCH,
        FOUND,
        NOT_FOUND,
        GET_MAX_LEVEL,
        RET_MAX_LEVEL,
        GET_NEIGHBOR,
        RET_NEIGHBOR,
        GET_LINK,
        SET_LINK,
        BUDDY,
        UPDATE,
        DELETE,
        CONFIRM_DELETE,
        NO_NEIGHBOR,
        FIND_NEIGHBOR,
        FOUND_NEIGHBOR,
        SET_NEIGHBOR_NIL,
        RANGE,
        RANGE_RESULT,
    }
)

REPAIR_KINDS = frozenset({CHECK_NEIGHBOR, ZIPPER_F, ZIPPER_B, LEVEL_PROBE, MERGE_PROBE})


class NodeRef(NamedTuple):
    id: int
    key: Key


@dataclass(frozen=True)
class ProbeState:
    """State carried by an inter-level consistency probe.

    The probe walks level - 1 sideways from origin, looking for the first
    node whose vector matches one digit beyond origin's prefix at level - 1,
    and classifies what it finds against origin's slot at `level`.
    """

    origin: NodeRef
    level: int
    direction: str
    expected: NodeRef | None
    origin_prefix: tuple[int, ...]
    last_visited: NodeRef
    hops: int = 0
    case: int | None = None


@dataclass(frozen=True)
class MergeProbe:
    """Walk one level list for a merge endpoint, then fire a zipper there.

    mode "largest_below": walk `direction` while the next node's key stays
    below boundary_key; "smallest_above": mirror. boundary None means
    unbounded (walk to the end of the list).
    """

    level: int
    direction: str
    mode: str
    boundary_key: Key | None
    zipper_kind: str
    zipper_node: NodeRef
    hops: int = 0


@dataclass(frozen=True)
class Message:
    kind: str
    src: int
    dst: int
    op_id: int | None = None
    level: int | None = None
    side: str | None = None
    digit: int | None = None
    key: Key | None = None
    node: NodeRef | None = None
    sender: NodeRef | None = None
    start: NodeRef | None = None
    max_level: int | None = None
    found_side: str | None = None
    lo: Key | None = None
    hi: Key | None = None
    mode: str | None = None
    dirs: str | None = None
    via: tuple[int, ...] = field(default=())
    probe: ProbeState | None = None
    merge: MergeProbe | None = None
    synthetic: bool = False

    def trace_payload(self) -> str:
        parts: list[str] = []
        if self.op_id is not None:
            parts.append(f"op={self.op_id}")
        if self.key is not None:
            parts.append(f"key={render_key(self.key)}")
        if self.lo is not None:
            parts.append(f"lo={render_key(self.lo)}")
        if self.hi is not None:
            parts.append(f"hi={render_key(self.hi)}")
        if self.level is not None:
            parts.append(f"level={self.level}")
        if self.side is not None:
            parts.append(f"side={self.side}")
        if self.digit is not None:
            parts.append(f"digit={self.digit}")
        if self.node is not None:
            parts.append(f"node={self.node.id}")
        elif self.kind in (SET_LINK, FOUND_NEIGHBOR, RET_NEIGHBOR):
            parts.append("node=-")
        if self.start is not None:
            parts.append(f"start={self.start.id}")
        if self.sender is not None:
            parts.append(f"sender={self.sender.id}")
        if self.max_level is not None:
            parts.append(f"maxLevel={self.max_level}")
        if self.found_side is not None:
            parts.append(f"boundary={self.found_side}")
        if self.mode is not None:
            parts.append(f"mode={self.mode}")
        if self.probe is not None:
            p = self.probe
            exp = p.expected.id if p.expected is not None else "-"
            parts.append(
                f"probe(origin={p.origin.id} level={p.level} dir={p.direction} expected={exp})"
            )
        if self.merge is not None:
            m = self.merge
            parts.append(
                f"merge(level={m.level} dir={m.direction} {m.mode} zip={m.zipper_kind}:{m.zipper_node.id})"
            )
        return " ".join(parts)
