"""Per-node protocol logic over the simulated network.

Handlers are strictly local: decisions use the node's own record plus
ids/keys carried in messages. Keys of previously seen nodes are cached so
slot ids can be compared without global state.

Blocking operations (insert, delete) run as generators that yield a wait
descriptor and are resumed when a matching reply arrives. A node runs at
most one own insert or delete at a time; a requested self-delete waits for
an active own operation and for splices owed to other deleters.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Iterable

from ..core.membership import MembershipVector
from ..core.records import LEFT, RIGHT, Key, NodeRecord, flip
from . import messages as m
from .messages import Message, NodeRef

# outcome labels for completed operations
INSERTED = "inserted"
DUPLICATE = "duplicate"
ABORTED = "aborted"
DELETED = "deleted"
FOUND = "found"
NOT_FOUND = "notFound"


class _Await:
    """What an operation generator is waiting for."""

    __slots__ = ("kinds", "level", "phase")

    def __init__(self, kinds: frozenset[str], level: int | None, phase: str):
        self.kinds = kinds
        self.level = level
        self.phase = phase


@dataclass
class _Continuation:
    op_id: int
    op_kind: str
    gen: Generator[_Await, Message | None, None]
    waiting: _Await | None = None


@dataclass
class _SpliceWait:
    """A splice owed to a deleting left neighbor."""

    reply_to: NodeRef
    via: tuple[int, ...]


_REPROCESS_KINDS = frozenset(
    {m.SEARCH, m.GET_LINK, m.BUDDY, m.DELETE, m.FIND_NEIGHBOR, m.SET_NEIGHBOR_NIL, m.RANGE}
)


class Node:
    def __init__(self, record: NodeRecord, net, *, redundancy: int = 0):
        self.rec = record
        self.net = net
        self.redundancy = redundancy
        self.results: dict[int, dict[str, Any]] = {}
        self._known_keys: dict[int, Key] = {record.node_id: record.key}
        self._own: _Continuation | None = None
        self._splice_waits: dict[tuple[int, int], _SpliceWait] = {}
        self._delete_pending: dict[int, str] = {}
        self._resolved_by: dict[int, int | None] = {}
        self._deferred_links: dict[int, list[Message]] = {}
        self._pending_delete_op: int | None = None
        self._range_seen: set[int] = set()
        self._op_seq = 0
        self._repair_handler: Callable[[Node, Message], None] | None = None

    # --- identity helpers ---

    @property
    def id(self) -> int:
        return self.rec.node_id

    @property
    def key(self) -> Key:
        return self.rec.key

    @property
    def mv(self) -> MembershipVector:
        return self.rec.mv

    @property
    def ref(self) -> NodeRef:
        return NodeRef(self.id, self.key)

    def learn_key(self, node_id: int, key: Key) -> None:
        self._known_keys[node_id] = key

    def key_of(self, node_id: int) -> Key:
        return self._known_keys[node_id]

    def new_op_id(self) -> int:
        self._op_seq += 1
        return (self.id << 20) | self._op_seq

    # --- slot access ---

    def _resolved(self, side: str, level: int) -> int | None:
        nb = self.rec.neighbor(side, level)
        if nb is None or not self.net.is_alive(nb):
            return None
        return nb

    def _slot_ref(self, side: str, level: int) -> NodeRef | None:
        nb = self._resolved(side, level)
        if nb is None:
            return None
        return NodeRef(nb, self._known_keys[nb])

    def validate_level(self, level: int) -> None:
        # required before acting on level neighbors: dead entries become absent
        for side in (RIGHT, LEFT):
            nb = self.rec.neighbor(side, level)
            if nb is not None and not self.net.is_alive(nb):
                self._write_slot(side, level, None)

    def _write_slot(self, side: str, level: int, value: int | None) -> None:
        old = self.rec.neighbor(side, level)
        if old == value:
            return
        self.rec.set_neighbor(side, level, value)
        self.net.log_link_write(self.id, side, level, old, value)
        if side == RIGHT and level == 0 and self.redundancy > 0 and value is not None:
            if not self.rec.redundant_right:
                self.rec.redundant_right.append([])
            succ = self.rec.redundant_right[0]
            if value in succ:
                succ.remove(value)
            succ.insert(0, value)
            del succ[self.redundancy :]

    def adopt(self, side: str, level: int, cand: NodeRef | None, override: Iterable[int] = ()) -> bool:
        """Guarded slot write: side-correct and closer-wins against a live
        incumbent, unless the incumbent is listed in override or dead."""
        if cand is None or cand.id == self.id:
            return False
        if side == RIGHT and not cand.key > self.key:
            return False
        if side == LEFT and not cand.key < self.key:
            return False
        self.learn_key(cand.id, cand.key)
        cur = self.rec.neighbor(side, level)
        if cur == cand.id:
            return False
        if cur is not None and self.net.is_alive(cur) and cur not in override:
            ck = self._known_keys[cur]
            if side == RIGHT and ck <= cand.key:
                return False
            if side == LEFT and ck >= cand.key:
                return False
        self._write_slot(side, level, cand.id)
        return True

    # --- sending ---

    def send(self, msg: Message) -> None:
        self.net.send(msg)

    def _reply(self, to: NodeRef | int, **kw) -> None:
        dst = to.id if isinstance(to, NodeRef) else to
        self.send(Message(src=self.id, dst=dst, **kw))

    # --- dispatch ---

    def on_message(self, msg: Message) -> None:
        self._note_refs(msg)
        if msg.kind in m.REPAIR_KINDS:
            if self._repair_handler is not None:
                self._repair_handler(self, msg)
            return
        handler = _DISPATCH[msg.kind]
        handler(self, msg)

    def _note_refs(self, msg: Message) -> None:
        for ref in (msg.node, msg.sender, msg.start):
            if ref is not None:
                self.learn_key(ref.id, ref.key)

    # --- continuation driving ---

    def _start_own(self, op_kind: str, op_id: int, gen) -> None:
        assert self._own is None
        self._own = _Continuation(op_id=op_id, op_kind=op_kind, gen=gen)
        self._advance(None)

    def _advance(self, msg: Message | None) -> None:
        cont = self._own
        assert cont is not None
        try:
            if msg is None:
                wait = next(cont.gen)
            else:
                wait = cont.gen.send(msg)
        except StopIteration:
            self._own = None
            self._maybe_start_pending_delete()
            return
        cont.waiting = wait

    def _feed_own(self, msg: Message) -> bool:
        cont = self._own
        if cont is None or cont.waiting is None or msg.op_id != cont.op_id:
            return False
        wait = cont.waiting
        if msg.kind not in wait.kinds:
            return False
        if wait.level is not None and msg.level != wait.level:
            return False
        cont.waiting = None
        self._advance(msg)
        return True

    def _maybe_start_pending_delete(self) -> None:
        if self._pending_delete_op is None:
            return
        if self._own is not None or self._splice_waits:
            return
        op_id = self._pending_delete_op
        self._pending_delete_op = None
        self._start_own("delete", op_id, self._delete_flow(op_id))

    # --- search ---

    def start_search(self, target: Key, *, op_id: int | None = None) -> int:
        if op_id is None:
            op_id = self.new_op_id()
        self._search_step(target, self.rec.max_level, op_id, origin=True)
        return op_id

    def _handle_search(self, msg: Message) -> None:
        assert msg.start is not None and msg.key is not None
        self._search_step(msg.key, msg.level, msg.op_id, start=msg.start)

    def _search_step(
        self,
        target: Key,
        level: int | None,
        op_id: int,
        *,
        start: NodeRef | None = None,
        origin: bool = False,
    ) -> None:
        me = origin
        if start is None:
            start = self.ref
        if self.key == target:
            self._deliver_search_result(start, op_id, m.FOUND, self.ref, None, local=me)
            return
        side = RIGHT if self.key < target else LEFT
        lvl = min(level if level is not None else 0, self.rec.top_level())
        while lvl >= 0:
            self.validate_level(lvl)
            nb = self._slot_ref(side, lvl)
            if nb is not None and self._moves_toward(nb.key, target, side):
                self.send(
                    Message(
                        kind=m.SEARCH,
                        src=self.id,
                        dst=nb.id,
                        op_id=op_id,
                        key=target,
                        level=lvl,
                        start=start,
                    )
                )
                return
            lvl -= 1
        if side == RIGHT and self.redundancy > 0:
            for cand in self.rec.redundant_successors(0):
                ck = self._known_keys.get(cand)
                if ck is None or cand == self.id:
                    continue
                if self.net.is_alive(cand) and self._moves_toward(ck, target, RIGHT):
                    self.send(
                        Message(
                            kind=m.SEARCH,
                            src=self.id,
                            dst=cand,
                            op_id=op_id,
                            key=target,
                            level=0,
                            start=start,
                        )
                    )
                    return
        self._deliver_search_result(start, op_id, m.NOT_FOUND, self.ref, side, local=me)

    @staticmethod
    def _moves_toward(neighbor_key: Key, target: Key, side: str) -> bool:
        if side == RIGHT:
            return neighbor_key <= target
        return neighbor_key >= target

    def _deliver_search_result(
        self,
        start: NodeRef,
        op_id: int,
        kind: str,
        node: NodeRef,
        boundary_side: str | None,
        *,
        local: bool,
    ) -> None:
        if local or start.id == self.id:
            msg = Message(kind=kind, src=self.id, dst=self.id, op_id=op_id, node=node, found_side=boundary_side)
            self._handle_search_result(msg)
        else:
            self._reply(start, kind=kind, op_id=op_id, node=node, found_side=boundary_side)

    def _handle_search_result(self, msg: Message) -> None:
        if self._feed_own(msg):
            return
        assert msg.node is not None
        if msg.kind == m.FOUND:
            self.results[msg.op_id] = {"outcome": FOUND, "node": msg.node.id, "key": msg.node.key}
        else:
            self.results[msg.op_id] = {
                "outcome": NOT_FOUND,
                "boundary": msg.node.id,
                "boundary_key": msg.node.key,
                "boundary_side": msg.found_side,
            }

    # --- insert ---

    def start_insert(self, introducer: NodeRef | None, *, op_id: int | None = None) -> int:
        if op_id is None:
            op_id = self.new_op_id()
        assert self._own is None, "one own operation at a time"
        self._start_own("insert", op_id, self._insert_flow(introducer, op_id))
        return op_id

    def _insert_flow(self, intro: NodeRef | None, op_id: int):
        if intro is None or intro.id == self.id:
            # first node of the graph: trivially a singleton at level 0
            self.rec.max_level = 0
            self.results[op_id] = {"outcome": INSERTED, "max_level": 0}
            return
        self.learn_key(intro.id, intro.key)
        side = RIGHT if intro.key < self.key else LEFT
        other = flip(side)
        self._reply(intro, kind=m.GET_MAX_LEVEL, op_id=op_id)
        rep = yield _Await(frozenset({m.RET_MAX_LEVEL}), None, "introducer max level")
        self.send(
            Message(
                kind=m.SEARCH,
                src=self.id,
                dst=intro.id,
                op_id=op_id,
                key=self.key,
                level=rep.max_level - 1,
                start=self.ref,
            )
        )
        rep = yield _Await(frozenset({m.FOUND, m.NOT_FOUND}), None, "level-0 position")
        if rep.kind == m.FOUND:
            self.results[op_id] = {"outcome": DUPLICATE, "holder": rep.node.id}
            return
        boundary = rep.node
        assert boundary is not None
        wrong_side = (other == LEFT and boundary.key >= self.key) or (
            other == RIGHT and boundary.key <= self.key
        )
        if wrong_side:
            self.results[op_id] = {"outcome": ABORTED, "reason": "position moved"}
            return
        self._reply(boundary, kind=m.GET_NEIGHBOR, op_id=op_id, side=side, level=0)
        rep = yield _Await(frozenset({m.RET_NEIGHBOR}), 0, "boundary's far-side slot")
        far = rep.node
        self._reply(boundary, kind=m.GET_LINK, op_id=op_id, node=self.ref, side=side, level=0)
        rep = yield _Await(frozenset({m.SET_LINK}), 0, "near-side level-0 link")
        self.adopt(other, 0, rep.node)
        if far is not None and (
            (side == RIGHT and far.key > self.key) or (side == LEFT and far.key < self.key)
        ):
            self._reply(far, kind=m.GET_LINK, op_id=op_id, node=self.ref, side=other, level=0)
            rep = yield _Await(frozenset({m.SET_LINK}), 0, "far-side level-0 link")
            self.adopt(side, 0, rep.node)
        level = 0
        while True:
            digit = self.mv.digit(level)
            next_level = level + 1
            for slot_side in (RIGHT, LEFT):
                self.validate_level(level)
                carrier = self._slot_ref(slot_side, level)
                if carrier is None:
                    continue
                self._reply(
                    carrier,
                    kind=m.BUDDY,
                    op_id=op_id,
                    node=self.ref,
                    level=level,
                    digit=digit,
                    side=flip(slot_side),
                )
                rep = yield _Await(frozenset({m.SET_LINK}), next_level, "buddy link")
                self.adopt(slot_side, next_level, rep.node)
            level = next_level
            if self._resolved(RIGHT, level) is None and self._resolved(LEFT, level) is None:
                break
        self.rec.max_level = level
        self.results[op_id] = {"outcome": INSERTED, "max_level": level}

    def _handle_get_max_level(self, msg: Message) -> None:
        self._reply(msg.src, kind=m.RET_MAX_LEVEL, op_id=msg.op_id, max_level=self.rec.max_level)

    def _handle_ret_max_level(self, msg: Message) -> None:
        self._feed_own(msg)

    def _handle_get_neighbor(self, msg: Message) -> None:
        assert msg.side is not None and msg.level is not None
        self.validate_level(msg.level)
        self._reply(
            msg.src,
            kind=m.RET_NEIGHBOR,
            op_id=msg.op_id,
            level=msg.level,
            node=self._slot_ref(msg.side, msg.level),
        )

    def _handle_ret_neighbor(self, msg: Message) -> None:
        self._feed_own(msg)

    def _handle_set_link(self, msg: Message) -> None:
        self._feed_own(msg)

    def _handle_get_link(self, msg: Message) -> None:
        assert msg.node is not None and msg.side is not None and msg.level is not None
        self._change_neighbor(msg.node, msg.side, msg.level, msg.op_id, msg)

    def _change_neighbor(
        self, u: NodeRef, side: str, level: int, op_id: int | None, original: Message
    ) -> None:
        if self.rec.delete_flag:
            self._deflect_link(u, side, level, op_id, original)
            return
        self.validate_level(level)
        cur = self._slot_ref(side, level)
        if cur is not None and self._strictly_closer(cur.key, u.key, side):
            self.send(
                Message(
                    kind=m.GET_LINK,
                    src=self.id,
                    dst=cur.id,
                    op_id=op_id,
                    node=u,
                    side=side,
                    level=level,
                )
            )
            return
        self.adopt(side, level, u)
        self._reply(u, kind=m.SET_LINK, op_id=op_id, level=level, node=self.ref)

    def _strictly_closer(self, cur_key: Key, cand_key: Key, side: str) -> bool:
        # is the current occupant strictly between self and the candidate?
        if side == RIGHT:
            return cur_key < cand_key
        return cur_key > cand_key

    def _deflect_link(
        self, u: NodeRef, side: str, level: int, op_id: int | None, original: Message
    ) -> None:
        # deleting nodes never adopt; park the request while this level's
        # splice is in flight, then pass it to the surviving side
        if level in self._delete_pending:
            self._deferred_links.setdefault(level, []).append(original)
            return
        onward = self._resolved(flip(side), level)
        if onward is not None:
            self.send(
                Message(
                    kind=m.GET_LINK,
                    src=self.id,
                    dst=onward,
                    op_id=op_id,
                    node=u,
                    side=side,
                    level=level,
                )
            )
        else:
            self._reply(u, kind=m.SET_LINK, op_id=op_id, level=level, node=None)

    def _handle_buddy(self, msg: Message) -> None:
        assert msg.node is not None and msg.level is not None and msg.digit is not None
        u = msg.node
        level = msg.level
        side = msg.side
        assert side is not None
        if not self.rec.delete_flag and self.mv.digit(level) == msg.digit:
            self._change_neighbor(u, side, level + 1, msg.op_id, msg)
            return
        # mismatch (or mid-delete): keep scanning away from the requester
        self.validate_level(level)
        onward = self._resolved(flip(side), level)
        if onward is not None:
            self.send(
                Message(
                    kind=m.BUDDY,
                    src=self.id,
                    dst=onward,
                    op_id=msg.op_id,
                    node=u,
                    level=level,
                    digit=msg.digit,
                    side=side,
                )
            )
        else:
            self._reply(u, kind=m.SET_LINK, op_id=msg.op_id, level=level + 1, node=None)

    def _handle_update(self, msg: Message) -> None:
        assert msg.side is not None and msg.level is not None
        self.adopt(msg.side, msg.level, msg.node)

    # --- delete ---

    def start_delete(self, *, op_id: int | None = None) -> int:
        if op_id is None:
            op_id = self.new_op_id()
        if self._own is not None or self._splice_waits:
            self._pending_delete_op = op_id
            return op_id
        self._start_own("delete", op_id, self._delete_flow(op_id))
        return op_id

    def _delete_flow(self, op_id: int):
        self.rec.delete_flag = True
        pending = self._delete_pending
        for level in range(self.rec.top_level(), -1, -1):
            self.validate_level(level)
            right = self._resolved(RIGHT, level)
            if right is not None:
                pending[level] = "splice"
                self.send(
                    Message(
                        kind=m.DELETE,
                        src=self.id,
                        dst=right,
                        op_id=op_id,
                        level=level,
                        sender=self.ref,
                        via=(self.id,),
                    )
                )
            else:
                self._level_resolved(level, None)
        while pending:
            msg = yield _Await(frozenset({m.CONFIRM_DELETE, m.NO_NEIGHBOR}), None, "splice confirmations")
            level = msg.level
            state = pending.get(level)
            if state is None:
                continue
            if msg.kind == m.CONFIRM_DELETE:
                del pending[level]
                self._level_resolved(level, None if msg.synthetic else msg.src)
            elif state == "splice":
                # right side exhausted with nobody alive to splice; tell the
                # left side to drop its pointer instead
                self.validate_level(level)
                left = self._resolved(LEFT, level)
                if left is not None:
                    pending[level] = "nil"
                    self.send(
                        Message(
                            kind=m.SET_NEIGHBOR_NIL,
                            src=self.id,
                            dst=left,
                            op_id=op_id,
                            level=level,
                            sender=self.ref,
                            via=(self.id,),
                        )
                    )
                else:
                    del pending[level]
                    self._level_resolved(level, None)
        self.results[op_id] = {"outcome": DELETED}
        self.net.depart(self.id)

    def _level_resolved(self, level: int, by: int | None) -> None:
        self._resolved_by[level] = by
        for queued in self._deferred_links.pop(level, []):
            assert queued.node is not None and queued.side is not None
            self._deflect_link(queued.node, queued.side, level, queued.op_id, queued)

    def _handle_delete_op(self, msg: Message) -> None:
        assert msg.level is not None and msg.sender is not None
        level = msg.level
        sender = msg.sender
        if self.rec.delete_flag:
            self.validate_level(level)
            right = self._resolved(RIGHT, level)
            if right is not None:
                self.send(
                    Message(
                        kind=m.DELETE,
                        src=self.id,
                        dst=right,
                        op_id=msg.op_id,
                        level=level,
                        sender=sender,
                        via=msg.via + (self.id,),
                    )
                )
            else:
                self._reply(sender, kind=m.NO_NEIGHBOR, op_id=msg.op_id, level=level)
            return
        self.validate_level(level)
        left = self._slot_ref(LEFT, level)
        if left is None:
            self._write_slot(LEFT, level, None)
            self._reply(sender, kind=m.CONFIRM_DELETE, op_id=msg.op_id, level=level)
            return
        self._splice_waits[(msg.op_id, level)] = _SpliceWait(reply_to=sender, via=msg.via)
        self.send(
            Message(
                kind=m.FIND_NEIGHBOR,
                src=self.id,
                dst=left.id,
                op_id=msg.op_id,
                level=level,
                node=self.ref,
                via=msg.via,
            )
        )

    def _handle_find_neighbor(self, msg: Message) -> None:
        assert msg.level is not None and msg.node is not None
        level = msg.level
        requester = msg.node
        if self.rec.delete_flag:
            self.validate_level(level)
            left = self._resolved(LEFT, level)
            if left is not None:
                self.send(
                    Message(
                        kind=m.FIND_NEIGHBOR,
                        src=self.id,
                        dst=left,
                        op_id=msg.op_id,
                        level=level,
                        node=requester,
                        via=msg.via + (self.id,),
                    )
                )
            else:
                self._reply(requester, kind=m.FOUND_NEIGHBOR, op_id=msg.op_id, level=level, node=None)
            return
        self.adopt(RIGHT, level, requester, override=msg.via)
        self._reply(requester, kind=m.FOUND_NEIGHBOR, op_id=msg.op_id, level=level, node=self.ref)

    def _handle_found_neighbor(self, msg: Message) -> None:
        assert msg.level is not None
        wait = self._splice_waits.pop((msg.op_id, msg.level), None)
        if wait is None:
            return
        if msg.node is not None:
            self.adopt(LEFT, msg.level, msg.node, override=wait.via)
        else:
            cur = self.rec.neighbor(LEFT, msg.level)
            if cur is not None and (cur in wait.via or not self.net.is_alive(cur)):
                self._write_slot(LEFT, msg.level, None)
        self._reply(wait.reply_to, kind=m.CONFIRM_DELETE, op_id=msg.op_id, level=msg.level)
        self._maybe_start_pending_delete()

    def _handle_set_neighbor_nil(self, msg: Message) -> None:
        assert msg.level is not None and msg.sender is not None
        level = msg.level
        sender = msg.sender
        if self.rec.delete_flag:
            self.validate_level(level)
            left = self._resolved(LEFT, level)
            if left is not None:
                self.send(
                    Message(
                        kind=m.SET_NEIGHBOR_NIL,
                        src=self.id,
                        dst=left,
                        op_id=msg.op_id,
                        level=level,
                        sender=sender,
                        via=msg.via + (self.id,),
                    )
                )
            else:
                self._reply(sender, kind=m.CONFIRM_DELETE, op_id=msg.op_id, level=level)
            return
        cur = self.rec.neighbor(RIGHT, level)
        if cur is not None and (cur == sender.id or cur in msg.via or not self.net.is_alive(cur)):
            self._write_slot(RIGHT, level, None)
        self._reply(sender, kind=m.CONFIRM_DELETE, op_id=msg.op_id, level=level)

    def _handle_confirm_delete(self, msg: Message) -> None:
        self._feed_own(msg)

    def _handle_no_neighbor(self, msg: Message) -> None:
        self._feed_own(msg)

    # --- range queries ---

    def start_range(self, lo: Key, hi: Key, *, mode: str = "all", op_id: int | None = None) -> int:
        if op_id is None:
            op_id = self.new_op_id()
        self.results[op_id] = {"outcome": "pending", "hits": [], "mode": mode}
        self._range_step(
            Message(
                kind=m.RANGE,
                src=self.id,
                dst=self.id,
                op_id=op_id,
                lo=lo,
                hi=hi,
                mode=mode,
                start=self.ref,
                level=self.rec.max_level,
                dirs="both",
            )
        )
        return op_id

    def _handle_range(self, msg: Message) -> None:
        self._range_step(msg)

    def _range_step(self, msg: Message) -> None:
        assert msg.lo is not None and msg.hi is not None and msg.start is not None
        lo, hi, origin = msg.lo, msg.hi, msg.start
        if self.key < lo:
            self._range_route(msg, lo, RIGHT)
            return
        if self.key > hi:
            self._range_route(msg, hi, LEFT)
            return
        if msg.op_id in self._range_seen:
            return
        self._range_seen.add(msg.op_id)
        if origin.id == self.id:
            self._record_range_hit(msg.op_id, self.ref)
        else:
            self._reply(origin, kind=m.RANGE_RESULT, op_id=msg.op_id, node=self.ref)
        if msg.mode == "first":
            return
        dirs = msg.dirs or "both"
        for side in (RIGHT, LEFT):
            if dirs != "both" and dirs != side:
                continue
            sent_any = False
            for level in range(self.rec.top_level(), -1, -1):
                self.validate_level(level)
                nb = self._slot_ref(side, level)
                if nb is None or not (lo <= nb.key <= hi):
                    continue
                self.send(
                    Message(
                        kind=m.RANGE,
                        src=self.id,
                        dst=nb.id,
                        op_id=msg.op_id,
                        lo=lo,
                        hi=hi,
                        mode=msg.mode,
                        start=origin,
                        level=level,
                        dirs=side,
                    )
                )
                sent_any = True
            if side == RIGHT and not sent_any and self.redundancy > 0:
                for cand in self.rec.redundant_successors(0):
                    ck = self._known_keys.get(cand)
                    if ck is None or cand == self.id:
                        continue
                    if self.net.is_alive(cand) and lo <= ck <= hi:
                        self.send(
                            Message(
                                kind=m.RANGE,
                                src=self.id,
                                dst=cand,
                                op_id=msg.op_id,
                                lo=lo,
                                hi=hi,
                                mode=msg.mode,
                                start=origin,
                                level=0,
                                dirs=RIGHT,
                            )
                        )
                        break

    def _range_route(self, msg: Message, edge: Key, side: str) -> None:
        lvl = min(msg.level if msg.level is not None else 0, self.rec.top_level())
        while lvl >= 0:
            self.validate_level(lvl)
            nb = self._slot_ref(side, lvl)
            if nb is not None and self._moves_toward(nb.key, edge, side):
                self.send(
                    Message(
                        kind=m.RANGE,
                        src=self.id,
                        dst=nb.id,
                        op_id=msg.op_id,
                        lo=msg.lo,
                        hi=msg.hi,
                        mode=msg.mode,
                        start=msg.start,
                        level=lvl,
                        dirs=msg.dirs,
                    )
                )
                return
            lvl -= 1
        # the walk stops at the member's outside neighbor; hop the last step
        self.validate_level(0)
        assert msg.lo is not None and msg.hi is not None
        nb = self._slot_ref(side, 0)
        if nb is not None and msg.lo <= nb.key <= msg.hi:
            self.send(
                Message(
                    kind=m.RANGE,
                    src=self.id,
                    dst=nb.id,
                    op_id=msg.op_id,
                    lo=msg.lo,
                    hi=msg.hi,
                    mode=msg.mode,
                    start=msg.start,
                    level=0,
                    dirs=msg.dirs,
                )
            )
            return
        if side == RIGHT and self.redundancy > 0:
            for cand in self.rec.redundant_successors(0):
                ck = self._known_keys.get(cand)
                if ck is None or cand == self.id:
                    continue
                if self.net.is_alive(cand) and msg.lo <= ck <= msg.hi:
                    self.send(
                        Message(
                            kind=m.RANGE,
                            src=self.id,
                            dst=cand,
                            op_id=msg.op_id,
                            lo=msg.lo,
                            hi=msg.hi,
                            mode=msg.mode,
                            start=msg.start,
                            level=0,
                            dirs=msg.dirs,
                        )
                    )
                    return
        # interval is empty: nothing between the walk's end and its neighbor
        if msg.start.id == self.id:
            self.results[msg.op_id].setdefault("boundary", self.id)
            self.results[msg.op_id]["outcome"] = self.results[msg.op_id].get("outcome", "pending")
        else:
            self._reply(msg.start, kind=m.RANGE_RESULT, op_id=msg.op_id, node=None)

    def _handle_range_result(self, msg: Message) -> None:
        self._record_range_hit(msg.op_id, msg.node)

    def _record_range_hit(self, op_id: int, node: NodeRef | None) -> None:
        res = self.results.setdefault(op_id, {"outcome": "pending", "hits": []})
        if node is not None and node.id not in [h[0] for h in res["hits"]]:
            res["hits"].append((node.id, node.key))
            res["outcome"] = FOUND

    # --- failure notifications ---

    def on_send_failure(self, msg: Message) -> None:
        dead = msg.dst
        self._drop_dead(dead)
        cont = self._own
        if cont is not None and msg.op_id == cont.op_id:
            if cont.op_kind == "insert":
                self._abort_insert(msg)
            else:
                self._feed_own(
                    Message(
                        kind=m.CONFIRM_DELETE,
                        src=dead,
                        dst=self.id,
                        op_id=msg.op_id,
                        level=msg.level,
                        synthetic=True,
                    )
                )
            return
        if msg.kind == m.FIND_NEIGHBOR and msg.node is not None and msg.node.id == self.id:
            # our own leftward probe died; settle the splice with what we have
            self._handle_found_neighbor(
                Message(
                    kind=m.FOUND_NEIGHBOR,
                    src=dead,
                    dst=self.id,
                    op_id=msg.op_id,
                    level=msg.level,
                    node=None,
                    synthetic=True,
                )
            )
            return
        if msg.kind in _REPROCESS_KINDS:
            self.on_message(
                Message(
                    kind=msg.kind,
                    src=self.id,
                    dst=self.id,
                    op_id=msg.op_id,
                    level=msg.level,
                    side=msg.side,
                    digit=msg.digit,
                    key=msg.key,
                    node=msg.node,
                    sender=msg.sender,
                    start=msg.start,
                    lo=msg.lo,
                    hi=msg.hi,
                    mode=msg.mode,
                    dirs=msg.dirs,
                    via=msg.via,
                )
            )

    def _drop_dead(self, dead: int) -> None:
        for level in range(self.rec.top_level() + 1):
            for side in (RIGHT, LEFT):
                if self.rec.neighbor(side, level) == dead:
                    self._write_slot(side, level, None)

    def _abort_insert(self, failed: Message) -> None:
        cont = self._own
        assert cont is not None
        op_id = cont.op_id
        cont.gen.close()
        self._own = None
        linked = self.rec.neighbor(RIGHT, 0) is not None or self.rec.neighbor(LEFT, 0) is not None
        if linked:
            # already woven into level 0; settle for the levels built so far
            self.rec.max_level = max(self.rec.max_level, self._highest_linked_level())
            self.results[op_id] = {"outcome": INSERTED, "max_level": self.rec.max_level, "partial": True}
        else:
            self.results[op_id] = {"outcome": ABORTED, "reason": f"lost contact with {failed.dst}"}
        self._maybe_start_pending_delete()

    def _highest_linked_level(self) -> int:
        top = 0
        for level in range(self.rec.top_level() + 1):
            if self.rec.neighbor(RIGHT, level) is not None or self.rec.neighbor(LEFT, level) is not None:
                top = level
        return top


_DISPATCH: dict[str, Callable[[Node, Message], None]] = {
    m.SEARCH: Node._handle_search,
    m.FOUND: Node._handle_search_result,
    m.NOT_FOUND: Node._handle_search_result,
    m.GET_MAX_LEVEL: Node._handle_get_max_level,
    m.RET_MAX_LEVEL: Node._handle_ret_max_level,
    m.GET_NEIGHBOR: Node._handle_get_neighbor,
    m.RET_NEIGHBOR: Node._handle_ret_neighbor,
    m.GET_LINK: Node._handle_get_link,
    m.SET_LINK: Node._handle_set_link,
    m.BUDDY: Node._handle_buddy,
    m.UPDATE: Node._handle_update,
    m.DELETE: Node._handle_delete_op,
    m.CONFIRM_DELETE: Node._handle_confirm_delete,
    m.NO_NEIGHBOR: Node._handle_no_neighbor,
    m.FIND_NEIGHBOR: Node._handle_find_neighbor,
    m.FOUND_NEIGHBOR: Node._handle_found_neighbor,
    m.SET_NEIGHBOR_NIL: Node._handle_set_neighbor_nil,
    m.RANGE: Node._handle_range,
    m.RANGE_RESULT: Node._handle_range_result,
}
