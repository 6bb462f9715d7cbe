"""Scripted workloads against a live world.

Line grammar (# comments and blank lines ignored):

    node <id> key <int> [mv <digits>]   declare a node before inserting it
    insert <key> [via <id>]             join; id = key unless declared
    delete <id>                         voluntary leave
    search <key> from <id>              exact search
    crash <id> [at <tick>]              fail-stop, immediate or scheduled
    sweep-all                           repair rounds until a quiet round
    quiesce                             drain the network (barrier)

Directives between two barriers start at the same tick, so one group is
one batch of concurrent operations. The script ends with an implicit
barrier.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core.records import Key, key_from_int
from .protocol.messages import NodeRef
from .repair import RepairStats, run_repair_rounds
from .world import World


class WorkloadError(ValueError):
    def __init__(self, line_no: int, text: str, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}: {text!r}")


@dataclass(frozen=True)
class Directive:
    verb: str
    line_no: int
    raw: str
    node_id: int | None = None
    key: Key | None = None
    via: int | None = None
    at: int | None = None
    digits: tuple[int, ...] = ()


@dataclass
class OpRecord:
    line_no: int
    verb: str
    node_id: int
    op_id: int
    outcome: dict | None = None


@dataclass
class WorkloadResult:
    ops: list[OpRecord] = field(default_factory=list)
    sweeps: list[RepairStats] = field(default_factory=list)

    def outcomes(self, verb: str | None = None) -> list[dict | None]:
        return [op.outcome for op in self.ops if verb is None or op.verb == verb]


def parse_script(text: str) -> list[Directive]:
    directives: list[Directive] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        verb = tokens[0]
        try:
            directives.append(_parse_tokens(verb, tokens[1:], line_no, line))
        except WorkloadError:
            raise
        except (ValueError, IndexError) as exc:
            raise WorkloadError(line_no, line, str(exc)) from exc
    return directives


def _parse_tokens(verb: str, args: list[str], line_no: int, raw: str) -> Directive:
    if verb == "node":
        node_id = int(args[0])
        if args[1] != "key":
            raise WorkloadError(line_no, raw, "expected 'key'")
        key = key_from_int(int(args[2]))
        digits: tuple[int, ...] = ()
        if len(args) > 3:
            if args[3] != "mv":
                raise WorkloadError(line_no, raw, "expected 'mv'")
            digits = tuple(int(c) for c in args[4])
        return Directive("node", line_no, raw, node_id=node_id, key=key, digits=digits)
    if verb == "insert":
        key = key_from_int(int(args[0]))
        via = None
        if len(args) > 1:
            if args[1] != "via":
                raise WorkloadError(line_no, raw, "expected 'via'")
            via = int(args[2])
        return Directive("insert", line_no, raw, key=key, via=via)
    if verb == "delete":
        return Directive("delete", line_no, raw, node_id=int(args[0]))
    if verb == "search":
        key = key_from_int(int(args[0]))
        if args[1] != "from":
            raise WorkloadError(line_no, raw, "expected 'from'")
        return Directive("search", line_no, raw, key=key, node_id=int(args[2]))
    if verb == "crash":
        node_id = int(args[0])
        at = None
        if len(args) > 1:
            if args[1] != "at":
                raise WorkloadError(line_no, raw, "expected 'at'")
            at = int(args[2])
        return Directive("crash", line_no, raw, node_id=node_id, at=at)
    if verb in ("sweep-all", "quiesce"):
        if args:
            raise WorkloadError(line_no, raw, "unexpected arguments")
        return Directive(verb, line_no, raw)
    raise WorkloadError(line_no, raw, f"unknown directive {verb!r}")


def run_workload(
    world: World,
    directives: list[Directive],
    *,
    max_steps: int | None = None,
    repair_rounds: int = 64,
) -> WorkloadResult:
    net = world.net
    result = WorkloadResult()
    declared: dict[Key, Directive] = {}
    run_kwargs = {} if max_steps is None else {"max_steps": max_steps}
    for d in directives:
        if d.verb == "node":
            if d.node_id in world.records:
                raise WorkloadError(d.line_no, d.raw, "node id already in the world")
            declared[d.key] = d
        elif d.verb == "insert":
            decl = declared.pop(d.key, None)
            node_id = decl.node_id if decl is not None else _int_key_id(d.key, d)
            digits = decl.digits if decl is not None else ()
            node = world.add_node(node_id, d.key, digits=digits)
            if d.via is None:
                intro = None
            else:
                if not net.is_alive(d.via):
                    raise WorkloadError(d.line_no, d.raw, f"introducer {d.via} not alive")
                intro = NodeRef(d.via, world.records[d.via].key)
            op_id = node.start_insert(intro)
            result.ops.append(OpRecord(d.line_no, "insert", node_id, op_id))
        elif d.verb == "delete":
            if not net.is_alive(d.node_id):
                raise WorkloadError(d.line_no, d.raw, f"node {d.node_id} not alive")
            op_id = world.nodes[d.node_id].start_delete()
            result.ops.append(OpRecord(d.line_no, "delete", d.node_id, op_id))
        elif d.verb == "search":
            if not net.is_alive(d.node_id):
                raise WorkloadError(d.line_no, d.raw, f"node {d.node_id} not alive")
            op_id = world.nodes[d.node_id].start_search(d.key)
            result.ops.append(OpRecord(d.line_no, "search", d.node_id, op_id))
        elif d.verb == "crash":
            if d.node_id not in world.records:
                raise WorkloadError(d.line_no, d.raw, f"unknown node {d.node_id}")
            at = d.at if d.at is not None else net.now
            if at < net.now:
                raise WorkloadError(d.line_no, d.raw, "crash tick already passed")
            net.schedule_crash(d.node_id, at)
        elif d.verb == "quiesce":
            net.run_until_quiescent(**run_kwargs)
        elif d.verb == "sweep-all":
            net.run_until_quiescent(**run_kwargs)
            stats = run_repair_rounds(
                net, world.nodes, max_rounds=repair_rounds, step_limit=max_steps
            )
            result.sweeps.append(stats)
    net.run_until_quiescent(**run_kwargs)
    for op in result.ops:
        op.outcome = world.nodes[op.node_id].results.get(op.op_id)
    return result


def _int_key_id(key: Key, d: Directive) -> int:
    value = int.from_bytes(key, "big")
    return value
