"""Local correctness checker.

Six per-node, per-level conditions; all of them hold exactly when the
structure is the skip graph for its keys and vectors. References to dead
or departed nodes resolve to ⊥ before any condition is evaluated.

1. A right neighbor, when present, has a strictly greater key.
2. A left neighbor, when present, has a strictly smaller key.
3. A right neighbor's left slot at the same level points back.
4. A left neighbor's right slot at the same level points back.
5. The right neighbor one level up is the nearest right neighbor at this
   level whose vector matches one digit further (⊥ if none).
6. Mirror of 5 on the left.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .records import LEFT, RIGHT, GraphSnapshot, NodeRecord


@dataclass(frozen=True)
class Violation:
    node_id: int
    level: int
    constraint: int
    detail: str


@dataclass
class ConstraintReport:
    violations: list[Violation] = field(default_factory=list)

    def empty(self) -> bool:
        return not self.violations

    def add(self, node_id: int, level: int, constraint: int, detail: str) -> None:
        self.violations.append(Violation(node_id, level, constraint, detail))

    def summary(self) -> str:
        if not self.violations:
            return "clean"
        return "; ".join(
            f"node {v.node_id} level {v.level} c{v.constraint}: {v.detail}"
            for v in self.violations[:20]
        )


def check_constraints(g: GraphSnapshot) -> ConstraintReport:
    report = ConstraintReport()
    hop_cap = len(g.alive) + 1
    for node_id in sorted(g.alive):
        rec = g.nodes[node_id]
        top = rec.top_level()
        for level in range(top + 1):
            _check_order_and_backpointers(g, rec, level, report)
        for target_level in range(1, top + 2):
            _check_interlevel(g, rec, target_level, RIGHT, 5, hop_cap, report)
            _check_interlevel(g, rec, target_level, LEFT, 6, hop_cap, report)
    return report


def is_skip_graph(g: GraphSnapshot) -> bool:
    """Executable form of the equivalence: clean report ⇔ skip graph."""
    return check_constraints(g).empty()


def _check_order_and_backpointers(
    g: GraphSnapshot, rec: NodeRecord, level: int, report: ConstraintReport
) -> None:
    r = g.resolve(rec.neighbor(RIGHT, level))
    if r is not None:
        r_rec = g.nodes[r]
        if r_rec.key <= rec.key:
            report.add(rec.node_id, level, 1, f"right neighbor {r} not greater")
        if g.resolve(r_rec.neighbor(LEFT, level)) != rec.node_id:
            report.add(rec.node_id, level, 3, f"right neighbor {r} does not point back")
    l = g.resolve(rec.neighbor(LEFT, level))
    if l is not None:
        l_rec = g.nodes[l]
        if l_rec.key >= rec.key:
            report.add(rec.node_id, level, 2, f"left neighbor {l} not smaller")
        if g.resolve(l_rec.neighbor(RIGHT, level)) != rec.node_id:
            report.add(rec.node_id, level, 4, f"left neighbor {l} does not point back")


def _check_interlevel(
    g: GraphSnapshot,
    rec: NodeRecord,
    target_level: int,
    side: str,
    constraint: int,
    hop_cap: int,
    report: ConstraintReport,
) -> None:
    walk_level = target_level - 1
    want = rec.mv.prefix(target_level)
    expected: int | None = None
    cur = g.resolve(rec.neighbor(side, walk_level))
    hops = 0
    while cur is not None and hops < hop_cap:
        cur_rec = g.nodes[cur]
        if cur_rec.mv.prefix(target_level) == want:
            expected = cur
            break
        cur = g.resolve(cur_rec.neighbor(side, walk_level))
        hops += 1
    actual = g.resolve(rec.neighbor(side, target_level))
    if actual != expected:
        report.add(
            rec.node_id,
            target_level,
            constraint,
            f"{side} slot is {actual}, nearest matching lower-level neighbor is {expected}",
        )
