"""Deterministic discrete-event message network.

One tick is the unit message delay; handler execution is charged zero
ticks. Events are processed in (deliver_at, seq) order, which makes every
run a pure function of (seed, config, workload).

Crash semantics are atomic: from its crash tick onward a node receives
nothing and sends nothing; an in-flight message toward it bounces back to
the sender as a failure notification at the tick the delivery would have
happened, and in-flight messages from it are discarded.
"""
from __future__ import annotations

import heapq
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable

from .seeding import derive_seed

DEFAULT_STEP_LIMIT = 20_000_000


class StepLimitExceeded(RuntimeError):
    def __init__(self, limit: int, pending: list[str]):
        self.limit = limit
        self.pending = pending
        dump = "\n".join(pending[:20])
        super().__init__(f"step limit {limit} exhausted; pending events:\n{dump}")


@dataclass(frozen=True)
class NetworkConfig:
    seed: int = 0
    min_delay: int = 1
    max_delay: int = 1
    delivery_jitter: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.min_delay <= self.max_delay:
            raise ValueError("need 1 <= min_delay <= max_delay")


@dataclass
class OpStats:
    messages: int = 0
    first_tick: int | None = None
    last_tick: int | None = None

    def latency(self) -> int:
        if self.first_tick is None or self.last_tick is None:
            return 0
        return self.last_tick - self.first_tick


@dataclass
class Metrics:
    delivered_by_kind: Counter = field(default_factory=Counter)
    deliveries_per_node: Counter = field(default_factory=Counter)
    per_op: dict[int, OpStats] = field(default_factory=dict)
    link_writes: int = 0
    crashes: int = 0
    departures: int = 0
    bounces: int = 0

    def total_delivered(self) -> int:
        return sum(self.delivered_by_kind.values())

    def op_stats(self, op_id: int) -> OpStats:
        return self.per_op.setdefault(op_id, OpStats())


class Network:
    """Event queue, channels, liveness oracle, trace and metrics capture."""

    def __init__(self, config: NetworkConfig, *, capture_trace: bool = False):
        self.config = config
        self.handlers: dict[int, Any] = {}
        self.metrics = Metrics()
        self.trace: list[str] | None = [] if capture_trace else None
        self.write_log: list[tuple] | None = None
        self._alive: set[int] = set()
        self._heap: list[tuple[int, int, str, Any]] = []
        self._seq = 0
        self._now = 0
        self._channel_rng: dict[tuple[int, int], random.Random] = {}
        self._channel_last: dict[tuple[int, int], int] = {}

    # -- registration and liveness -------------------------------------------

    def register(self, node_id: int, handler: Any) -> None:
        self.handlers[node_id] = handler
        self._alive.add(node_id)

    def is_alive(self, node_id: int) -> bool:
        return node_id in self._alive

    def alive_ids(self) -> set[int]:
        return set(self._alive)

    @property
    def now(self) -> int:
        return self._now

    # -- scheduling -----------------------------------------------------------

    def _push(self, at: int, action: str, payload: Any) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (at, self._seq, action, payload))

    def send(self, msg: Any) -> None:
        """Schedule delivery of msg. Delivery to a dead node bounces."""
        delay = self._draw_delay(msg.src, msg.dst)
        self._push(self._now + delay, "deliver", msg)

    def _draw_delay(self, src: int, dst: int) -> int:
        cfg = self.config
        if not cfg.delivery_jitter or cfg.min_delay == cfg.max_delay:
            return cfg.min_delay
        chan = (src, dst)
        rng = self._channel_rng.get(chan)
        if rng is None:
            rng = random.Random(derive_seed(cfg.seed, "channel", src, dst))
            self._channel_rng[chan] = rng
        delay = rng.randint(cfg.min_delay, cfg.max_delay)
        # per-channel FIFO: delivery times never decrease on one channel
        floor = self._channel_last.get(chan, 0) - self._now
        delay = max(delay, floor)
        self._channel_last[chan] = self._now + delay
        return delay

    def schedule_call(self, at: int, fn: Callable[[], None], label: str = "call") -> None:
        if at < self._now:
            raise ValueError("cannot schedule in the past")
        self._push(at, "call", (label, fn))

    def schedule_crash(self, node_id: int, at: int) -> None:
        self._push(at, "down", ("crash", node_id))

    def depart(self, node_id: int) -> None:
        """Graceful leave, effective immediately; same delivery semantics."""
        self._take_down(node_id, "depart")

    # -- event loop -----------------------------------------------------------

    def run_until_quiescent(self, max_steps: int = DEFAULT_STEP_LIMIT) -> int:
        steps = 0
        while self._heap:
            if steps >= max_steps:
                raise StepLimitExceeded(max_steps, self._dump_pending())
            tick, _seq, action, payload = heapq.heappop(self._heap)
            self._now = max(self._now, tick)
            steps += 1
            if action == "deliver":
                self._process_delivery(tick, payload)
            elif action == "call":
                _label, fn = payload
                fn()
            elif action == "down":
                reason, node_id = payload
                self._take_down(node_id, reason)
        return steps

    def _process_delivery(self, tick: int, msg: Any) -> None:
        if msg.src not in self._alive and msg.src != msg.dst:
            return  # sender crashed while the message was in flight
        if msg.dst not in self._alive:
            self._bounce(msg)
            return
        if self.trace is not None:
            self.trace.append(f"t={tick} {msg.src} -> {msg.dst} {msg.kind} {msg.trace_payload()}")
        m = self.metrics
        m.delivered_by_kind[msg.kind] += 1
        m.deliveries_per_node[msg.dst] += 1
        if msg.op_id is not None:
            stats = m.op_stats(msg.op_id)
            stats.messages += 1
            if stats.first_tick is None:
                stats.first_tick = tick
            stats.last_tick = tick
        self.handlers[msg.dst].on_message(msg)

    def _bounce(self, msg: Any) -> None:
        self.metrics.bounces += 1
        if msg.src in self._alive:
            self.handlers[msg.src].on_send_failure(msg)

    def _take_down(self, node_id: int, reason: str) -> None:
        if node_id not in self._alive:
            return
        self._alive.discard(node_id)
        if reason == "crash":
            self.metrics.crashes += 1
        else:
            self.metrics.departures += 1
        if self.write_log is not None:
            self.write_log.append((self._now, "down", node_id, reason))

    def _dump_pending(self) -> list[str]:
        out = []
        for tick, seq, action, payload in sorted(self._heap)[:50]:
            if action == "deliver":
                out.append(f"t={tick} seq={seq} {payload.src}->{payload.dst} {payload.kind}")
            else:
                out.append(f"t={tick} seq={seq} {action} {payload!r}")
        return out

    # -- instrumentation hooks ------------------------------------------------

    def enable_write_log(self) -> None:
        self.write_log = []

    def log_link_write(
        self, node_id: int, side: str, level: int, old: int | None, new: int | None
    ) -> None:
        self.metrics.link_writes += 1
        if self.write_log is not None:
            self.write_log.append((self._now, "write", node_id, side, level, old, new))


def liveness_probe(net: Network, asker: int, target: int) -> bool:
    """Truthful failure detector; stands in for timeout-based detection."""
    del asker  # symmetric answer; the asker only matters for realism
    return net.is_alive(target)
