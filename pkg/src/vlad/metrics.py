"""Counters and peak trackers for space/time accounting.

Storage is counted in slots (tape nodes, real leaves held by live
checkpoints) rather than bytes.  A collector is installed per episode with
:func:`collecting` or :func:`with_metrics`; instrumented code asks for
:func:`current` and does nothing when it is ``None``.
"""

from __future__ import annotations

import contextvars
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class MetricsReport:
    total_dispatch_steps: int = 0
    basis_op_count: int = 0
    peak_tape_nodes: int = 0
    peak_live_checkpoints: int = 0
    peak_checkpoint_real_slots: int = 0
    recursion_depth: int = 0
    wall_time_ms: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


class Collector:
    def __init__(self):
        self.total_dispatch_steps = 0
        self.basis_op_count = 0
        self.peak_tape_nodes = 0
        self.peak_live_checkpoints = 0
        self.peak_checkpoint_real_slots = 0
        self.recursion_depth = 0
        self.live_tapes: list = []
        self.live_checkpoints = 0
        self.live_slots = 0
        # (depth, segment_length, split_point) in visiting order
        self.splits: list[tuple[int, int, int]] = []

    def tape_opened(self, tape) -> None:
        self.live_tapes.append(tape)

    def tape_closed(self, tape) -> None:
        # tapes only grow while open, so the sum peaks just before some close
        live = sum(t.node_count for t in self.live_tapes)
        if live > self.peak_tape_nodes:
            self.peak_tape_nodes = live
        for i in range(len(self.live_tapes) - 1, -1, -1):
            if self.live_tapes[i] is tape:
                del self.live_tapes[i]
                break

    def checkpoint_acquired(self, slots: int) -> None:
        self.live_checkpoints += 1
        self.live_slots += slots
        self.peak_live_checkpoints = max(self.peak_live_checkpoints, self.live_checkpoints)
        self.peak_checkpoint_real_slots = max(self.peak_checkpoint_real_slots, self.live_slots)

    def checkpoint_released(self, slots: int) -> None:
        self.live_checkpoints -= 1
        self.live_slots -= slots

    def at_depth(self, depth: int) -> None:
        if depth > self.recursion_depth:
            self.recursion_depth = depth

    def report(self, wall_time_ms: float = 0.0) -> MetricsReport:
        return MetricsReport(
            total_dispatch_steps=self.total_dispatch_steps,
            basis_op_count=self.basis_op_count,
            peak_tape_nodes=self.peak_tape_nodes,
            peak_live_checkpoints=self.peak_live_checkpoints,
            peak_checkpoint_real_slots=self.peak_checkpoint_real_slots,
            recursion_depth=self.recursion_depth,
            wall_time_ms=wall_time_ms,
        )


_current: contextvars.ContextVar[Collector | None] = contextvars.ContextVar(
    "vlad_metrics", default=None)


def current() -> Collector | None:
    return _current.get()


@contextmanager
def collecting():
    c = Collector()
    token = _current.set(c)
    try:
        yield c
    finally:
        _current.reset(token)


def with_metrics(action):
    """Run ``action()`` under a fresh collector; return ``(result, MetricsReport)``."""
    with collecting() as c:
        t0 = time.perf_counter()
        result = action()
        elapsed = (time.perf_counter() - t0) * 1000.0
    return result, c.report(elapsed)
