"""Checkpointed reverse mode by recursive bisection of the step count.

To differentiate a computation of ``N`` steps: if ``N <= tau`` run plain
reverse mode over it.  Otherwise snapshot it at ``N // 2``, differentiate
the second half (snapshot to result) first, which yields the cotangent of
the snapshot, then differentiate the first half (input to snapshot) against
that cotangent.  Only one base-case tape is alive at any time, and at most
one snapshot per recursion level is held.

Segments are described by where they start (a :class:`~vlad.checkpointing.Task`),
how many steps they span, and whether they run to completion or stop at a
snapshot.  The cotangent of a snapshot is a tuple of reals aligned with
:func:`~vlad.checkpointing.checkpoint_leaves`.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import metrics
from .ad import gather, seed, sweep, taping, track, untrack
from .checkpointing import (Initial, Resumable, Task, checkpoint, checkpoint_leaves,
                            map_checkpoint_leaves, primops)
from .errors import ShapeMismatch, VladError, VladTypeError
from .machine import DEFAULT_TAU, UNLIMITED, Checkpoint, Final, Interrupted, inject, run
from .runtime import Closure, Tracked, add, primal_of, show


@dataclass(frozen=True)
class BinomialConfig:
    tau: int = DEFAULT_TAU

    def __post_init__(self):
        if not isinstance(self.tau, int) or self.tau < 1:
            raise ValueError(f"tau must be a positive integer, got {self.tau!r}")


def binomial_j(f, x, ybar, cfg: BinomialConfig | None = None):
    """Drop-in replacement for :func:`vlad.ad.reverse_j` with bounded tape size."""
    if type(f) is not Closure:
        raise VladTypeError(f"cannot apply non-closure {show(f)}")
    return binomial_task(Initial(f, x), ybar, cfg)


def binomial_task(task: Task, ybar, cfg: BinomialConfig | None = None, steps: int | None = None):
    """``(result, input cotangent)`` of ``task`` pulled back along ``ybar``.

    ``steps`` may be supplied when the task's length is already known;
    otherwise it is measured with a full run first.
    """
    cfg = cfg or BinomialConfig()
    if steps is None:
        _, steps = primops(task, cfg.tau)
    return _segment(task, steps, True, ybar, None, cfg.tau, 1)


def checkpoint_cotangent_seed(u: Checkpoint, ubar, adj: list, tape) -> None:
    """Add ``ubar`` onto the adjoints of ``u``'s leaves that live on ``tape``."""
    leaves = checkpoint_leaves(u)
    if len(leaves) != len(ubar):
        raise ShapeMismatch(
            f"checkpoint has {len(leaves)} real leaves but its cotangent has {len(ubar)}")
    for leaf, g in zip(leaves, ubar):
        if type(leaf) is Tracked and leaf.tape is tape:
            i = leaf.index
            adj[i] = add(adj[i], g)


def _assert_same_snapshot(expected: Checkpoint, got: Checkpoint) -> None:
    a = checkpoint_leaves(expected)
    b = checkpoint_leaves(got)
    if (len(a) != len(b) or expected.e is not got.e
            or any(primal_of(p) != primal_of(q) for p, q in zip(a, b))):
        raise ShapeMismatch("recomputed checkpoint differs from the original one")


def _segment(task, length, to_end, ybar, expected_end, tau, depth):
    m = metrics.current()
    if m is not None:
        m.at_depth(depth)
    if length <= tau:
        return _base_case(task, length, to_end, ybar, expected_end, tau)

    n = length // 2
    u = checkpoint(task, n, tau)
    slots = 0
    if m is not None:
        m.splits.append((depth, length, n))
        slots = len(checkpoint_leaves(u))
        m.checkpoint_acquired(slots)
    try:
        y, ubar = _segment(Resumable(u), length - n, to_end, ybar, expected_end, tau, depth + 1)
        _, xbar = _segment(task, n, False, ubar, u, tau, depth + 1)
    finally:
        if m is not None:
            m.checkpoint_released(slots)
    return y, xbar


def _base_case(task, length, to_end, ybar, expected_end, tau):
    limit = UNLIMITED if to_end else length
    with taping() as tape:
        if type(task) is Initial:
            f = task.f
            xt = track(task.x, tape)
            state = inject(None, 0, limit, (f.param, xt, f.env), f.body)
        else:
            cpt = map_checkpoint_leaves(task.cp, tape.new_input)
            state = inject(cpt.k, 0, limit, cpt.env, cpt.e)
        out = run(state, tau)
        adj = [0.0] * len(tape.entries)
        if to_end:
            if type(out) is not Final or out.n != length:
                raise VladError("segment length changed between runs")
            result = untrack(out.value, tape)
            seed(adj, tape, out.value, ybar)
        else:
            if type(out) is not Interrupted:
                raise VladError("segment finished before its recorded length")
            _assert_same_snapshot(expected_end, out.checkpoint)
            result = expected_end
            checkpoint_cotangent_seed(out.checkpoint, ybar, adj, tape)
        sweep(tape, adj)
        if type(task) is Initial:
            xbar = gather(xt, tape, adj)
        else:
            xbar = tuple(adj[i] for i in tape.inputs)
    return result, xbar
