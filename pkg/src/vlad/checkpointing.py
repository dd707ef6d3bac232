"""General-purpose checkpointing on top of the CPS machine.

A :class:`Task` is either a fresh application ``Initial(f, x)`` or a
``Resumable(cp)`` snapshot.  Step counts are relative to the start of the
task: a resumed task starts counting from zero, not from the count stored
in its checkpoint.

This module also defines the canonical order of the real leaves reachable
from a checkpoint (environment bindings oldest-first, then continuation
frames outermost-first, each frame's environment before its values).
Shared environment nodes, closures and pairs are visited once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ComputationCompletedBeforeLimit, VladTypeError
from .machine import (APP_ARG, BIN_RHS, DEFAULT_TAU, J_PRIMAL, J_THIRD, UN_OP, UNLIMITED,
                      Checkpoint, Final, inject, run)
from .runtime import Bundle, Closure, Pair, Tracked, show


@dataclass(frozen=True, eq=False)
class Initial:
    f: Closure
    x: object


@dataclass(frozen=True, eq=False)
class Resumable:
    cp: Checkpoint


Task = Union[Initial, Resumable]


def start(task: Task, limit=UNLIMITED):
    if type(task) is Initial:
        f = task.f
        if type(f) is not Closure:
            raise VladTypeError(f"cannot apply non-closure {show(f)}")
        return inject(None, 0, limit, (f.param, task.x, f.env), f.body)
    cp = task.cp
    return inject(cp.k, 0, limit, cp.env, cp.e)


def primops(task: Task, tau: int = DEFAULT_TAU):
    """Run ``task`` to completion; return ``(value, steps)``."""
    out = run(start(task), tau)
    return out.value, out.n


def checkpoint(task: Task, n: int, tau: int = DEFAULT_TAU) -> Checkpoint:
    """Run the first ``n`` steps of ``task`` and return the snapshot."""
    if n < 0:
        raise ValueError("step count must be non-negative")
    out = run(start(task, n), tau)
    if type(out) is Final:
        raise ComputationCompletedBeforeLimit(
            f"computation finished after {out.n} steps, before the limit {n}")
    return out.checkpoint


def resume(cp: Checkpoint, tau: int = DEFAULT_TAU):
    """Complete a snapshot; return ``(value, steps executed after it)``."""
    return primops(Resumable(cp), tau)


# --------------------------------------------------------------------------
# canonical traversal of checkpoint contents

_LEAF_TYPES = (float, Bundle, Tracked)


def _env_chain(env, seen):
    # unvisited prefix of the chain, oldest binding first
    chain = []
    while env is not None and id(env) not in seen:
        seen[id(env)] = None
        chain.append(env)
        env = env[2]
    chain.reverse()
    return chain, env


def _collect_value(v, out, seen):
    t = type(v)
    if t in _LEAF_TYPES:
        out.append(v)
    elif t is Pair:
        if id(v) not in seen:
            seen[id(v)] = None
            _collect_value(v.first, out, seen)
            _collect_value(v.second, out, seen)
    elif t is Closure:
        if id(v) not in seen:
            seen[id(v)] = None
            _collect_env(v.env, out, seen)


def _collect_env(env, out, seen):
    chain, _ = _env_chain(env, seen)
    for node in chain:
        _collect_value(node[1], out, seen)


def _frame_parts(frame):
    """(environment or None, captured values) for one frame."""
    tag = frame[0]
    if tag == APP_ARG or tag == BIN_RHS:
        return None, (frame[-2],)
    if tag == UN_OP:
        return None, ()
    if tag == J_PRIMAL:
        return frame[4], (frame[2],)
    if tag == J_THIRD:
        return None, (frame[2], frame[3])
    # APP_FN, IF_TEST, BIN_LHS, J_FN: environment in the slot before the link
    return frame[-2], ()


def _outermost_first(k):
    out = []
    while k is not None:
        out.append(k)
        k = k[-1]
    out.reverse()
    return out


def checkpoint_leaves(cp: Checkpoint) -> list:
    """Real leaves reachable from ``cp`` in canonical order."""
    out: list = []
    seen: dict = {}
    _collect_env(cp.env, out, seen)
    for frame in _outermost_first(cp.k):
        env, values = _frame_parts(frame)
        if env is not None:
            _collect_env(env, out, seen)
        for v in values:
            _collect_value(v, out, seen)
    return out


class _Mapper:
    def __init__(self, fn):
        self.fn = fn
        self.memo: dict = {}

    def value(self, v):
        t = type(v)
        if t in _LEAF_TYPES:
            return self.fn(v)
        if t is Pair:
            new = self.memo.get(id(v))
            if new is None:
                self.memo[id(v)] = new = Pair(None, None)
                new.first = self.value(v.first)
                new.second = self.value(v.second)
            return new
        if t is Closure:
            new = self.memo.get(id(v))
            if new is None:
                self.memo[id(v)] = new = Closure(v.param, v.body, None)
                new.env = self.env(v.env)
            return new
        return v

    def env(self, env):
        if env is None:
            return None
        memo = self.memo
        chain, rest = _env_chain(env, memo)
        parent = None if rest is None else memo[id(rest)]
        for node in chain:
            parent = (node[0], self.value(node[1]), parent)
            memo[id(node)] = parent
        return memo[id(env)]

    def frame(self, frame, link):
        tag = frame[0]
        if tag == APP_ARG or tag == BIN_RHS:
            return frame[:-2] + (self.value(frame[-2]), link)
        if tag == UN_OP:
            return frame[:-1] + (link,)
        if tag == J_PRIMAL:
            env = self.env(frame[4])
            return (tag, frame[1], self.value(frame[2]), frame[3], env, link)
        if tag == J_THIRD:
            return (tag, frame[1], self.value(frame[2]), self.value(frame[3]), link)
        return frame[:-2] + (self.env(frame[-2]), link)


def map_checkpoint_leaves(cp: Checkpoint, fn) -> Checkpoint:
    """Copy of ``cp`` with every real leaf replaced by ``fn(leaf)``, called in canonical order.

    Sharing among environment nodes, closures and pairs is preserved.
    """
    m = _Mapper(fn)
    env = m.env(cp.env)
    link = None
    for frame in _outermost_first(cp.k):
        link = m.frame(frame, link)
    return Checkpoint(link, cp.l, env, cp.e)
