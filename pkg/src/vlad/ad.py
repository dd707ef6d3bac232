"""Forward mode (bundles) and reverse mode (Wengert tape) over ground (co)tangents.

The operators take the function application as a parameter so that the
direct evaluator and the CPS machine can share them.  When ``apply`` is
omitted the CPS machine is used.
"""

from __future__ import annotations

from . import metrics
from .errors import ClosureInCotangentPosition, NotABundle, ShapeMismatch
from .runtime import (Bundle, Closure, Pair, Tape, Tracked, add, fresh_level, is_numeric,
                      mul, show)


def _default_apply(f, v):
    from .machine import apply_closure
    return apply_closure(f, v)


# --------------------------------------------------------------------------
# forward mode


def bundle(x, xt, tag: int | None = None):
    """Pair every real leaf of ``x`` with the matching leaf of ``xt``."""
    if tag is None:
        tag = fresh_level()
    tx = type(x)
    if is_numeric(x):
        if not is_numeric(xt):
            raise ShapeMismatch(f"tangent {show(xt)} does not match real {show(x)}")
        return Bundle(x, xt, tag)
    if tx is bool:
        if type(xt) is not bool:
            raise ShapeMismatch(f"tangent {show(xt)} does not match boolean")
        return x
    if tx is Pair:
        if type(xt) is not Pair:
            raise ShapeMismatch(f"tangent {show(xt)} does not match pair {show(x)}")
        return Pair(bundle(x.first, xt.first, tag), bundle(x.second, xt.second, tag))
    raise ShapeMismatch(f"cannot bundle {show(x)}")


def unbundle(v, tag: int | None = None):
    """Inverse of :func:`bundle`; every real leaf must be a bundle."""
    t = type(v)
    if t is Bundle:
        if tag is not None and v.tag != tag:
            raise NotABundle(f"{show(v)} belongs to another forward episode")
        return v.primal, v.tangent
    if t is bool:
        return v, v
    if t is Pair:
        p1, t1 = unbundle(v.first, tag)
        p2, t2 = unbundle(v.second, tag)
        return Pair(p1, p2), Pair(t1, t2)
    raise NotABundle(f"{show(v)} is not bundled")


def _split_forward(v, tag):
    # like unbundle, but leaves that never met the input get a zero tangent
    t = type(v)
    if t is Bundle and v.tag == tag:
        return v.primal, v.tangent
    if is_numeric(v):
        return v, 0.0
    if t is bool:
        return v, v
    if t is Pair:
        p1, t1 = _split_forward(v.first, tag)
        p2, t2 = _split_forward(v.second, tag)
        return Pair(p1, p2), Pair(t1, t2)
    raise ClosureInCotangentPosition(f"forward-mode result {show(v)} has no ground tangent")


def forward_j(f, x, xt, apply=None):
    """Return ``(y, y_tangent)`` for ``y = f(x)`` pushed forward along ``xt``."""
    apply = apply or _default_apply
    tag = fresh_level()
    y = apply(f, bundle(x, xt, tag))
    return _split_forward(y, tag)


# --------------------------------------------------------------------------
# reverse mode


def track(x, tape: Tape):
    """Replace every real leaf of ``x`` by a fresh input slot on ``tape``."""
    t = type(x)
    if is_numeric(x):
        return tape.new_input(x)
    if t is bool:
        return x
    if t is Pair:
        return Pair(track(x.first, tape), track(x.second, tape))
    raise ClosureInCotangentPosition(f"cannot track {show(x)}: only ground data has a cotangent")


def untrack(v, tape: Tape):
    """Drop ``tape``'s tracking from ``v``; tracking by other tapes is kept."""
    t = type(v)
    if t is Tracked and v.tape is tape:
        return v.primal
    if t is Pair:
        return Pair(untrack(v.first, tape), untrack(v.second, tape))
    return v


def seed(adj: list, tape: Tape, y, ybar) -> None:
    """Add the output cotangent ``ybar`` onto the adjoints of ``y``'s tracked leaves."""
    t = type(y)
    if is_numeric(y):
        if not is_numeric(ybar):
            raise ShapeMismatch(f"cotangent {show(ybar)} does not match real {show(y)}")
        if t is Tracked and y.tape is tape:
            i = y.index
            adj[i] = add(adj[i], ybar)
        return
    if t is bool:
        if type(ybar) is not bool:
            raise ShapeMismatch(f"cotangent {show(ybar)} does not match boolean")
        return
    if t is Pair:
        if type(ybar) is not Pair:
            raise ShapeMismatch(f"cotangent {show(ybar)} does not match pair {show(y)}")
        seed(adj, tape, y.first, ybar.first)
        seed(adj, tape, y.second, ybar.second)
        return
    raise ClosureInCotangentPosition(f"result {show(y)} has no ground cotangent")


def sweep(tape: Tape, adj: list) -> list:
    """Propagate adjoints from the last entry back to the first, in place."""
    entries = tape.entries
    for i in range(len(entries) - 1, -1, -1):
        e = entries[i]
        if e is None:
            continue
        g = adj[i]
        if type(g) is float and g == 0.0:
            continue
        ia, pa, ib, pb = e
        if ia >= 0:
            cur = adj[ia]
            if type(cur) is float and type(pa) is float and type(g) is float:
                adj[ia] = cur + pa * g
            else:
                adj[ia] = add(cur, mul(pa, g))
        if ib >= 0:
            cur = adj[ib]
            if type(cur) is float and type(pb) is float and type(g) is float:
                adj[ib] = cur + pb * g
            else:
                adj[ib] = add(cur, mul(pb, g))
    return adj


def gather(x_tracked, tape: Tape, adj: list):
    """Cotangent shaped like the tracked input ``x_tracked``."""
    t = type(x_tracked)
    if t is Tracked and x_tracked.tape is tape:
        return adj[x_tracked.index]
    if is_numeric(x_tracked):
        return 0.0
    if t is bool:
        return x_tracked
    if t is Pair:
        return Pair(gather(x_tracked.first, tape, adj), gather(x_tracked.second, tape, adj))
    raise ClosureInCotangentPosition(f"no cotangent for {show(x_tracked)}")


def reverse_sweep(tape: Tape, y, ybar, x_tracked):
    adj = [0.0] * len(tape.entries)
    seed(adj, tape, y, ybar)
    sweep(tape, adj)
    return gather(x_tracked, tape, adj)


class taping:
    """Context manager owning one tape for the duration of an episode."""

    def __init__(self):
        self.tape = Tape()

    def __enter__(self) -> Tape:
        m = metrics.current()
        if m is not None:
            m.tape_opened(self.tape)
        return self.tape

    def __exit__(self, *exc):
        m = metrics.current()
        if m is not None:
            m.tape_closed(self.tape)
        return False


def reverse_j(f, x, ybar, apply=None):
    """Return ``(y, x_cotangent)`` for ``y = f(x)`` pulled back along ``ybar``."""
    apply = apply or _default_apply
    with taping() as tape:
        xt = track(x, tape)
        y = apply(f, xt)
        xbar = reverse_sweep(tape, y, ybar, xt)
    return untrack(y, tape), xbar


def cotangent_zero(v):
    t = type(v)
    if is_numeric(v):
        return 0.0
    if t is bool:
        return v
    if t is Pair:
        return Pair(cotangent_zero(v.first), cotangent_zero(v.second))
    if t is Closure:
        raise ClosureInCotangentPosition(f"closure {show(v)} has no ground cotangent")
    from .machine import Checkpoint
    if t is Checkpoint:
        from .checkpointing import checkpoint_leaves
        return (0.0,) * len(checkpoint_leaves(v))
    raise ClosureInCotangentPosition(f"no cotangent for {show(v)}")
