"""Big-step reference evaluator.

Recursive in the host, so deep object-level recursion is bounded by the
Python stack.  Operands are evaluated left to right, operator before
operand, the same order the CPS machine uses.
"""

from __future__ import annotations

from . import ad, metrics
from .errors import VladTypeError
from .machine import DEFAULT_TAU
from .runtime import BINARY, UNARY, Closure, Pair, lookup, show
from .syntax import App, Binary, Const, If, Jc, Jf, Jr, Lam, Unary, Var


def apply(f, v, tau: int = DEFAULT_TAU):
    if type(f) is not Closure:
        raise VladTypeError(f"cannot apply non-closure {show(f)}")
    return evaluate(f.body, (f.param, v, f.env), tau)


def evaluate(e, env=None, tau: int = DEFAULT_TAU):
    t = type(e)
    if t is Const:
        return e.value
    if t is Var:
        return lookup(env, e.name)
    if t is Lam:
        return Closure(e.param, e.body, env)
    if t is App:
        f = evaluate(e.fn, env, tau)
        return apply(f, evaluate(e.arg, env, tau), tau)
    if t is If:
        test = evaluate(e.test, env, tau)
        if test is True:
            return evaluate(e.then, env, tau)
        if test is False:
            return evaluate(e.else_, env, tau)
        raise VladTypeError(f"if expects a boolean test, got {show(test)}")
    if t is Unary:
        v = UNARY[e.op](evaluate(e.arg, env, tau))
        _count_basis()
        return v
    if t is Binary:
        a = evaluate(e.lhs, env, tau)
        v = BINARY[e.op](a, evaluate(e.rhs, env, tau))
        _count_basis()
        return v
    if t is Jf or t is Jr or t is Jc:
        f = evaluate(e.fn, env, tau)
        x = evaluate(e.primal, env, tau)
        third = evaluate(e.tangent if t is Jf else e.cotangent, env, tau)

        def app(g, v):
            return apply(g, v, tau)

        if t is Jf:
            y, yt = ad.forward_j(f, x, third, app)
        elif t is Jr:
            y, yt = ad.reverse_j(f, x, third, app)
        else:
            from .binomial import BinomialConfig, binomial_j
            y, yt = binomial_j(f, x, third, BinomialConfig(tau))
        return Pair(y, yt)
    raise VladTypeError(f"not an expression: {e!r}")


def _count_basis():
    m = metrics.current()
    if m is not None:
        m.basis_op_count += 1
