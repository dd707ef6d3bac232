"""The instrumented CPS machine: counted, interruptible, resumable evaluation.

Continuations are defunctionalized into immutable linked frames (tuples whose
first element is a frame tag and whose last element is the next frame;
``None`` is the halt continuation).  Every dispatch on an expression costs
one step.  Before dispatching, the machine compares the step count with the
limit and, if they are equal, returns the checkpoint ``<k, l, env, e>``
instead of continuing.  Returning a value never costs a step and never
interrupts.

The dynamic extent of ``jf``/``jr``/``jc`` runs on fresh machines, so from
the point of view of an enclosing machine the operator costs one dispatch
plus the dispatches of its three operands.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import metrics
from .errors import DomainError, UnboundVariable, VladError, VladTypeError
from .runtime import BINARY, UNARY, Closure, Pair, show
from .syntax import App, Binary, Const, If, Jc, Jf, Jr, Lam, Unary, Var

# frame layouts; the final element of every frame is the next frame
APP_FN = 0   # (APP_FN, arg_expr, env, k)         operator evaluated, operand pending
APP_ARG = 1  # (APP_ARG, fn_value, k)             operand evaluated, apply next
IF_TEST = 2  # (IF_TEST, then_expr, else_expr, env, k)
UN_OP = 3    # (UN_OP, op, k)
BIN_LHS = 4  # (BIN_LHS, op, rhs_expr, env, k)
BIN_RHS = 5  # (BIN_RHS, op, lhs_value, k)
J_FN = 6     # (J_FN, kind, primal_expr, third_expr, env, k)
J_PRIMAL = 7  # (J_PRIMAL, kind, fn_value, third_expr, env, k)
J_THIRD = 8  # (J_THIRD, kind, fn_value, primal_value, k)

FRAME_NAMES = ("AppFn", "AppArg", "IfTest", "Unary1", "Binary1", "Binary2",
               "JOperand1", "JOperand2", "JOperand3")

DEFAULT_TAU = 64


class _Unlimited:
    __slots__ = ()

    def __repr__(self):
        return "UNLIMITED"


UNLIMITED = _Unlimited()


@dataclass(frozen=True, eq=False)
class Checkpoint:
    """Snapshot of an interrupted evaluation: continuation, count, environment, pending expression."""

    k: object
    l: int
    env: object
    e: object


@dataclass(frozen=True)
class Final:
    value: object
    n: int


@dataclass(frozen=True)
class Interrupted:
    checkpoint: Checkpoint


@dataclass(frozen=True)
class MachineState:
    """Machine configuration.  ``focus`` is ``("eval", env, expr)`` or ``("cont", value)``."""

    k: object
    n: int
    l: object
    focus: tuple


def inject(k, n: int, l, env, e) -> MachineState:
    return MachineState(k, n, l, ("eval", env, e))


def resumption(k, n: int, l, value) -> MachineState:
    return MachineState(k, n, l, ("cont", value))


def frames(k):
    """Frames of continuation ``k``, innermost first."""
    while k is not None:
        yield k
        k = k[-1]


def apply_closure(f, v, tau: int = DEFAULT_TAU):
    """Apply ``f`` to ``v`` on a fresh unlimited machine and return the value."""
    if type(f) is not Closure:
        raise VladTypeError(f"cannot apply non-closure {show(f)}")
    out = run(inject(None, 0, UNLIMITED, (f.param, v, f.env), f.body), tau)
    return out.value


def apply_cps(k, n: int, l, f, v, tau: int = DEFAULT_TAU):
    if type(f) is not Closure:
        raise VladTypeError(f"cannot apply non-closure {show(f)}")
    return run(inject(k, n, l, (f.param, v, f.env), f.body), tau)


def _ad_operator(kind, f, x, third, tau):
    from . import ad
    def apply(g, v):
        return apply_closure(g, v, tau)
    if kind is Jf:
        y, yt = ad.forward_j(f, x, third, apply)
    elif kind is Jr:
        y, yt = ad.reverse_j(f, x, third, apply)
    else:
        from .binomial import BinomialConfig, binomial_j
        y, yt = binomial_j(f, x, third, BinomialConfig(tau))
    return Pair(y, yt)


def run(state: MachineState, tau: int = DEFAULT_TAU, trace=None):
    """Run the machine until it halts (``Final``) or reaches its limit (``Interrupted``).

    ``trace``, when given, is called as ``trace(n, kind)`` for every dispatch.
    """
    k = state.k
    n0 = n = state.n
    lim = -1 if state.l is UNLIMITED else state.l
    if state.focus[0] == "eval":
        _, env, e = state.focus
        evaluating = True
        value = None
    else:
        value = state.focus[1]
        env = e = None
        evaluating = False
    basis = 0
    unary = UNARY
    binary = BINARY
    try:
        while True:
            if evaluating:
                # dispatch expressions until one produces a value
                while True:
                    if n == lim:
                        return Interrupted(Checkpoint(k, n, env, e))
                    n += 1
                    t = type(e)
                    if trace is not None:
                        trace(n, t.__name__)
                    if t is Var:
                        name = e.name
                        r = env
                        while r is not None:
                            if r[0] == name:
                                value = r[1]
                                break
                            r = r[2]
                        else:
                            raise UnboundVariable(f"unbound variable {name}")
                        break
                    if t is App:
                        k = (APP_FN, e.arg, env, k)
                        e = e.fn
                    elif t is Binary:
                        k = (BIN_LHS, e.op, e.rhs, env, k)
                        e = e.lhs
                    elif t is Const:
                        value = e.value
                        break
                    elif t is Lam:
                        value = Closure(e.param, e.body, env)
                        break
                    elif t is If:
                        k = (IF_TEST, e.then, e.else_, env, k)
                        e = e.test
                    elif t is Unary:
                        k = (UN_OP, e.op, k)
                        e = e.arg
                    elif t is Jf:
                        k = (J_FN, t, e.primal, e.tangent, env, k)
                        e = e.fn
                    elif t is Jr or t is Jc:
                        k = (J_FN, t, e.primal, e.cotangent, env, k)
                        e = e.fn
                    else:
                        raise VladTypeError(f"not an expression: {e!r}")
                evaluating = False
            # return ``value`` to frames until one needs an expression evaluated
            while True:
                if k is None:
                    return Final(value, n)
                tag = k[0]
                if tag == APP_FN:
                    e = k[1]
                    env = k[2]
                    k = (APP_ARG, value, k[3])
                    break
                if tag == APP_ARG:
                    f = k[1]
                    if type(f) is not Closure:
                        raise VladTypeError(f"cannot apply non-closure {show(f)}")
                    env = (f.param, value, f.env)
                    e = f.body
                    k = k[2]
                    break
                if tag == BIN_LHS:
                    e = k[2]
                    env = k[3]
                    k = (BIN_RHS, k[1], value, k[4])
                    break
                if tag == BIN_RHS:
                    value = binary[k[1]](k[2], value)
                    basis += 1
                    k = k[3]
                elif tag == IF_TEST:
                    if value is True:
                        e = k[1]
                    elif value is False:
                        e = k[2]
                    else:
                        raise VladTypeError(f"if expects a boolean test, got {show(value)}")
                    env = k[3]
                    k = k[4]
                    break
                elif tag == UN_OP:
                    value = unary[k[1]](value)
                    basis += 1
                    k = k[2]
                elif tag == J_FN:
                    e = k[2]
                    env = k[4]
                    k = (J_PRIMAL, k[1], value, k[3], env, k[5])
                    break
                elif tag == J_PRIMAL:
                    e = k[3]
                    env = k[4]
                    k = (J_THIRD, k[1], k[2], value, k[5])
                    break
                else:  # J_THIRD
                    value = _ad_operator(k[1], k[2], k[3], value, tau)
                    k = k[4]
            evaluating = True
    except VladError as err:
        if err.step is None:
            err.step = n
        raise
    except (ValueError, OverflowError) as err:
        wrapped = DomainError(str(err))
        wrapped.step = n
        raise wrapped from err
    finally:
        m = metrics.current()
        if m is not None:
            m.total_dispatch_steps += n - n0
            m.basis_op_count += basis


def evaluate(e, env=None, tau: int = DEFAULT_TAU, trace=None):
    """Evaluate ``e`` to completion; returns ``(value, steps)``."""
    out = run(inject(None, 0, UNLIMITED, env, e), tau, trace)
    return out.value, out.n
