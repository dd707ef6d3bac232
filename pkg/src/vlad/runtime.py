"""Runtime values, environments and the overloaded basis functions.

Reals are Python floats and booleans are Python bools.  The two kinds of
differential numbers are :class:`Bundle` (forward mode, primal + tangent) and
:class:`Tracked` (reverse mode, a slot on a :class:`Tape`).  Both carry a
nesting level taken from one global counter, so when operands of different
levels meet, the more recent (inner) one wins and the other is treated as a
constant at that level.  Derivatives are themselves computed with the
overloaded operations, which makes nested episodes compose.

Environments are immutable linked triples ``(name, value, parent)`` with
``None`` as the empty environment.
"""

from __future__ import annotations

import itertools
import math

from .errors import DomainError, UnboundVariable, VladTypeError

_levels = itertools.count(1)


def fresh_level() -> int:
    return next(_levels)


class Pair:
    __slots__ = ("first", "second")

    def __init__(self, first, second):
        self.first = first
        self.second = second

    def __repr__(self):
        return f"Pair({self.first!r}, {self.second!r})"

    def __eq__(self, other):
        return type(other) is Pair and self.first == other.first and self.second == other.second

    __hash__ = None


class Closure:
    __slots__ = ("param", "body", "env")

    def __init__(self, param, body, env):
        self.param = param
        self.body = body
        self.env = env

    def __repr__(self):
        return f"Closure({self.param!r}, {self.body!r})"


class Bundle:
    __slots__ = ("primal", "tangent", "tag")

    def __init__(self, primal, tangent, tag):
        self.primal = primal
        self.tangent = tangent
        self.tag = tag

    def __repr__(self):
        return f"Bundle({self.primal!r}, {self.tangent!r})"


class Tracked:
    __slots__ = ("tape", "index", "primal")

    def __init__(self, tape, index, primal):
        self.tape = tape
        self.index = index
        self.primal = primal

    def __repr__(self):
        return f"Tracked(#{self.index}, {self.primal!r})"


class Tape:
    """Wengert list.  Input slots hold ``None``; operation slots hold
    ``(lhs_index, lhs_partial, rhs_index, rhs_partial)`` with index -1 for an
    operand that is constant at this tape's level."""

    __slots__ = ("tag", "entries", "inputs")

    def __init__(self):
        self.tag = fresh_level()
        self.entries: list = []
        self.inputs: list[int] = []

    def new_input(self, primal) -> Tracked:
        i = len(self.entries)
        self.entries.append(None)
        self.inputs.append(i)
        return Tracked(self, i, primal)

    def record(self, primal, ia, pa, ib=-1, pb=0.0) -> Tracked:
        i = len(self.entries)
        self.entries.append((ia, pa, ib, pb))
        return Tracked(self, i, primal)

    @property
    def node_count(self) -> int:
        """Recorded operations, input slots excluded."""
        return len(self.entries) - len(self.inputs)

    def __len__(self):
        return self.node_count


NUMERIC = (float, Bundle, Tracked)


def is_numeric(v) -> bool:
    return type(v) in NUMERIC


def primal_of(v) -> float:
    """Innermost float underneath any bundling or tracking."""
    while type(v) is not float:
        if type(v) is Bundle or type(v) is Tracked:
            v = v.primal
        else:
            raise VladTypeError(f"expected a real, got {show(v)}")
    return v


def _level(v) -> int:
    t = type(v)
    if t is Bundle:
        return v.tag
    if t is Tracked:
        return v.tape.tag
    if t is float:
        return 0
    raise VladTypeError(f"expected a real, got {show(v)}")


# --------------------------------------------------------------------------
# environments


def lookup(env, name: str):
    while env is not None:
        if env[0] == name:
            return env[1]
        env = env[2]
    raise UnboundVariable(f"unbound variable {name}")


def extend(env, name: str, value):
    return (name, value, env)


def env_from(bindings: dict):
    env = None
    for k, v in bindings.items():
        env = (k, v, env)
    return env


# --------------------------------------------------------------------------
# overloaded arithmetic


def _lift1(f, d, x):
    tx = type(x)
    if tx is float:
        return f(x)
    if tx is Bundle:
        p = _lift1(f, d, x.primal)
        return Bundle(p, mul(d(x.primal, p), x.tangent), x.tag)
    if tx is Tracked:
        p = _lift1(f, d, x.primal)
        return x.tape.record(p, x.index, d(x.primal, p))
    raise VladTypeError(f"expected a real, got {show(x)}")


def _lift2(f, d, a, b):
    ta = type(a)
    tb = type(b)
    if ta is float and tb is float:
        return f(a, b)
    la, lb = _level(a), _level(b)
    top = la if la >= lb else lb
    owner = a if la == top else b
    a_in = la == top
    b_in = lb == top
    ap = a.primal if a_in else a
    bp = b.primal if b_in else b
    p = _lift2(f, d, ap, bp)
    da, db = d(ap, bp, p)
    if type(owner) is Bundle:
        tan = None
        if a_in:
            tan = mul(da, a.tangent)
        if b_in:
            term = mul(db, b.tangent)
            tan = term if tan is None else add(tan, term)
        return Bundle(p, tan, top)
    tape = owner.tape
    if a_in and b_in:
        return tape.record(p, a.index, da, b.index, db)
    if a_in:
        return tape.record(p, a.index, da)
    return tape.record(p, b.index, db)


def _f_add(a, b):
    return a + b


def _f_sub(a, b):
    return a - b


def _f_mul(a, b):
    return a * b


def _f_div(a, b):
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _f_expt(a, b):
    if not a > 0.0:
        raise DomainError(f"expt needs a positive base, got {a!r}")
    return math.pow(a, b)


def _f_mod(a, b):
    if b == 0.0:
        raise DomainError("mod by zero")
    return a % b


def add(a, b):
    if type(a) is float and type(b) is float:
        return a + b
    return _lift2(_f_add, _d_add, a, b)


def sub(a, b):
    if type(a) is float and type(b) is float:
        return a - b
    return _lift2(_f_sub, _d_sub, a, b)


def mul(a, b):
    if type(a) is float and type(b) is float:
        return a * b
    return _lift2(_f_mul, _d_mul, a, b)


def div(a, b):
    if type(a) is float and type(b) is float:
        return _f_div(a, b)
    return _lift2(_f_div, _d_div, a, b)


def expt(a, b):
    if type(a) is float and type(b) is float:
        return _f_expt(a, b)
    return _lift2(_f_expt, _d_expt, a, b)


def mod(a, b):
    if type(a) is float and type(b) is float:
        return _f_mod(a, b)
    return _lift2(_f_mod, _d_zero2, a, b)


def _d_add(a, b, p):
    return 1.0, 1.0


def _d_sub(a, b, p):
    return 1.0, -1.0


def _d_mul(a, b, p):
    return b, a


def _d_div(a, b, p):
    return div(1.0, b), neg(div(p, b))


def _d_expt(a, b, p):
    # d/da a^b = b a^b / a ; d/db a^b = log(a) a^b
    return div(mul(b, p), a), mul(log(a), p)


def _d_zero2(a, b, p):
    return 0.0, 0.0


def _f_log(x):
    if not x > 0.0:
        raise DomainError(f"log of non-positive {x!r}")
    return math.log(x)


def _f_sqrt(x):
    if x < 0.0:
        raise DomainError(f"sqrt of negative {x!r}")
    return math.sqrt(x)


def _f_exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        raise DomainError(f"exp overflow at {x!r}") from None


def neg(x):
    if type(x) is float:
        return -x
    return _lift1(_f_neg, _d_neg, x)


def _f_neg(x):
    return -x


def _d_neg(x, y):
    return -1.0


def exp(x):
    if type(x) is float:
        return _f_exp(x)
    return _lift1(_f_exp, _d_exp, x)


def _d_exp(x, y):
    return y


def log(x):
    if type(x) is float:
        return _f_log(x)
    return _lift1(_f_log, _d_log, x)


def _d_log(x, y):
    return div(1.0, x)


def sin(x):
    if type(x) is float:
        return math.sin(x)
    return _lift1(math.sin, _d_sin, x)


def _d_sin(x, y):
    return cos(x)


def cos(x):
    if type(x) is float:
        return math.cos(x)
    return _lift1(math.cos, _d_cos, x)


def _d_cos(x, y):
    return neg(sin(x))


def sqrt(x):
    if type(x) is float:
        return _f_sqrt(x)
    return _lift1(_f_sqrt, _d_sqrt, x)


def _d_sqrt(x, y):
    if primal_of(y) == 0.0:
        raise DomainError("sqrt is not differentiable at 0")
    return div(0.5, y)


def _f_floor(x):
    return float(math.floor(x))


def floor(x):
    if type(x) is float:
        return _f_floor(x)
    return _lift1(_f_floor, _d_floor, x)


def _d_floor(x, y):
    return 0.0


# --------------------------------------------------------------------------
# non-numeric basis functions


def _compare_operands(a, b, name):
    ta, tb = type(a), type(b)
    if ta is float and tb is float:
        return a, b
    if ta in NUMERIC and tb in NUMERIC:
        return primal_of(a), primal_of(b)
    raise VladTypeError(f"{name} expects reals, got {show(a)} and {show(b)}")


def lt(a, b):
    a, b = _compare_operands(a, b, "lt")
    return a < b


def le(a, b):
    a, b = _compare_operands(a, b, "le")
    return a <= b


def eq(a, b):
    if type(a) is bool and type(b) is bool:
        return a is b
    a, b = _compare_operands(a, b, "eq")
    return a == b


def cons(a, b):
    return Pair(a, b)


def car(p):
    if type(p) is not Pair:
        raise VladTypeError(f"car expects a pair, got {show(p)}")
    return p.first


def cdr(p):
    if type(p) is not Pair:
        raise VladTypeError(f"cdr expects a pair, got {show(p)}")
    return p.second


def not_(b):
    if type(b) is not bool:
        raise VladTypeError(f"not expects a boolean, got {show(b)}")
    return not b


UNARY = {
    "neg": neg, "exp": exp, "log": log, "sin": sin, "cos": cos,
    "sqrt": sqrt, "floor": floor, "car": car, "cdr": cdr, "not": not_,
}
BINARY = {
    "add": add, "sub": sub, "mul": mul, "div": div, "expt": expt, "mod": mod,
    "lt": lt, "le": le, "eq": eq, "cons": cons,
}
NUMERIC_UNARY = ("neg", "exp", "log", "sin", "cos", "sqrt", "floor")
NUMERIC_BINARY = ("add", "sub", "mul", "div", "expt", "mod")


def apply_unary(op: str, v):
    try:
        fn = UNARY[op]
    except KeyError:
        raise VladTypeError(f"unknown unary operator {op}") from None
    return fn(v)


def apply_binary(op: str, a, b):
    try:
        fn = BINARY[op]
    except KeyError:
        raise VladTypeError(f"unknown binary operator {op}") from None
    return fn(a, b)


# --------------------------------------------------------------------------
# inspection


def _fmt_real(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def show(v) -> str:
    t = type(v)
    if t is float:
        return _fmt_real(v)
    if t is bool:
        return "#t" if v else "#f"
    if t is Pair:
        return f"({show(v.first)} . {show(v.second)})"
    if t is Closure:
        return f"#<closure {v.param}>"
    if t is Bundle:
        return f"#<bundle {show(v.primal)} {show(v.tangent)}>"
    if t is Tracked:
        return f"#<tracked {show(v.primal)}>"
    return f"#<{type(v).__name__}>"


def strip(v):
    """Copy of ``v`` with tracking/bundling removed from every real leaf."""
    t = type(v)
    if t is float or t is bool:
        return v
    if t is Bundle or t is Tracked:
        return primal_of(v)
    if t is Pair:
        return Pair(strip(v.first), strip(v.second))
    return v


def same_value(a, b) -> bool:
    """Bit-for-bit structural equality (closures compare by code and environment)."""
    ta = type(a)
    if ta is not type(b):
        return False
    if ta is float:
        return a.hex() == b.hex()
    if ta is bool:
        return a is b
    if ta is Pair:
        return same_value(a.first, b.first) and same_value(a.second, b.second)
    if ta is Closure:
        if a is b:
            return True
        if a.param != b.param or a.body != b.body:
            return False
        ea, eb = a.env, b.env
        while ea is not None and eb is not None:
            if ea is eb:
                return True
            if ea[0] != eb[0] or not same_value(ea[1], eb[1]):
                return False
            ea, eb = ea[2], eb[2]
        return ea is None and eb is None
    if ta is Bundle:
        return same_value(a.primal, b.primal) and same_value(a.tangent, b.tangent)
    return a is b
