"""Abstract syntax, s-expression reader, desugarer and canonical printer.

The core grammar has ten node types.  ``Let`` and ``Letrec`` only exist
between :func:`parse` and :func:`desugar`; everything downstream of
:func:`desugar` sees core nodes only.

Surface conveniences handled by the reader itself: ``(lambda (a b) e)`` and
``(f a b)`` are curried, ``(- e)`` is negation, and ``+``/``*`` fold to the
left when given more than two operands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import ArityMismatch, MalformedBinding, UnbalancedParens, UnknownForm

UNARY_OPS = ("neg", "exp", "log", "sin", "cos", "sqrt", "floor", "car", "cdr", "not")
BINARY_OPS = ("add", "sub", "mul", "div", "expt", "mod", "lt", "le", "eq", "cons")

UNARY_ALIASES = {op: op for op in UNARY_OPS}
BINARY_ALIASES = {op: op for op in BINARY_OPS}
BINARY_ALIASES.update({"+": "add", "-": "sub", "*": "mul", "/": "div",
                       "<": "lt", "<=": "le", "=": "eq"})

KEYWORDS = {"lambda", "if", "let", "letrec", "jf", "jr", "jc"}


# --------------------------------------------------------------------------
# core expressions


@dataclass(frozen=True, eq=False, slots=True)
class Const:
    value: Union[float, bool]

    def __eq__(self, other):
        return (type(other) is Const and type(self.value) is type(other.value)
                and self.value == other.value)

    def __hash__(self):
        return hash((Const, type(self.value), self.value))


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Lam:
    param: str
    body: "Expr"


@dataclass(frozen=True, slots=True)
class App:
    fn: "Expr"
    arg: "Expr"


@dataclass(frozen=True, slots=True)
class If:
    test: "Expr"
    then: "Expr"
    else_: "Expr"


@dataclass(frozen=True, slots=True)
class Unary:
    op: str
    arg: "Expr"


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True, slots=True)
class Jf:
    fn: "Expr"
    primal: "Expr"
    tangent: "Expr"


@dataclass(frozen=True, slots=True)
class Jr:
    fn: "Expr"
    primal: "Expr"
    cotangent: "Expr"


@dataclass(frozen=True, slots=True)
class Jc:
    fn: "Expr"
    primal: "Expr"
    cotangent: "Expr"


# sugar, removed by desugar()


@dataclass(frozen=True, slots=True)
class Let:
    bindings: tuple  # ((name, Expr), ...), bound in parallel
    body: "Expr"


@dataclass(frozen=True, slots=True)
class Letrec:
    bindings: tuple  # ((name, Expr), ...), each sees itself and the earlier ones
    body: "Expr"


Expr = Union[Const, Var, Lam, App, If, Unary, Binary, Jf, Jr, Jc]
CORE_TYPES = (Const, Var, Lam, App, If, Unary, Binary, Jf, Jr, Jc)


# --------------------------------------------------------------------------
# reader

_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")


@dataclass(slots=True)
class _Atom:
    text: str
    line: int
    col: int


@dataclass(slots=True)
class _List:
    items: list
    line: int
    col: int


def _tokens(text: str):
    line, col = 1, 1
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if not tok[0].isspace() and tok[0] != ";":
            yield tok, line, col
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)


def _read(text: str) -> _List | _Atom:
    stack: list[_List] = []
    result = None
    for tok, line, col in _tokens(text):
        if result is not None and not stack:
            if tok == ")":
                raise UnbalancedParens("unexpected ')'", line, col)
            raise UnknownForm("trailing input after expression", line, col)
        if tok == "(":
            stack.append(_List([], line, col))
        elif tok == ")":
            if not stack:
                raise UnbalancedParens("unexpected ')'", line, col)
            node = stack.pop()
            if stack:
                stack[-1].items.append(node)
            else:
                result = node
        else:
            atom = _Atom(tok, line, col)
            if stack:
                stack[-1].items.append(atom)
            else:
                result = atom
    if stack:
        open_ = stack[-1]
        raise UnbalancedParens("unclosed '('", open_.line, open_.col)
    if result is None:
        raise UnknownForm("empty program", 1, 1)
    return result


def _params(node, what: str) -> list[str]:
    if not isinstance(node, _List) or not node.items:
        raise ArityMismatch(f"{what} needs a non-empty parameter list", node.line, node.col)
    names = []
    for item in node.items:
        if not isinstance(item, _Atom) or _NUMBER.match(item.text) or item.text in KEYWORDS:
            raise UnknownForm(f"bad parameter in {what}", item.line, item.col)
        names.append(item.text)
    return names


def _bindings(node, what: str) -> tuple:
    if not isinstance(node, _List):
        raise MalformedBinding(f"{what} bindings must be a list", node.line, node.col)
    out = []
    for b in node.items:
        if (not isinstance(b, _List) or len(b.items) != 2
                or not isinstance(b.items[0], _Atom) or b.items[0].text in KEYWORDS
                or _NUMBER.match(b.items[0].text)):
            raise MalformedBinding(f"{what} binding must be (name expr)", b.line, b.col)
        out.append((b.items[0].text, _convert(b.items[1])))
    if not out:
        raise MalformedBinding(f"{what} needs at least one binding", node.line, node.col)
    return tuple(out)


def _expect(node: _List, n: int, what: str) -> None:
    if len(node.items) != n + 1:
        raise ArityMismatch(f"{what} expects {n} operand(s), got {len(node.items) - 1}",
                            node.line, node.col)


def _convert(node) -> Expr:
    if isinstance(node, _Atom):
        t = node.text
        if _NUMBER.match(t):
            return Const(float(t))
        if t == "#t":
            return Const(True)
        if t == "#f":
            return Const(False)
        if t.startswith("#") or t in KEYWORDS:
            raise UnknownForm(f"unexpected '{t}'", node.line, node.col)
        return Var(t)

    items = node.items
    if not items:
        raise UnknownForm("empty application ()", node.line, node.col)
    head = items[0]
    h = head.text if isinstance(head, _Atom) else None

    if h == "lambda":
        _expect(node, 2, "lambda")
        body = _convert(items[2])
        for name in reversed(_params(items[1], "lambda")):
            body = Lam(name, body)
        return body
    if h == "if":
        _expect(node, 3, "if")
        return If(_convert(items[1]), _convert(items[2]), _convert(items[3]))
    if h == "let" or h == "letrec":
        _expect(node, 2, h)
        cls = Let if h == "let" else Letrec
        return cls(_bindings(items[1], h), _convert(items[2]))
    if h in ("jf", "jr", "jc"):
        _expect(node, 3, h)
        cls = {"jf": Jf, "jr": Jr, "jc": Jc}[h]
        return cls(_convert(items[1]), _convert(items[2]), _convert(items[3]))
    if h == "-" and len(items) == 2:
        return Unary("neg", _convert(items[1]))
    if h in ("+", "*", "add", "mul") and len(items) > 3:
        op = BINARY_ALIASES[h]
        acc = Binary(op, _convert(items[1]), _convert(items[2]))
        for item in items[3:]:
            acc = Binary(op, acc, _convert(item))
        return acc
    if h in UNARY_ALIASES:
        _expect(node, 1, h)
        return Unary(UNARY_ALIASES[h], _convert(items[1]))
    if h in BINARY_ALIASES:
        _expect(node, 2, h)
        return Binary(BINARY_ALIASES[h], _convert(items[1]), _convert(items[2]))

    fn = _convert(head)
    if len(items) == 1:
        raise ArityMismatch("application needs at least one argument", node.line, node.col)
    for arg in items[1:]:
        fn = App(fn, _convert(arg))
    return fn


def parse(text: str):
    """Read one s-expression and return its (possibly sugared) AST."""
    return _convert(_read(text))


# --------------------------------------------------------------------------
# desugaring


def _z_combinator() -> Lam:
    # applicative-order fixpoint: \g.(\s.g (\v.s s v)) (\s.g (\v.s s v))
    half = Lam("%s", App(Var("%g"), Lam("%v", App(App(Var("%s"), Var("%s")), Var("%v")))))
    return Lam("%g", App(half, half))


Z = _z_combinator()


def desugar(e) -> Expr:
    t = type(e)
    if t is Const or t is Var:
        return e
    if t is Lam:
        return Lam(e.param, desugar(e.body))
    if t is App:
        return App(desugar(e.fn), desugar(e.arg))
    if t is If:
        return If(desugar(e.test), desugar(e.then), desugar(e.else_))
    if t is Unary:
        return Unary(e.op, desugar(e.arg))
    if t is Binary:
        return Binary(e.op, desugar(e.lhs), desugar(e.rhs))
    if t in (Jf, Jr, Jc):
        return t(desugar(e.fn), desugar(e.primal), desugar(_third(e)))
    if t is Let:
        body = desugar(e.body)
        for name, _ in reversed(e.bindings):
            body = Lam(name, body)
        for _, rhs in e.bindings:
            body = App(body, desugar(rhs))
        return body
    if t is Letrec:
        out = desugar(e.body)
        for name, rhs in reversed(e.bindings):
            if type(rhs) is not Lam:
                raise MalformedBinding(f"letrec binding '{name}' must be a lambda")
            out = App(Lam(name, out), App(Z, Lam(name, desugar(rhs))))
        return out
    raise TypeError(f"not an expression: {e!r}")


def _third(e):
    return e.tangent if type(e) is Jf else e.cotangent


def parse_program(text: str) -> Expr:
    return desugar(parse(text))


# --------------------------------------------------------------------------
# printing


def _fmt_const(v) -> str:
    if v is True:
        return "#t"
    if v is False:
        return "#f"
    return repr(float(v))


def unparse(e) -> str:
    """Canonical surface text; ``parse(unparse(e)) == e`` for core expressions."""
    t = type(e)
    if t is Const:
        return _fmt_const(e.value)
    if t is Var:
        return e.name
    if t is Lam:
        return f"(lambda ({e.param}) {unparse(e.body)})"
    if t is App:
        return f"({unparse(e.fn)} {unparse(e.arg)})"
    if t is If:
        return f"(if {unparse(e.test)} {unparse(e.then)} {unparse(e.else_)})"
    if t is Unary:
        return f"({e.op} {unparse(e.arg)})"
    if t is Binary:
        return f"({e.op} {unparse(e.lhs)} {unparse(e.rhs)})"
    if t in (Jf, Jr, Jc):
        return f"({t.__name__.lower()} {unparse(e.fn)} {unparse(e.primal)} {unparse(_third(e))})"
    if t in (Let, Letrec):
        binds = " ".join(f"({n} {unparse(v)})" for n, v in e.bindings)
        return f"({t.__name__.lower()} ({binds}) {unparse(e.body)})"
    raise TypeError(f"not an expression: {e!r}")


def free_vars(e) -> frozenset:
    t = type(e)
    if t is Const:
        return frozenset()
    if t is Var:
        return frozenset((e.name,))
    if t is Lam:
        return free_vars(e.body) - {e.param}
    if t is App:
        return free_vars(e.fn) | free_vars(e.arg)
    if t is If:
        return free_vars(e.test) | free_vars(e.then) | free_vars(e.else_)
    if t is Unary:
        return free_vars(e.arg)
    if t is Binary:
        return free_vars(e.lhs) | free_vars(e.rhs)
    if t in (Jf, Jr, Jc):
        return free_vars(e.fn) | free_vars(e.primal) | free_vars(_third(e))
    raise TypeError(f"not a core expression: {e!r}")


def swap_reverse_operators(e) -> Expr:
    """Exchange every ``jr`` node for ``jc`` and vice versa."""
    t = type(e)
    if t is Const or t is Var:
        return e
    if t is Lam:
        return Lam(e.param, swap_reverse_operators(e.body))
    if t is App:
        return App(swap_reverse_operators(e.fn), swap_reverse_operators(e.arg))
    if t is If:
        return If(*(swap_reverse_operators(x) for x in (e.test, e.then, e.else_)))
    if t is Unary:
        return Unary(e.op, swap_reverse_operators(e.arg))
    if t is Binary:
        return Binary(e.op, swap_reverse_operators(e.lhs), swap_reverse_operators(e.rhs))
    parts = (swap_reverse_operators(e.fn), swap_reverse_operators(e.primal),
             swap_reverse_operators(_third(e)))
    if t is Jf:
        return Jf(*parts)
    return Jc(*parts) if t is Jr else Jr(*parts)
