import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlad import eval_direct
from vlad.errors import ArityMismatch, MalformedBinding, UnbalancedParens, UnknownForm
from vlad.syntax import (
    BINARY_OPS, CORE_TYPES, UNARY_OPS, App, Binary, Const, If, Jc, Jf, Jr, Lam, Let, Letrec,
    Unary, Var, desugar, free_vars, parse, parse_program, swap_reverse_operators, unparse,
)


def test_parse_binary():
    assert parse("(* x x)") == Binary("mul", Var("x"), Var("x"))


def test_parse_if():
    assert parse("(if #t 1 2)") == If(Const(True), Const(1.0), Const(2.0))


def test_parse_jr_inside_lambda():
    assert parse("(lambda (x) (jr f x 1))") == Lam("x", Jr(Var("f"), Var("x"), Const(1.0)))


def test_parse_jf_jc():
    assert parse("(jf f 3 1)") == Jf(Var("f"), Const(3.0), Const(1.0))
    assert parse("(jc f 3 1)") == Jc(Var("f"), Const(3.0), Const(1.0))


def test_const_distinguishes_bool_from_real():
    assert Const(1.0) != Const(True)
    assert Const(0.0) != Const(False)


def test_currying_and_unary_minus():
    assert parse("(lambda (a b) a)") == Lam("a", Lam("b", Var("a")))
    assert parse("(f 1 2)") == App(App(Var("f"), Const(1.0)), Const(2.0))
    assert parse("(- x)") == Unary("neg", Var("x"))
    assert parse("(+ 1 2 3)") == Binary("add", Binary("add", Const(1.0), Const(2.0)), Const(3.0))


def test_comments_and_whitespace():
    assert parse("; comment\n  ( +  1 ; more\n 2 )") == Binary("add", Const(1.0), Const(2.0))


def test_numbers():
    assert parse("-2.5") == Const(-2.5)
    assert parse("1e-3") == Const(0.001)
    assert parse(".5") == Const(0.5)


@pytest.mark.parametrize("text, line, col", [
    ("(+ 1 2", 1, 1),
    ("(+ 1\n  (* 2 3)", 1, 1),
    ("(+ 1 2))", 1, 8),
    ("\n  )", 2, 3),
])
def test_unbalanced_parens(text, line, col):
    with pytest.raises(UnbalancedParens) as info:
        parse(text)
    assert (info.value.line, info.value.col) == (line, col)


@pytest.mark.parametrize("text", ["()", "#q", "(lambda (1) x)", "if", "1 2"])
def test_unknown_form(text):
    with pytest.raises(UnknownForm):
        parse(text)


@pytest.mark.parametrize("text", ["(if 1 2)", "(sin 1 2)", "(cons 1)", "(lambda (x))",
                                  "(jr f x)", "(f)", "(lambda () 1)"])
def test_arity_mismatch(text):
    with pytest.raises(ArityMismatch):
        parse(text)


def test_arity_error_position():
    with pytest.raises(ArityMismatch) as info:
        parse("(let ((x 1))\n   (if x 1))")
    assert (info.value.line, info.value.col) == (2, 4)


@pytest.mark.parametrize("text", ["(let (x 1) x)", "(let ((x)) x)", "(let () 1)",
                                  "(letrec ((1 2)) 3)"])
def test_malformed_binding(text):
    with pytest.raises(MalformedBinding):
        parse(text)


def test_letrec_requires_lambda():
    with pytest.raises(MalformedBinding):
        desugar(parse("(letrec ((f 1)) f)"))


def test_desugar_let():
    assert desugar(parse("(let ((x 2)) x)")) == App(Lam("x", Var("x")), Const(2.0))


def test_desugar_parallel_let():
    e = desugar(parse("(let ((x 1) (y x)) y)"))
    assert e == App(App(Lam("x", Lam("y", Var("y"))), Const(1.0)), Var("x"))


def test_desugar_letrec_countdown_evaluates_to_zero():
    e = desugar(parse("(letrec ((f (lambda (n) (if (le n 0) 0 (f (sub n 1)))))) (f 2))"))
    assert not free_vars(e)
    assert eval_direct.evaluate(e) == 0.0


def test_desugar_without_sugar_is_identity():
    e = parse("((lambda (x) (if (< x 1) (sin x) (jr f x 1))) 3)")
    assert desugar(e) == e


def _core_only(e):
    if type(e) not in CORE_TYPES:
        return False
    return all(_core_only(getattr(e, f)) for f in e.__slots__
               if type(getattr(e, f)).__module__ == "vlad.syntax")


def test_desugar_output_is_core():
    e = desugar(parse("(let ((a 1)) (letrec ((f (lambda (n) (if (le n 0) a (f (- n 1)))))) (f 3)))"))
    assert _core_only(e)
    assert not free_vars(e)


def test_swap_reverse_operators():
    e = parse("(jr f (jc g 1 2) (jf h 3 4))")
    assert swap_reverse_operators(e) == Jc(Var("f"), Jr(Var("g"), Const(1.0), Const(2.0)),
                                           Jf(Var("h"), Const(3.0), Const(4.0)))


# --------------------------------------------------------------------------
# properties

NAMES = st.sampled_from(["x", "y", "f", "acc", "n2"])
CONSTS = st.one_of(st.booleans().map(Const),
                   st.floats(allow_nan=False, allow_infinity=False).map(Const))


def _exprs():
    def extend(children):
        return st.one_of(
            st.builds(Lam, NAMES, children),
            st.builds(App, children, children),
            st.builds(If, children, children, children),
            st.builds(Unary, st.sampled_from(UNARY_OPS), children),
            st.builds(Binary, st.sampled_from(BINARY_OPS), children, children),
            st.builds(Jf, children, children, children),
            st.builds(Jr, children, children, children),
            st.builds(Jc, children, children, children),
        )
    return st.recursive(st.one_of(CONSTS, NAMES.map(Var)), extend, max_leaves=25)


@settings(max_examples=300)
@given(_exprs())
def test_print_parse_round_trip(e):
    assert parse(unparse(e)) == e


@settings(max_examples=100)
@given(_exprs())
def test_desugar_idempotent(e):
    assert desugar(desugar(e)) == desugar(e)


@settings(max_examples=100)
@given(st.lists(st.tuples(NAMES, st.integers(0, 9)), min_size=1, max_size=3), st.integers(0, 5))
def test_desugared_let_has_no_sugar(binds, body):
    text = "(let (" + " ".join(f"({n} {v})" for n, v in binds) + f") {body})"
    e = parse(text)
    assert type(e) is Let
    assert _core_only(desugar(e))


def test_letrec_sequential_bindings_visible():
    e = parse("(letrec ((f (lambda (n) n)) (g (lambda (n) (f n)))) (g 4))")
    assert type(e) is Letrec
    assert eval_direct.evaluate(desugar(e)) == 4.0


def test_parse_program_desugars():
    assert parse_program("(let ((x 2)) x)") == App(Lam("x", Var("x")), Const(2.0))
