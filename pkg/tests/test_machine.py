import random

import pytest

from conftest import CORPUS
from vlad import machine
from vlad.checkpointing import Resumable, checkpoint, primops, resume
from vlad.errors import DomainError, UnboundVariable, VladTypeError
from vlad.machine import (UNLIMITED, Checkpoint, Final, Interrupted, apply_cps, inject, run)
from vlad.runtime import Closure, env_from, same_value
from vlad.syntax import Binary, Const, Var, parse, parse_program

BODY = Binary("add", Var("x"), Const(1.0))
ENV = env_from({"x": 2.0})


def test_hand_trace_unlimited():
    kinds = []
    out = run(inject(None, 0, UNLIMITED, ENV, BODY), trace=lambda n, k: kinds.append((n, k)))
    assert out == Final(3.0, 3)
    assert kinds == [(1, "Binary"), (2, "Var"), (3, "Const")]


def test_hand_trace_interrupt_at_one():
    out = run(inject(None, 0, 1, ENV, BODY))
    assert type(out) is Interrupted
    cp = out.checkpoint
    assert cp.l == 1 and cp.e == Var("x") and cp.env is ENV
    assert cp.k[0] == machine.BIN_LHS


def test_square_program_step_count():
    kinds = []
    value, n = machine.evaluate(parse_program("((lambda (x) (* x x)) 3)"),
                                trace=lambda n, k: kinds.append(k))
    assert (value, n) == (9.0, 6)
    assert kinds == ["App", "Lam", "Const", "Binary", "Var", "Var"]


def test_inject_examples():
    assert run(inject(None, 0, UNLIMITED, None, Const(5.0))) == Final(5.0, 1)
    out = run(inject(None, 0, 0, None, Const(5.0)))
    assert type(out) is Interrupted and out.checkpoint.e == Const(5.0)


def test_apply_cps_matches_run():
    f = Closure("x", BODY, None)
    assert apply_cps(None, 0, UNLIMITED, f, 2.0) == Final(3.0, 3)
    out = apply_cps(None, 0, 1, f, 2.0)
    assert type(out) is Interrupted and out.checkpoint.e == Var("x")
    with pytest.raises(VladTypeError):
        apply_cps(None, 0, UNLIMITED, 3.0, 2.0)


def test_errors_carry_step():
    with pytest.raises(UnboundVariable) as info:
        machine.evaluate(parse("(+ 1 y)"))
    assert info.value.step == 3
    with pytest.raises(DomainError) as info:
        machine.evaluate(parse("(log 0)"))
    assert info.value.step == 2
    with pytest.raises(VladTypeError) as info:
        machine.evaluate(parse("(3 1)"))
    assert info.value.step == 3


def test_deep_recursion_does_not_grow_host_stack():
    src = "(letrec ((f (lambda (n) (if (le n 0) 0 (+ 1 (f (- n 1))))))) (f 20000))"
    value, _ = machine.evaluate(parse_program(src))
    assert value == 20000.0


def test_trace_cli_format(tmp_path, capsys):
    from vlad.cli import main
    p = tmp_path / "t.vlad"
    p.write_text("(+ 1 2)")
    assert main(["run", str(p), "--trace"]) == 0
    out, err = capsys.readouterr()
    assert out.strip() == "3"
    assert err.splitlines() == ["1\tBinary", "2\tConst", "3\tConst"]


def _iterated_split(expr, cuts):
    """Run ``expr``, interrupting after each count in ``cuts`` and resuming."""
    out = run(inject(None, 0, cuts[0], None, expr)) if cuts else None
    total = 0
    for nxt in cuts[1:] + [None]:
        if type(out) is Final:
            return out.value, total + out.n
        cp = out.checkpoint
        total += cp.l
        if nxt is None:
            value, steps = resume(cp)
            return value, total + steps
        out = run(inject(cp.k, 0, nxt, cp.env, cp.e))
    raise AssertionError("unreachable")


@pytest.mark.parametrize("name", ["17_countdown", "19_fib", "22_list_sum", "26_deep_closures",
                                  "31_jr_loop", "25_even_odd"])
def test_iterated_random_splits(name, corpus):
    want, total = machine.evaluate(corpus[name])
    rng = random.Random(name)
    for _ in range(25):
        cuts = sorted(rng.sample(range(1, total), min(4, total - 1)))
        deltas = [b - a for a, b in zip([0] + cuts, cuts)]
        value, steps = _iterated_split(corpus[name], deltas)
        assert same_value(value, want) and steps == total


def test_resumed_checkpoint_can_be_split_again(corpus):
    want, total = machine.evaluate(corpus["19_fib"])
    from vlad.checkpointing import Initial
    f = machine.evaluate(parse_program("(lambda (u) " + CORPUS["19_fib"] + ")"))[0]
    task = Initial(f, 0.0)
    _, n = primops(task)
    cp1 = checkpoint(task, n // 3)
    cp2 = checkpoint(Resumable(cp1), n // 3)
    value, rest = resume(cp2)
    assert same_value(value, want) and 2 * (n // 3) + rest == n


def test_checkpoint_is_plain_data():
    cp = run(inject(None, 0, 1, ENV, BODY)).checkpoint
    assert isinstance(cp, Checkpoint)
    assert list(machine.frames(cp.k))[0][0] == machine.BIN_LHS
