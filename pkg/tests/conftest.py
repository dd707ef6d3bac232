import math
import sys
from pathlib import Path

import pytest

from vlad.machine import evaluate as run_cps
from vlad.syntax import parse_program

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

CORPUS_DIR = Path(__file__).parent / "corpus"
CORPUS = {p.stem: p.read_text() for p in sorted(CORPUS_DIR.glob("*.vlad"))}
REVERSE_CORPUS = {k: v for k, v in CORPUS.items() if "(jr " in v or "(jc " in v}

# scalar functions R -> R with evaluation points away from singularities
SCALAR_FUNCS = {
    "square": ("(lambda (x) (* x x))", [3.0, -1.5]),
    "sin_sq": ("(lambda (x) (sin (* x x)))", [0.3, 1.2]),
    "sigmoid": ("(lambda (x) (/ (exp x) (+ 1 (exp x))))", [0.5, -2.0]),
    "hypot": ("(lambda (x) (sqrt (+ 1 (* x x))))", [0.7, -3.0]),
    "log_cos": ("(lambda (x) (log (+ 2 (cos x))))", [0.4, 2.0]),
    "expt": ("(lambda (x) (expt x 2.5))", [1.7, 0.4]),
    "newton": ("""(lambda (x)
                   (letrec ((it (lambda (k y) (if (le k 0) y (it (- k 1) (/ (+ y (/ x y)) 2))))))
                     (it 6 x)))""", [2.0, 5.0]),
    "horner": ("""(lambda (x)
                   (letrec ((h (lambda (k acc) (if (le k 0) acc (h (- k 1) (+ (* acc x) k))))))
                     (h 4 1)))""", [0.9, -1.3]),
    "branch": ("(lambda (x) (if (< x 1) (* x x) (- (* 2 x) 1)))", [0.5, 2.0]),
    "pairs": ("(lambda (x) (let ((p (cons (sin x) (cos x)))) (* (car p) (cdr p))))", [0.3, 1.0]),
    "cube_closure": ("(lambda (x) (let ((g (lambda (y) (* x y)))) (g (g x))))", [1.1, -0.8]),
    "nested_rev": ("(lambda (x) (cdr (jr (lambda (y) (* y (* y y))) x 1)))", [2.0, -0.6]),
}


def load(src: str):
    value, _ = run_cps(parse_program(src))
    return value


def rel_err(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def central_difference(fn, x: float) -> float:
    h = 1e-5 * max(1.0, abs(x))
    return (fn(x + h) - fn(x - h)) / (2 * h)


@pytest.fixture(scope="session")
def corpus():
    return {name: parse_program(src) for name, src in CORPUS.items()}


def isclose_rel(a, b, tol):
    return math.isclose(a, b, rel_tol=tol, abs_tol=0.0) or a == b
