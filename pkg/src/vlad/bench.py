"""Benchmark program generator, host-side reference and the n-sweep runner.

The benchmark is ``f(x)``: start with ``y = x``; for ``i = 1..n`` run
``l(x, i)`` Newton steps ``y <- (y + x/y)/2``; return ``y``.  The inner trip
count ``l(x, i) = 2^(lg n - floor(lg(1 + (1007 floor(3^x) i mod n))))`` is
tiny on most outer iterations and ``O(n)`` on a few.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

CSV_HEADER = ("n", "mode", "tau", "steps", "basis_ops", "peak_tape", "peak_ckpts",
              "peak_ckpt_slots", "depth", "wall_ms", "y", "grad", "error")

MODES = ("reverse", "binomial", "forward")


@dataclass(frozen=True)
class BenchParams:
    n: int
    x0: float = 3.0
    mode: str = "binomial"
    tau: int = 64

    def __post_init__(self):
        if self.n < 1 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two, got {self.n}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tau < 1:
            raise ValueError("tau must be positive")


def _check_pow2(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"n must be a power of two, got {n}")
    return n.bit_length() - 1


def loop_bound(x: float, i: int, n: int) -> int:
    lg_n = _check_pow2(n)
    r = (1007 * math.floor(math.pow(3.0, x)) * i) % n
    return 2 ** (lg_n - ((1 + r).bit_length() - 1))


def reference(x: float, n: int) -> float:
    """The benchmark computed directly in the host, same float operations in the same order."""
    y = x
    for i in range(1, n + 1):
        for _ in range(loop_bound(x, i, n)):
            y = (y + x / y) / 2.0
    return y


def reference_steps_inner(x: float, n: int) -> int:
    """Total inner-loop trip count."""
    return sum(loop_bound(x, i, n) for i in range(1, n + 1))


def gen_benchmark(n: int) -> str:
    """Source text of the benchmark closure for outer iteration count ``n``."""
    lg_n = _check_pow2(n)
    return f"""\
; benchmark f(x) for n = {n}
(lambda (x)
  (let ((c (mul 1007 (floor (expt 3 x)))))
    (letrec ((bound (lambda (i)
                      (expt 2 (sub {lg_n}
                                   (floor (div (log (add 1 (mod (mul c i) {n})))
                                               (log 2)))))))
             (inner (lambda (k y)
                      (if (le k 0)
                          y
                          (inner (sub k 1) (div (add y (div x y)) 2)))))
             (outer (lambda (i y)
                      (if (lt {n} i)
                          y
                          (outer (add i 1) (inner (bound i) y))))))
      (outer 1 x))))
"""


def load_benchmark(n: int):
    """Evaluate the generated source to the benchmark closure."""
    from .machine import evaluate
    from .syntax import parse_program
    f, _ = evaluate(parse_program(gen_benchmark(n)))
    return f


def gradient(f, x0: float, mode: str, tau: int, ybar=1.0):
    """``(y, dy/dx)`` of closure ``f`` at ``x0`` using the named AD mode."""
    from . import ad
    from .binomial import BinomialConfig, binomial_j
    if mode == "reverse":
        return ad.reverse_j(f, x0, ybar)
    if mode == "binomial":
        return binomial_j(f, x0, ybar, BinomialConfig(tau))
    if mode == "forward":
        return ad.forward_j(f, x0, ybar)
    raise ValueError(f"unknown mode {mode!r}")


def metrics_row(n, mode, tau, report, y, grad, error="") -> dict:
    from .runtime import primal_of
    row = dict.fromkeys(CSV_HEADER, "")
    row.update(n=n, mode=mode, tau=tau if mode == "binomial" else "", error=error)
    if report is not None:
        row.update(steps=report.total_dispatch_steps, basis_ops=report.basis_op_count,
                   peak_tape=report.peak_tape_nodes, peak_ckpts=report.peak_live_checkpoints,
                   peak_ckpt_slots=report.peak_checkpoint_real_slots,
                   depth=report.recursion_depth, wall_ms=f"{report.wall_time_ms:.3f}")
    if y is not None:
        row.update(y=repr(primal_of(y)), grad=repr(primal_of(grad)))
    return row


def run_one(params: BenchParams) -> dict:
    from .errors import VladError
    from .metrics import with_metrics
    try:
        f = load_benchmark(params.n)
        (y, g), report = with_metrics(lambda: gradient(f, params.x0, params.mode, params.tau))
    except (VladError, RecursionError) as err:
        return metrics_row(params.n, params.mode, params.tau, None, None, None,
                           f"{type(err).__name__}: {err}")
    return metrics_row(params.n, params.mode, params.tau, report, y, g)


def sweep_sizes(n_min: int, n_max: int) -> list[int]:
    _check_pow2(n_min)
    _check_pow2(n_max)
    sizes = []
    n = n_min
    while n <= n_max:
        sizes.append(n)
        n *= 2
    return sizes


def run_sweep(n_min: int, n_max: int, modes=("reverse", "binomial"), tau: int = 64,
              x0: float = 3.0, out=None):
    """One row per (n, mode), in order; rows are written to ``out`` (a text
    stream) as they complete.  Returns the list of row dicts."""
    writer = None
    if out is not None:
        writer = csv.DictWriter(out, fieldnames=CSV_HEADER)
        writer.writeheader()
    rows = []
    for n in sweep_sizes(n_min, n_max):
        for mode in modes:
            row = run_one(BenchParams(n=n, x0=x0, mode=mode, tau=tau))
            rows.append(row)
            if writer is not None:
                writer.writerow(row)
                out.flush()
    return rows


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
