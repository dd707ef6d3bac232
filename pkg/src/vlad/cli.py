"""Command line entry point: ``run``, ``grad`` and ``bench`` subcommands."""

from __future__ import annotations

import argparse
import csv
import re
import sys

from . import bench
from .errors import VladError
from .runtime import show

EXIT_EVAL = 1
EXIT_USAGE = 2


def _pow2(text: str) -> int:
    m = re.fullmatch(r"2\^(\d+)", text.strip())
    try:
        n = 2 ** int(m.group(1)) if m else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1 or n & (n - 1):
        raise argparse.ArgumentTypeError(f"{text!r} is not a power of two")
    return n


def _positive(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return k


def _modes(text: str) -> list[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in bench.MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"unknown mode(s): {', '.join(bad) or text!r}")
    return modes


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vlad", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evaluate a program and print its value")
    r.add_argument("file")
    which = r.add_mutually_exclusive_group()
    which.add_argument("--cps", dest="evaluator", action="store_const", const="cps")
    which.add_argument("--direct", dest="evaluator", action="store_const", const="direct")
    r.add_argument("--trace", action="store_true",
                   help="dump one 'n<TAB>kind' line per dispatch to stderr (CPS only)")
    r.add_argument("--tau", type=_positive, default=64)
    r.set_defaults(evaluator="cps")

    g = sub.add_parser("grad", help="differentiate the closure a program evaluates to")
    g.add_argument("file")
    g.add_argument("--op", choices=("reverse", "binomial", "forward"), required=True)
    g.add_argument("--input", type=float, required=True)
    g.add_argument("--seed", type=float, required=True,
                   help="output cotangent (reverse, binomial) or input tangent (forward)")
    g.add_argument("--tau", type=_positive, default=64)
    g.add_argument("--metrics", metavar="OUT.csv")

    b = sub.add_parser("bench", help="run the benchmark sweep and write CSV")
    b.add_argument("--n-min", type=_pow2, required=True)
    b.add_argument("--n-max", type=_pow2, required=True)
    b.add_argument("--modes", type=_modes, default=["reverse", "binomial"])
    b.add_argument("--tau", type=_positive, default=64)
    b.add_argument("--x0", type=float, default=3.0)
    b.add_argument("--out", required=True)
    return p


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _cmd_run(args) -> None:
    from .syntax import parse_program
    expr = parse_program(_read(args.file))
    if args.evaluator == "direct":
        from .eval_direct import evaluate
        value = evaluate(expr, None, args.tau)
    else:
        from .machine import evaluate
        trace = None
        if args.trace:
            def trace(n, kind):
                sys.stderr.write(f"{n}\t{kind}\n")
        value, _ = evaluate(expr, None, args.tau, trace)
    print(show(value))


def _cmd_grad(args) -> None:
    from .machine import evaluate
    from .metrics import with_metrics
    from .syntax import parse_program
    f, _ = evaluate(parse_program(_read(args.file)), None, args.tau)
    (y, g), report = with_metrics(
        lambda: bench.gradient(f, args.input, args.op, args.tau, args.seed))
    print(show(y), show(g))
    if args.metrics:
        with open(args.metrics, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=bench.CSV_HEADER)
            w.writeheader()
            w.writerow(bench.metrics_row("", args.op, args.tau, report, y, g))


def _cmd_bench(args) -> None:
    if args.n_min > args.n_max:
        raise _Usage("--n-min must not exceed --n-max")
    with open(args.out, "w", newline="") as fh:
        rows = bench.run_sweep(args.n_min, args.n_max, args.modes, args.tau, args.x0, fh)
    failed = [r for r in rows if r["error"]]
    for r in failed:
        print(f"n={r['n']} mode={r['mode']}: {r['error']}", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {args.out}")


class _Usage(Exception):
    pass


def main(argv=None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handler = {"run": _cmd_run, "grad": _cmd_grad, "bench": _cmd_bench}[args.command]
    try:
        handler(args)
    except (OSError, _Usage) as err:
        print(f"vlad: {err}", file=sys.stderr)
        return EXIT_USAGE
    except VladError as err:
        where = f" (step {err.step})" if err.step is not None else ""
        print(f"vlad: {type(err).__name__}{where}: {err}", file=sys.stderr)
        return EXIT_EVAL
    except RecursionError:
        print("vlad: host recursion limit exceeded", file=sys.stderr)
        return EXIT_EVAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
