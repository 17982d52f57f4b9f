"""Command-line front end: ``deweight {reduce,approx-weights,count,gamma,selftest}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from fractions import Fraction

from . import selftest
from .count import (
    DEFAULT_CAP,
    BackendError,
    CapExceeded,
    CounterProfile,
    decimal_sci,
    integrate,
)
from .formula import FormatError, WeightedFormula, WeightError, emit, normalize, parse
from .rational import WeightParseError, parse_weight
from .reduce import (
    UNBOUNDED,
    NotNormalizedError,
    Reduction,
    combined_error,
    deweight_reduce,
    dyadic_adjust,
    dyadic_reduce,
    farey_adjust,
    format_gamma,
    budget_reduce,
)

log = logging.getLogger("deweight")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_IO = 3
EXIT_BACKEND = 4
EXIT_CAP = 5

DEFAULT_EPSILON = Fraction(4, 5)
DEFAULT_DELTA = Fraction(1, 5)


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_weight(text)
    except WeightParseError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _read_formula(path: str) -> WeightedFormula:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    return parse(text)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _fmt_gamma(g) -> str:
    if g is UNBOUNDED:
        return "unbounded"
    return f"{_fmt(g)} (~{decimal_sci(g)})"


def _reduce_for_mode(args, f: WeightedFormula) -> Reduction:
    if args.mode == "exact":
        return deweight_reduce(f)
    if args.mode == "dyadic":
        if args.bits is None:
            raise UsageError("--mode dyadic needs --bits")
        return dyadic_reduce(f, args.bits)[0]
    if args.budget is None:
        raise UsageError("--mode budget needs --budget")
    return budget_reduce(f, args.budget)[0]


def cmd_reduce(args) -> int:
    if not args.output:
        raise UsageError("reduce needs -o/--output")
    f = normalize(_read_formula(args.input))
    red = _reduce_for_mode(args, f)
    _write(args.output, emit(red.reduced_formula, include_weights=False))
    _write(args.output + ".meta.json", red.metadata_json())
    print(f"c_w {red.c_w}")
    print(f"total_fresh {red.total_fresh}")
    print(f"variables {red.reduced_formula.num_variables}")
    if red.gamma is not None:
        print(f"gamma {format_gamma(red.gamma)}")
    return EXIT_OK


def cmd_approx_weights(args) -> int:
    if args.budget is None:
        raise UsageError("approx-weights needs --budget")
    if not args.output:
        raise UsageError("approx-weights needs -o/--output")
    f = normalize(_read_formula(args.input))
    adj = farey_adjust(f, args.budget)
    _write(args.output, emit(adj.adjusted, include_weights=True))
    print(f"{'var':>8} {'original':>14} {'adjusted':>14} {'distance':>14}")
    for var, (pos, _neg) in f.weights.items():
        new = adj.adjusted.weights.get(var)
        if new is None:
            forced = (var,) in adj.adjusted.clauses[len(f.clauses):]
            new_w = Fraction(1) if forced else Fraction(0)
            print(
                f"warning: weight of variable {var} ({_fmt(pos)}) rounds to {_fmt(new_w)}; "
                "replaced by a unit clause",
                file=sys.stderr,
            )
        else:
            new_w = new[0]
        print(f"{var:>8} {_fmt(pos):>14} {_fmt(new_w):>14} {_fmt(abs(pos - new_w)):>14}")
    print(f"gamma {_fmt_gamma(adj.gamma)}")
    return EXIT_OK


def _profile(args) -> CounterProfile:
    cmd = args.counter_cmd or os.environ.get("DEWEIGHT_COUNTER")
    if not cmd:
        raise UsageError("external backend needs --counter-cmd or DEWEIGHT_COUNTER")
    try:
        return CounterProfile(cmd, args.counter_pattern, args.timeout)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_count(args) -> int:
    f = normalize(_read_formula(args.input))
    profile = None
    if args.backend == "external":
        if args.epsilon <= 0 or not 0 <= args.delta < 1:
            raise UsageError("external backend needs epsilon > 0 and 0 <= delta < 1")
        profile = _profile(args)
    red = _reduce_for_mode(args, f)
    start = time.perf_counter()
    res = integrate(
        f,
        args.epsilon,
        args.delta,
        backend=args.backend,
        profile=profile,
        cap=args.cap,
        reduction=red,
    )
    elapsed = time.perf_counter() - start
    print(f"estimate {_fmt(res.value)}")
    print(f"decimal {decimal_sci(res.value)}")
    tol = res.epsilon if red.gamma is None else combined_error(res.epsilon, red.gamma)
    if tol is UNBOUNDED:
        print("interval [0, inf)")
    else:
        lo, hi = res.value / (1 + tol), res.value * (1 + tol)
        print(f"interval [{_fmt(lo)}, {_fmt(hi)}]")
        print(f"tolerance {_fmt(tol)}")
    print(f"delta {_fmt(res.delta)}")
    print(f"raw_count {res.raw_count}")
    print(f"c_w {res.c_w}")
    print(f"backend {res.backend}")
    print(f"time {elapsed:.3f}s")
    return EXIT_OK


def cmd_gamma(args) -> int:
    f = normalize(_read_formula(args.input))
    if args.bits is not None and args.mode != "budget":
        adj = dyadic_adjust(f, args.bits)
    elif args.budget is not None:
        adj = farey_adjust(f, args.budget)
    else:
        raise UsageError("gamma needs --bits (dyadic) or --budget")
    print(f"gamma {_fmt_gamma(adj.gamma)}")
    print(f"epsilon {_fmt(args.epsilon)}")
    print(f"combined {_fmt_gamma(combined_error(args.epsilon, adj.gamma))}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    cnf = selftest.flipped_connector_cnf if args.inject_fault else selftest.guarded_cnf
    print(f"seed {args.seed}")
    ok = True
    for suite in selftest.run_all(args.seed, cnf=cnf):
        status = "PASS" if suite.ok else "FAIL"
        print(f"{status} {suite.name}: {suite.checked - len(suite.failures)}/{suite.checked}")
        for failure in suite.failures[:10]:
            print(f"  counterexample {failure}")
        ok = ok and suite.ok
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "reduce": cmd_reduce,
    "approx-weights": cmd_approx_weights,
    "count": cmd_count,
    "gamma": cmd_gamma,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output")
    common.add_argument("--mode", choices=("exact", "dyadic", "budget"), default="exact")
    common.add_argument("--bits", type=int, help="dyadic bits per weight")
    common.add_argument("--budget", type=int, help="Farey bit budget per weight")
    common.add_argument("--epsilon", type=_rational, default=DEFAULT_EPSILON)
    common.add_argument("--delta", type=_rational, default=DEFAULT_DELTA)
    common.add_argument("--backend", choices=("exact", "external"), default="exact")
    common.add_argument("--counter-cmd", help="command template with {file}, {epsilon}, {delta}")
    common.add_argument("--counter-pattern", choices=("s-mc", "mult-pow2"), default="s-mc")
    common.add_argument("--timeout", type=int, default=3600)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="exact backend projection cap")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="deweight",
        description="Reduce weighted model counting to unweighted projected model counting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("reduce", "approx-weights", "count", "gamma"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("input", help="DIMACS CNF file ('-' for stdin)")
    st = sub.add_parser("selftest", parents=[common])
    st.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (FormatError, WeightError, NotNormalizedError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.output:
            print(exc.output.rstrip(), file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
