"""``triplewell`` command line: spectrum, table, verify and sweep.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 verification failure, 2 solver failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import EscalationBudgetError, TripleWellError
from .precision import ENV_DIGITS, PrecisionContext
from .report import (
    FORMATS,
    cmd_spectrum,
    cmd_sweep,
    cmd_table,
    cmd_verify,
    format_decimal,
    render_rows,
    render_verification,
)
from .verification import SUITES

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_SOLVER_FAILED = 2
EXIT_USAGE = 64

log = logging.getLogger("triplewell")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="triplewell", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fmt = dict(choices=FORMATS, default="text", help="output format (default: text)")

    p = sub.add_parser("spectrum", help="lowest three levels at one omega")
    p.add_argument("--omega", type=_positive_float, required=True)
    p.add_argument("--method", choices=("instanton", "numeric", "both"), default="instanton")
    p.add_argument("--digits", type=_positive_int, default=20,
                   help="target significant digits for the numeric solver (default: 20)")
    p.add_argument("--basis", type=_positive_int, default=None, help="initial basis size per parity block")
    p.add_argument("--format", **fmt)

    p = sub.add_parser("table", help="regenerate a reference table over omega = 30..110")
    p.add_argument("--which", type=int, choices=(1, 2), required=True)
    p.add_argument("--jobs", type=_positive_int, default=1, help="rows computed in parallel")
    p.add_argument("--format", **fmt)

    p = sub.add_parser("verify", help="run self-consistency suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--max-terms", type=_positive_int, default=None,
                   help="multi-instanton terms in truncated amplitude sums (default: 24)")
    p.add_argument("--format", **fmt)

    p = sub.add_parser("sweep", help="instanton E0/omega and dE21 over an omega grid")
    p.add_argument("--omega-min", type=_positive_float, default=30.0)
    p.add_argument("--omega-max", type=_positive_float, default=110.0)
    p.add_argument("--steps", type=_positive_int, default=5)
    p.add_argument("--format", **fmt)
    return parser


def _env_context() -> PrecisionContext | None:
    """Context from TRIPLEWELL_DIGITS, or None when the variable is unset."""
    try:
        ctx = PrecisionContext.default()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return ctx if ENV_DIGITS in os.environ else None


def _report_partial(exc: EscalationBudgetError) -> None:
    print(f"solver failure: {exc}", file=sys.stderr)
    if exc.best is not None:
        triplet, result = exc.best
        print(f"best so far ({result.stable_digits} stable digits): "
              f"E0={format_decimal(triplet.e0)} E1={format_decimal(triplet.e1)} "
              f"E2={format_decimal(triplet.e2)}", file=sys.stderr)


def run(args: argparse.Namespace) -> int:
    ctx = _env_context()
    out = sys.stdout
    if args.command == "spectrum":
        row = cmd_spectrum(args.omega, args.method, args.digits, args.basis, ctx)
        out.write(render_rows([row], args.format))
        return EXIT_OK
    if args.command == "table":
        out.write(render_rows(cmd_table(args.which, ctx, jobs=args.jobs), args.format))
        return EXIT_OK
    if args.command == "sweep":
        if not args.omega_min < args.omega_max:
            raise UsageError("--omega-min must be below --omega-max")
        if args.steps < 2:
            raise UsageError("--steps must be at least 2")
        out.write(render_rows(cmd_sweep(args.omega_min, args.omega_max, args.steps, ctx), args.format))
        return EXIT_OK
    outcomes = cmd_verify(args.suite, ctx, max_terms=args.max_terms)
    out.write(render_verification(outcomes, args.format))
    for o in outcomes:
        for c in o.checks:
            if not c.passed:
                print(f"{o.suite_name}: FAIL {c.description} (error {c.error:.3e}, tolerance {c.tolerance:.3e})",
                      file=sys.stderr)
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_VERIFY_FAILED


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except UsageError as exc:
        print(f"triplewell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EscalationBudgetError as exc:
        _report_partial(exc)
        return EXIT_SOLVER_FAILED
    except TripleWellError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILED


if __name__ == "__main__":
    sys.exit(main())
