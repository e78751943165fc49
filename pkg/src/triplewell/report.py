"""Table regeneration and result formatting behind the command line."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import mpmath

from .potential import TripleWellParams
from .precision import PrecisionContext, resolve
from .solver import converged_spectrum
from .spectrum import energy_differences, instanton_spectrum
from .verification import VerificationOutcome, run_suite

log = logging.getLogger(__name__)

TABLE_OMEGAS = (30, 50, 70, 90, 110)
# Working digits per omega for table regeneration; each clears the digits
# needed for its row's printed entries with room for the escalation check.
PRECISION_FLOORS = {30: 30, 50: 34, 70: 38, 90: 42, 110: 45}
# Significant digits printed for the energies of each row.
ENERGY_DIGITS = {30: 20, 50: 20, 70: 25, 90: 30, 110: 30}
# Significant digits printed for the energy differences.
SPLITTING_DIGITS = 10

FORMATS = ("csv", "json", "text")


@dataclass(frozen=True)
class ReportRow:
    """One output row: omega plus labelled full-precision decimal strings."""

    omega: str
    columns: tuple  # ((label, decimal string), ...)
    methods: tuple  # method tag per column

    def as_dict(self) -> dict:
        return {"omega": self.omega, **dict(self.columns)}


def format_decimal(x) -> str:
    """All digits ``x`` carries at its own working precision.

    Parsing the result at that precision gives back ``x`` to within one unit
    in the last digit.
    """
    if isinstance(x, int):
        return str(x)
    mp = getattr(x, "context", mpmath.mp)
    return mp.nstr(x, mp.dps, min_fixed=-3)


def format_omega(omega) -> str:
    if isinstance(omega, (int, float)) and float(omega).is_integer():
        return str(int(omega))
    if isinstance(omega, float):
        return repr(omega)
    return format_decimal(omega)


# ---------------------------------------------------------------------------
# Column builders
# ---------------------------------------------------------------------------


def _instanton_columns(params, ctx):
    spec = instanton_spectrum(params, ctx)
    diff = energy_differences(spec)
    return {
        "E0_ins": spec.e0, "E1_ins": spec.e1, "E2_ins": spec.e2,
        "dE10_ins": diff.delta10, "dE21_ins": diff.delta21,
    }


def _numeric_columns(params, target_digits, ctx, basis):
    triplet, result = converged_spectrum(params, target_digits, ctx, basis_size=basis)
    diff = energy_differences(triplet)
    log.info("omega=%s numeric: %d stable digits after %s", params.omega, result.stable_digits,
             result.escalations)
    return {
        "E0_num": triplet.e0, "E1_num": triplet.e1, "E2_num": triplet.e2,
        "dE10_num": diff.delta10, "dE21_num": diff.delta21,
        "stable_digits_num": result.stable_digits,
    }


def _row(omega, values: dict, labels) -> ReportRow:
    cols = tuple((label, format_decimal(values[label])) for label in labels)
    methods = tuple("numeric" if label.endswith("_num") else "instanton" for label in labels)
    return ReportRow(format_omega(omega), cols, methods)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def numeric_context(omega, target_digits: int, ctx: PrecisionContext | None = None) -> PrecisionContext:
    """Starting precision for a converged solve: the table floor or target + 10."""
    floor = PRECISION_FLOORS.get(omega, max(30, target_digits + 10))
    if ctx is not None:
        floor = max(floor, ctx.digits)
    return PrecisionContext(max(floor, target_digits + 10))


def cmd_spectrum(omega, method: str = "instanton", target_digits: int = 20,
                 basis: int | None = None, ctx: PrecisionContext | None = None) -> ReportRow:
    """E0, E1, E2 and both splittings by the requested method(s)."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if method not in ("instanton", "numeric", "both"):
        raise ValueError(f"method must be instanton, numeric or both, got {method!r}")
    params = TripleWellParams(omega)
    values, labels = {}, []
    if method in ("instanton", "both"):
        ins_ctx = resolve(ctx)
        if ins_ctx.digits < target_digits + 10:
            ins_ctx = ins_ctx.with_digits(target_digits + 10)
        values.update(_instanton_columns(params, ins_ctx))
        labels += ["E0_ins", "E1_ins", "E2_ins", "dE10_ins", "dE21_ins"]
    if method in ("numeric", "both"):
        values.update(_numeric_columns(params, target_digits, numeric_context(omega, target_digits, ctx), basis))
        labels += ["E0_num", "E1_num", "E2_num", "dE10_num", "dE21_num", "stable_digits_num"]
    return _row(omega, values, labels)


def table_target_digits(omega, which: int) -> int:
    """Energy digits a numeric row needs so every printed entry is resolved."""
    if which == 2:
        return ENERGY_DIGITS[omega]
    # Resolving dE21 to SPLITTING_DIGITS needs that many digits beyond the
    # ratio E1 / dE21, estimated from the instanton splitting.
    ctx = PrecisionContext(PRECISION_FLOORS[omega])
    diff = energy_differences(instanton_spectrum(TripleWellParams(omega), ctx))
    ratio = float(ctx.mp.log10(ctx.mpf(omega) / diff.delta21))
    return SPLITTING_DIGITS + int(ratio) + 1


def _table_row(omega: int, which: int, digits: int | None) -> ReportRow:
    ctx = PrecisionContext(digits) if digits else None
    params = TripleWellParams(omega)
    num = _numeric_columns(params, table_target_digits(omega, which),
                           numeric_context(omega, table_target_digits(omega, which), ctx), None)
    if which == 2:
        return _row(omega, num, ["E0_num", "E1_num", "E2_num"])
    ins = _instanton_columns(params, PrecisionContext(max(60, digits or 0)))
    return _row(omega, {**num, **ins}, ["dE10_num", "dE10_ins", "dE21_num", "dE21_ins"])


def cmd_table(which: int, ctx: PrecisionContext | None = None, *, omegas=TABLE_OMEGAS,
              jobs: int = 1) -> list:
    """Regenerate a table: 1 = splittings by both methods, 2 = numeric energies.

    Rows are independent; with ``jobs > 1`` they run in worker processes and
    are reassembled in omega order.
    """
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which}")
    digits = ctx.digits if ctx is not None else None
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_table_row, w, which, digits) for w in omegas]
            return [f.result() for f in futures]
    return [_table_row(w, which, digits) for w in omegas]


def cmd_sweep(omega_min, omega_max, steps: int, ctx: PrecisionContext | None = None) -> list:
    """Instanton E0/omega and dE21 on an even omega grid (plot data)."""
    if not 0 < omega_min < omega_max:
        raise ValueError(f"need 0 < omega_min < omega_max, got {omega_min}, {omega_max}")
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    ctx = resolve(ctx)
    mp = ctx.mp
    lo, hi = mp.mpf(omega_min), mp.mpf(omega_max)
    rows = []
    for k in range(steps):
        w = lo + (hi - lo) * k / (steps - 1)
        if w == int(w):
            w = int(w)
        params = TripleWellParams(w)
        spec = instanton_spectrum(params, ctx)
        values = {"E0_ins_over_omega": spec.e0 / mp.mpf(w),
                  "dE21_ins": energy_differences(spec).delta21}
        rows.append(_row(w, values, ["E0_ins_over_omega", "dE21_ins"]))
    return rows


def cmd_verify(suite: str = "all", ctx: PrecisionContext | None = None, *,
               max_terms: int | None = None) -> list:
    return run_suite(suite, ctx, max_terms=max_terms)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def render_rows(rows: list, fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    if not rows:
        return ""
    header = ["omega"] + [label for label, _ in rows[0].columns]
    if fmt == "json":
        return json.dumps([r.as_dict() for r in rows], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([r.omega] + [v for _, v in r.columns])
        return buf.getvalue()
    table = [header] + [[r.omega] + [v for _, v in r.columns] for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(header))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() + "\n" for line in table)


def render_verification(outcomes: list, fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    if fmt == "json":
        payload = [
            {"suite": o.suite_name, "passed": o.passed,
             "checks": [{"description": c.description, "passed": c.passed,
                         "error": c.error, "tolerance": c.tolerance} for c in o.checks]}
            for o in outcomes
        ]
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["suite", "description", "passed", "error", "tolerance"])
        for o in outcomes:
            for c in o.checks:
                writer.writerow([o.suite_name, c.description, c.passed, repr(c.error), repr(c.tolerance)])
        return buf.getvalue()
    lines = []
    for o in outcomes:
        lines.append(f"[{'PASS' if o.passed else 'FAIL'}] {o.suite_name} ({len(o.checks)} checks)")
        for c in o.checks:
            if not c.passed:
                lines.append(f"    FAIL {c.description}: error {c.error:.3e}, tolerance {c.tolerance:.3e}")
    return "\n".join(lines) + "\n"


__all__ = [
    "ReportRow", "VerificationOutcome", "cmd_spectrum", "cmd_table", "cmd_sweep", "cmd_verify",
    "render_rows", "render_verification", "format_decimal",
]
