"""Self-checks that pit each closed form against an independent route.

Each suite returns a :class:`VerificationOutcome` whose checks record the
measured error next to the tolerance it was judged against.  Failures are
data: nothing here raises on a failed comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .dilute_gas import (
    DEFAULT_MAX_I,
    AmplitudeMode,
    IntegralMethod,
    SequenceKind,
    amplitude_0_to_1,
    amplitude_1_to_1,
    basic_integral,
    series_term,
    spectral_weights,
)
from .potential import (
    InstantonProfile,
    ProfileKind,
    TripleWellParams,
    classical_action,
    eval_potential,
    instanton_prefactors,
    instanton_profile,
    instanton_velocity,
    well_frequencies,
)
from .precision import PrecisionContext

SUITES = ("integrals", "series", "amplitudes", "eom", "action")


@dataclass(frozen=True)
class Check:
    description: str
    passed: bool
    error: float
    tolerance: float


@dataclass(frozen=True)
class VerificationOutcome:
    suite_name: str
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def relative_error(value, reference) -> float:
    if reference == 0:
        return float(abs(value))
    return float(abs(value - reference) / abs(reference))


def _within(description, value, reference, tolerance) -> Check:
    err = relative_error(value, reference)
    return Check(description, err <= tolerance, err, tolerance)


def _setup(omega, ctx):
    params = TripleWellParams(omega)
    return params, well_frequencies(params, ctx), instanton_prefactors(params, ctx)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def verify_integrals(ctx: PrecisionContext | None = None, *, omegas=(1, 30), times=("0.1", "0.5", "1.0"),
                     max_order: int = 4, tolerance: float = 1e-25) -> VerificationOutcome:
    """Closed form vs recursion vs ordered-time quadrature for I(n, m; T), n + m <= max_order."""
    ctx = ctx or PrecisionContext(60)
    checks = []
    for omega in omegas:
        _, wells, pre = _setup(omega, ctx)
        for T in times:
            for n in range(max_order + 1):
                for m in range(max_order + 1 - n):
                    ref = basic_integral(n, m, T, wells, pre, IntegralMethod.CLOSED_FORM, ctx).value
                    for method in (IntegralMethod.RECURSIVE, IntegralMethod.QUADRATURE):
                        got = basic_integral(n, m, T, wells, pre, method, ctx).value
                        checks.append(_within(
                            f"I({n},{m};T={T}) omega={omega}: {method.value} vs closedForm",
                            got, ref, tolerance))
    return VerificationOutcome("integrals", tuple(checks))


def series_closed_forms(u, mp) -> dict:
    """The four canonical closed forms, all in terms of sqrt(1 + (2u)^2)."""
    r = mp.sqrt(1 + 4 * u * u)
    return {
        (SequenceKind.A_PLUS, 0): u / r,
        (SequenceKind.A_PLUS, 1): (1 - 1 / r) / 2,
        (SequenceKind.LAMBDA_PLUS, 0): (1 - 1 / r) / 2,
        (SequenceKind.LAMBDA_PLUS, 1): 4 * u**3 / (r * (1 + r) ** 2),
    }


def inverted_radicand_lambda0(u, mp):
    """The Lambda_0^+ variant written with (delta/2B) in the radicand."""
    return (1 - 1 / mp.sqrt(1 + 1 / (4 * u * u))) / 2


def partial_sum(kind, index, u, terms: int, mp):
    term = series_term(kind, index, u, mp)
    return mp.fsum(term(k) for k in range(terms))


def verify_series(ctx: PrecisionContext | None = None, *, u="0.1", terms: int = 60,
                  tolerance: float = 1e-20) -> VerificationOutcome:
    """Partial sums of the defining series against their closed forms."""
    ctx = ctx or PrecisionContext(60)
    mp = ctx.mp
    u = mp.mpf(u)
    forms = series_closed_forms(u, mp)
    checks = []
    sums = {}
    for (kind, index), closed in forms.items():
        sums[(kind, index)] = s = partial_sum(kind, index, u, terms, mp)
        name = f"{'a' if kind in (SequenceKind.A_PLUS,) else 'Lambda'}{index}+"
        checks.append(_within(f"{name} partial sum ({terms} terms) vs closed form at u={mp.nstr(u, 6)}",
                              s, closed, tolerance))
    # The inverted radicand must be rejected, and by a wide margin.
    err = relative_error(inverted_radicand_lambda0(u, mp), sums[(SequenceKind.LAMBDA_PLUS, 0)])
    checks.append(Check("Lambda0+ with (delta/2B) radicand is rejected by > 10x tolerance",
                        err > 10 * tolerance, err, 10 * tolerance))
    return VerificationOutcome("series", tuple(checks))


def verify_amplitudes(ctx: PrecisionContext | None = None, *, max_terms: int = DEFAULT_MAX_I,
                      tolerance: float = 1e-12, mismatch: float = 1e-6) -> VerificationOutcome:
    """Truncated multi-instanton sums against the assembled spectral forms."""
    ctx = ctx or PrecisionContext(60)
    checks = []

    _, wells, pre = _setup(30, ctx)
    T = ctx.mpf("0.3")
    truncated = amplitude_0_to_1(T, wells, pre, AmplitudeMode.TRUNCATED_SUM, ctx, max_i=max_terms).value
    for level, want_match in ((2, True), (1, False)):
        closed = amplitude_0_to_1(T, wells, pre, AmplitudeMode.CLOSED_FORM, ctx, upper_level=level).value
        err = relative_error(truncated, closed)
        if want_match:
            checks.append(Check(f"0->1 sum (maxI={max_terms}) omega=30 T=0.3 matches (E0, E2) form",
                                err <= tolerance, err, tolerance))
        else:
            checks.append(Check("0->1 sum omega=30 T=0.3 rejects (E0, E1) form",
                                err > mismatch, err, mismatch))

    for omega in (1, 30):
        _, wells, pre = _setup(omega, ctx)
        weights = spectral_weights(wells, pre, ctx)
        worst = min(weights)
        checks.append(Check(f"1->1 spectral weights non-negative at omega={omega}",
                            worst >= 0, float(max(-worst, 0)), 0.0))
        for T in ("0.1", "0.5"):
            closed = amplitude_1_to_1(T, wells, pre, AmplitudeMode.CLOSED_FORM, ctx).value
            summed = amplitude_1_to_1(T, wells, pre, AmplitudeMode.TRUNCATED_SUM, ctx, max_i=max_terms).value
            checks.append(_within(f"1->1 sum (maxI={max_terms}) omega={omega} T={T} vs closed form",
                                  summed, closed, tolerance))
    return VerificationOutcome("amplitudes", tuple(checks))


def second_difference_errors(params, profile, ctx, steps, sample_times) -> list:
    """Max over ``sample_times`` of |central second difference - V'(x)| for each step."""
    mp = ctx.mp
    x = lambda t: instanton_profile(params, profile, t, ctx)  # noqa: E731
    out = []
    for h in steps:
        worst = mp.zero
        for t in sample_times:
            accel = (x(t + h) - 2 * x(t) + x(t - h)) / (h * h)
            worst = max(worst, abs(accel - eval_potential(params, x(t), 1, ctx)))
        out.append(worst)
    return out


def observed_orders(errors) -> list:
    return [math.log2(float(errors[k] / errors[k + 1])) for k in range(len(errors) - 1)]


# The second difference is exactly second order; the h^4 term shifts the
# measured slope by ~(h omega)^2, far below this margin at the steps used.
MIN_OBSERVED_ORDER = 1.999


def verify_eom(ctx: PrecisionContext | None = None, *, omegas=(1, 30),
               min_order: float = MIN_OBSERVED_ORDER) -> VerificationOutcome:
    """Each tunnelling profile solves x'' = V'(x) and has zero Euclidean energy."""
    ctx = ctx or PrecisionContext(60)
    mp = ctx.mp
    checks = []
    for omega in omegas:
        params = TripleWellParams(omega)
        w = mp.mpf(omega)
        sample = [mp.mpf(s) / w for s in ("-1.5", "-0.5", "0.3", "1", "2")]
        steps = [mp.mpf("1e-3") / w / 2**k for k in range(4)]
        for kind in ProfileKind:
            profile = InstantonProfile(kind, 0.0)
            orders = observed_orders(second_difference_errors(params, profile, ctx, steps, sample))
            worst = min(orders)
            checks.append(Check(f"{kind.value} omega={omega}: second-difference residual order",
                                worst >= min_order, worst, min_order))
            energy = max(
                abs(instanton_velocity(params, profile, t, ctx) ** 2 / 2 - eval_potential(params,
                    instanton_profile(params, profile, t, ctx), 0, ctx)) / w
                for t in sample
            )
            tol = float(ctx.epsilon) * 1e3
            checks.append(Check(f"{kind.value} omega={omega}: xdot^2/2 = V along the path",
                                energy <= tol, float(energy), tol))
    return VerificationOutcome("eom", tuple(checks))


def verify_action(ctx: PrecisionContext | None = None, *, omegas=(1, 30, 50, 110),
                  tolerance: float = 1e-40) -> VerificationOutcome:
    ctx = ctx or PrecisionContext(60)
    checks = []
    for omega in omegas:
        params = TripleWellParams(omega)
        quad = classical_action(params, "quadrature", ctx)
        checks.append(_within(f"S0 by quadrature = omega/4 at omega={omega}", quad,
                              classical_action(params, "analytic", ctx), tolerance))
    return VerificationOutcome("action", tuple(checks))


_RUNNERS: dict[str, Callable[..., VerificationOutcome]] = {
    "integrals": verify_integrals,
    "series": verify_series,
    "amplitudes": verify_amplitudes,
    "eom": verify_eom,
    "action": verify_action,
}


def run_suite(name: str, ctx: PrecisionContext | None = None, *, max_terms: int | None = None) -> list:
    """Run one suite, or every suite for ``name == "all"``."""
    names = SUITES if name == "all" else (name,)
    out = []
    for n in names:
        if n not in _RUNNERS:
            raise ValueError(f"unknown suite {n!r}; expected one of {', '.join(SUITES)} or all")
        if n == "amplitudes" and max_terms is not None:
            out.append(_RUNNERS[n](ctx, max_terms=max_terms))
        else:
            out.append(_RUNNERS[n](ctx))
    return out
