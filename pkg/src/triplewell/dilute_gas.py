"""Multi-instanton sums for the 0 -> 1 and 1 -> 1 transition amplitudes.

Everything is built on the basic integral

    I(n, m; T) = B^{n+m+1} e^{-(w0+w1)T/4}
                 * int_{-T/2}^{T/2} dt e^{delta t} (T/2+t)^n/n! (T/2-t)^m/m!

which is available three ways: an explicit binomial sum, the
integration-by-parts recursion, and a direct numerical evaluation of the
ordered-time (simplex) integral it came from.  Throughout, ``u`` denotes the
ratio B/delta.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath

from .errors import (
    MethodNotAllowedError,
    QuadratureError,
    SeriesConvergenceError,
    SingularSystemError,
)
from .potential import InstantonPrefactors, WellFrequencies
from .precision import PrecisionContext, mp_context, resolve, sum_series
from .spectrum import instanton_levels

MAX_ORACLE_TIMES = 5
DEFAULT_MAX_I = 24


class IntegralMethod(str, enum.Enum):
    CLOSED_FORM = "closedForm"
    RECURSIVE = "recursive"
    QUADRATURE = "quadratureOracle"


@dataclass(frozen=True)
class BasicIntegralValue:
    n: int
    m: int
    time_span: mpmath.mpf
    value: mpmath.mpf
    includes_common_factor: bool


def common_factor(T, wells: WellFrequencies, ctx: PrecisionContext | None = None):
    mp = resolve(ctx).mp
    return mp.exp(-(mp.mpf(wells.omega0) + mp.mpf(wells.omega1)) * mp.mpf(T) / 4)


# ---------------------------------------------------------------------------
# Ordered-time integrals
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _cos_table(n: int, digits: int) -> tuple:
    mp = mp_context(digits)
    return tuple(mp.cospi(mp.mpf(k) / (2 * n)) for k in range(4 * n))


def _ordered_time_chebyshev(factors, a, b, n, ctx):
    """One fixed-resolution evaluation; see :func:`ordered_time_integral`."""
    mp = ctx.mp
    half = (b - a) / 2
    mid = (a + b) / 2
    cos = _cos_table(n, ctx.digits)
    period = 4 * n

    def cheb(j, p):  # T_j(x_p) = cos(j * pi * (2p+1) / (2n))
        return cos[(j * (2 * p + 1)) % period]

    times = [mid + half * cheb(1, p) for p in range(n)]
    inner = [mp.one] * n
    total = mp.zero
    for level, f in enumerate(reversed(factors)):
        g = [f(t) * G for t, G in zip(times, inner)]
        c = [2 * mp.fsum(g[p] * cheb(j, p) for p in range(n)) / n for j in range(n)]
        c += [mp.zero, mp.zero]
        anti = [mp.zero] + [(c[j - 1] - c[j + 1]) / (2 * j) for j in range(1, n + 1)]
        at_top = mp.fsum(anti[1:])
        if level == len(factors) - 1:
            at_bottom = mp.fsum(anti[j] * (-1) ** j for j in range(1, n + 1))
            total = half * (at_top - at_bottom)
        else:
            # cheb(j, p) for j = n gives cos((2p+1) pi / 2) = 0, so the sum stops at n-1.
            inner = [half * (at_top - mp.fsum(anti[j] * cheb(j, p) for j in range(1, n)))
                     for p in range(n)]
    return total


def ordered_time_integral(
    factors: Sequence[Callable],
    a,
    b,
    ctx: PrecisionContext | None = None,
    *,
    start_points: int = 48,
    max_points: int = 400,
):
    """Integrate ``prod_j factors[j](t_j)`` over ``a < t_1 < ... < t_k < b``.

    The nested integrals are peeled from the innermost time outwards; each
    partial integral is represented by its values at Chebyshev points and
    integrated spectrally.  The point count grows by 1.5x until two successive
    resolutions agree to ``quad_tolerance``.

    Raises:
        QuadratureError: if ``max_points`` is reached without agreement.
    """
    ctx = resolve(ctx)
    mp = ctx.mp
    a, b = mp.mpf(a), mp.mpf(b)
    if not factors or a == b:
        return mp.one if not factors else mp.zero
    tol = mp.mpf(ctx.quad_tolerance)
    n = start_points
    prev = _ordered_time_chebyshev(factors, a, b, n, ctx)
    while True:
        n_next = (3 * n + 1) // 2
        if n_next > max_points:
            raise QuadratureError(a, b)
        cur = _ordered_time_chebyshev(factors, a, b, n_next, ctx)
        if abs(cur - prev) <= tol * max(abs(cur), ctx.epsilon):
            return cur
        prev, n = cur, n_next


# ---------------------------------------------------------------------------
# Basic integral
# ---------------------------------------------------------------------------


def _closed_form(n, m, T, wells, b, mp):
    """Binomial-sum evaluation, common factor included."""
    w0, w1, delta = mp.mpf(wells.omega0), mp.mpf(wells.omega1), mp.mpf(wells.delta)
    u = b / delta
    bt = b * T
    first = mp.fsum(
        math.comb(m + n - i, m) * (-1) ** (n - i) * u ** (n + m - i + 1) * bt**i / mp.factorial(i)
        for i in range(n + 1)
    )
    second = mp.fsum(
        math.comb(m + n - j, n) * (-1) ** (n + 1) * u ** (n + m - j + 1) * bt**j / mp.factorial(j)
        for j in range(m + 1)
    )
    return mp.exp(-w0 * T / 2) * first + mp.exp(-w1 * T / 2) * second


def _recursive_table(n_max, m_max, T, wells, b, mp):
    """I(n, m) without the common factor for all n <= n_max, m <= m_max."""
    delta = mp.mpf(wells.delta)
    u = b / delta
    bt = b * T
    up, down = mp.exp(delta * T / 2), mp.exp(-delta * T / 2)
    table = [[mp.zero] * (m_max + 1) for _ in range(n_max + 1)]
    table[0][0] = u * (up - down)
    for i in range(1, n_max + 1):
        table[i][0] = u * (bt**i / mp.factorial(i) * up - table[i - 1][0])
    for j in range(1, m_max + 1):
        table[0][j] = u * (table[0][j - 1] - bt**j / mp.factorial(j) * down)
    for i in range(1, n_max + 1):
        for j in range(1, m_max + 1):
            table[i][j] = u * (table[i][j - 1] - table[i - 1][j])
    return table


def _simplex_oracle(n, m, T, wells, b, ctx):
    """I(n, m) as an (n+m+1)-fold ordered-time integral, common factor included.

    n free times precede the weighted one and m follow it: their volumes are
    exactly (T/2+t)^n/n! and (T/2-t)^m/m!.
    """
    mp = ctx.mp
    delta = mp.mpf(wells.delta)
    one = lambda t: mp.one  # noqa: E731
    weighted = lambda t: mp.exp(delta * t)  # noqa: E731
    factors = [one] * n + [weighted] + [one] * m
    raw = ordered_time_integral(factors, -T / 2, T / 2, ctx)
    return b ** (n + m + 1) * common_factor(T, wells, ctx) * raw


def basic_integral(
    n: int,
    m: int,
    T,
    wells: WellFrequencies,
    pre: InstantonPrefactors,
    method: str | IntegralMethod = IntegralMethod.CLOSED_FORM,
    ctx: PrecisionContext | None = None,
    *,
    include_common_factor: bool = True,
) -> BasicIntegralValue:
    if n < 0 or m < 0:
        raise ValueError(f"n and m must be non-negative, got ({n}, {m})")
    ctx = resolve(ctx)
    mp = ctx.mp
    T = mp.mpf(T)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    method = IntegralMethod(method)
    b = mp.mpf(pre.coupling_b)
    cf = common_factor(T, wells, ctx)

    if method is IntegralMethod.CLOSED_FORM:
        value = _closed_form(n, m, T, wells, b, mp)
    elif method is IntegralMethod.RECURSIVE:
        value = _recursive_table(n, m, T, wells, b, mp)[n][m] * cf
    else:
        if n + m + 1 > MAX_ORACLE_TIMES:
            raise MethodNotAllowedError(
                f"quadrature oracle limited to n + m <= {MAX_ORACLE_TIMES - 1}, got n={n}, m={m}"
            )
        value = _simplex_oracle(n, m, T, wells, b, ctx)

    if not include_common_factor:
        value = value / cf
    return BasicIntegralValue(n, m, T, value, include_common_factor)


def _path_oracle(times, T, wells, pre, ctx, first_sign):
    """Alternating-exponent ordered-time integral of a tunnelling string.

    ``first_sign`` is +1 when the path starts in the central well (odd strings)
    and -1 when it starts in a side well (even strings).
    """
    if times > MAX_ORACLE_TIMES:
        raise MethodNotAllowedError(f"path oracle limited to {MAX_ORACLE_TIMES} ordered times, got {times}")
    mp = ctx.mp
    delta = mp.mpf(wells.delta)
    factors = [
        (lambda s: (lambda t: mp.exp(s * delta * t)))(first_sign * (-1) ** k) for k in range(times)
    ]
    return ordered_time_integral(factors, -T / 2, T / 2, ctx)


def odd_term(i: int, T, wells: WellFrequencies, pre: InstantonPrefactors,
             ctx: PrecisionContext | None = None,
             method: str | IntegralMethod = IntegralMethod.CLOSED_FORM):
    """Contribution of i+1 instantons and i anti-instantons to <1|e^{-HT}|0>.

    With ``method="quadratureOracle"`` the term is computed from the original
    2^i-configuration path integral with alternating exponents, not from I(i, i).
    """
    if i < 0:
        raise ValueError("i must be >= 0")
    ctx = resolve(ctx)
    mp = ctx.mp
    T = mp.mpf(T)
    norm = mp.mpf(pre.normalization)
    method = IntegralMethod(method)
    if method is IntegralMethod.QUADRATURE:
        ka = mp.mpf(pre.coupling_b) / mp.sqrt(2)
        raw = _path_oracle(2 * i + 1, T, wells, pre, ctx, first_sign=1)
        return 2**i * norm * ka ** (2 * i + 1) * common_factor(T, wells, ctx) * raw
    return norm / mp.sqrt(2) * basic_integral(i, i, T, wells, pre, method, ctx).value


def even_term(i: int, T, wells: WellFrequencies, pre: InstantonPrefactors,
              ctx: PrecisionContext | None = None,
              method: str | IntegralMethod = IntegralMethod.CLOSED_FORM):
    """Contribution of i instantons and i anti-instantons to <1|e^{-HT}|1>."""
    if i < 1:
        raise ValueError("i must be >= 1")
    ctx = resolve(ctx)
    mp = ctx.mp
    T = mp.mpf(T)
    norm = mp.mpf(pre.normalization)
    method = IntegralMethod(method)
    if method is IntegralMethod.QUADRATURE:
        ka = mp.mpf(pre.coupling_b) / mp.sqrt(2)
        raw = _path_oracle(2 * i, T, wells, pre, ctx, first_sign=-1)
        return 2 ** (i - 1) * norm * ka ** (2 * i) * mp.exp(-mp.mpf(wells.omega1) * T / 2) * raw
    return norm / 2 * basic_integral(i - 1, i, T, wells, pre, method, ctx).value


# ---------------------------------------------------------------------------
# Coefficient sequences
# ---------------------------------------------------------------------------


class SequenceKind(str, enum.Enum):
    A_PLUS = "aPlus"
    A_MINUS = "aMinus"
    LAMBDA_PLUS = "lambdaPlus"
    LAMBDA_MINUS = "lambdaMinus"


@dataclass(frozen=True)
class CoefficientSequence:
    """Coefficients of (BT)^j/j! in a summed multi-instanton amplitude.

    ``values[k]`` is the coefficient with index ``first_index + k``; only
    ``lambdaMinus`` starts at index 1.
    """

    kind: SequenceKind
    values: tuple
    ratio: mpmath.mpf
    first_index: int = 0


def series_term(kind: SequenceKind | str, index: int, u, mp) -> Callable[[int], object]:
    """k-th term of the defining series of a coefficient, k = 0, 1, ...

    The series collect the (BT)^j/j! coefficient of I(K, K) (a-sequences) or
    I(K, K+1) (Lambda-sequences) over all K.  ``lambdaMinus`` follows the
    shifted convention Lambda^-_i = S^-_{i-1}(i-1, i), so ``index`` >= 1 there.
    """
    kind = SequenceKind(kind)
    u = mp.mpf(u)
    j = index
    if kind is SequenceKind.A_PLUS:
        return lambda k: math.comb(2 * (k + j) - j, k + j) * (-1) ** k * u ** (2 * (k + j) - j + 1)
    if kind is SequenceKind.A_MINUS:
        return lambda k: math.comb(2 * (k + j) - j, k + j) * (-1) ** (k + j + 1) * u ** (2 * (k + j) - j + 1)
    if kind is SequenceKind.LAMBDA_PLUS:
        return lambda k: math.comb(2 * (k + j) + 1 - j, k + j + 1) * (-1) ** k * u ** (2 * (k + j) + 2 - j)
    if index < 1:
        raise ValueError("lambdaMinus is indexed from 1")
    start = j - 1
    return lambda k: math.comb(2 * (k + start) + 2 - j, k + start) * (-1) ** (k + start + 1) * u ** (
        2 * (k + start) + 3 - j
    )


def _check_domain(u, mp) -> None:
    if not 2 * u < 1:
        raise SeriesConvergenceError(
            f"defining series need 2B/delta < 1, got 2B/delta = {mp.nstr(2 * u, 8)}"
        )


def series_seed(kind: SequenceKind | str, index: int, u, ctx: PrecisionContext | None = None,
                max_terms: int = 4000):
    """Sum the defining series of one coefficient; raises if it cannot converge."""
    ctx = resolve(ctx)
    mp = ctx.mp
    u = mp.mpf(u)
    _check_domain(u, mp)
    result = sum_series(series_term(kind, index, u, mp), ctx, max_terms)
    if not result.converged:
        raise SeriesConvergenceError(
            f"{SequenceKind(kind).value}[{index}] series did not converge in {max_terms} terms"
        )
    return result.value


def _characteristic_roots(kind: SequenceKind, u, mp):
    """(r_plus, r_minus) of the two-term recursion obeyed by ``kind``."""
    half_inv = 1 / (2 * u)
    root = mp.sqrt(half_inv**2 + 1)
    if kind in (SequenceKind.A_PLUS, SequenceKind.LAMBDA_PLUS):
        return -half_inv + root, -half_inv - root
    return half_inv + root, half_inv - root


def coefficient_sequence(kind: SequenceKind | str, count: int, wells: WellFrequencies,
                         pre: InstantonPrefactors, ctx: PrecisionContext | None = None) -> CoefficientSequence:
    """Seed a coefficient sequence from its series and extend it by recursion.

    aPlus:       a_{i+1} = a_{i-1} - a_i / u
    aMinus:      a_{i+1} = a_{i-1} + a_i / u
    lambdaPlus:  L_{i+1} = L_{i-1} - L_i / u
    lambdaMinus: L_i     = u (a^-_{i-1} - L_{i-1})

    The forward recursion amplifies rounding by |r_-/r_+| per step, so it is
    run with enough guard digits for ``count`` steps and rounded back.
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    kind = SequenceKind(kind)
    ctx = resolve(ctx)
    mp = ctx.mp
    u = mp.mpf(pre.coupling_b) / mp.mpf(wells.delta)
    _check_domain(u, mp)

    r_plus, r_minus = _characteristic_roots(SequenceKind.A_PLUS, u, mp)
    growth = float(mp.log10(abs(r_minus / r_plus)))
    guard = ctx.with_digits(ctx.digits + int(math.ceil(count * growth)) + 10)
    hp = guard.mp
    uh = hp.mpf(u)

    def extend(seed0, seed1, sign, n):
        seq = [seed0, seed1]
        while len(seq) < n:
            seq.append(seq[-2] + sign * seq[-1] / uh)
        return seq

    if kind is SequenceKind.LAMBDA_MINUS:
        a_minus = extend(series_seed(SequenceKind.A_MINUS, 0, uh, guard),
                         series_seed(SequenceKind.A_MINUS, 1, uh, guard), 1, count)
        seq = [series_seed(kind, 1, uh, guard)]
        for i in range(2, count + 1):
            seq.append(uh * (a_minus[i - 1] - seq[-1]))
        first = 1
    else:
        sign = 1 if kind is SequenceKind.A_MINUS else -1
        seq = extend(series_seed(kind, 0, uh, guard), series_seed(kind, 1, uh, guard), sign, count)
        first = 0
    return CoefficientSequence(kind, tuple(mp.mpf(v) for v in seq), u, first)


@dataclass(frozen=True)
class ExponentialFitResult:
    """values[k] = coeff_plus * exponent_plus**k + coeff_minus * exponent_minus**k."""

    coeff_plus: mpmath.mpf
    coeff_minus: mpmath.mpf
    exponent_plus: mpmath.mpf
    exponent_minus: mpmath.mpf


def fit_exponentials(seq: CoefficientSequence, wells: WellFrequencies, pre: InstantonPrefactors,
                     ctx: PrecisionContext | None = None) -> ExponentialFitResult:
    """Solve the 2x2 system fixing the two geometric modes from the first two values.

    aPlus and lambdaPlus use the roots -delta/2B +- sqrt((delta/2B)^2 + 1);
    aMinus uses the roots of its own recursion, +delta/2B +- sqrt(...).
    lambdaMinus is driven by aMinus, so its modes are aMinus's small root
    (``exponent_plus``) and the homogeneous solution -B/delta (``exponent_minus``).
    """
    if len(seq.values) < 2:
        raise ValueError("need at least two values to fit")
    ctx = resolve(ctx)
    mp = ctx.mp
    u = mp.mpf(pre.coupling_b) / mp.mpf(wells.delta)
    kind = SequenceKind(seq.kind)
    if kind is SequenceKind.LAMBDA_MINUS:
        r_plus = _characteristic_roots(SequenceKind.A_MINUS, u, mp)[1]
        r_minus = -u
    else:
        r_plus, r_minus = _characteristic_roots(kind, u, mp)
    if r_plus == r_minus:
        raise SingularSystemError("coincident exponents; the 2x2 fit is singular")
    v0, v1 = mp.mpf(seq.values[0]), mp.mpf(seq.values[1])
    c_minus = (v1 - r_plus * v0) / (r_minus - r_plus)
    c_plus = v0 - c_minus
    return ExponentialFitResult(c_plus, c_minus, r_plus, r_minus)


# ---------------------------------------------------------------------------
# Amplitudes
# ---------------------------------------------------------------------------


class Transition(str, enum.Enum):
    ZERO_TO_ONE = "zeroToOne"
    ONE_TO_ONE = "oneToOne"


class AmplitudeMode(str, enum.Enum):
    CLOSED_FORM = "closedForm"
    TRUNCATED_SUM = "truncatedSum"


@dataclass(frozen=True)
class AmplitudeDecomposition:
    """An amplitude <f|e^{-HT}|i> at one Euclidean time.

    In closed-form mode ``value = sum(weights[k] * exp(-energies[k] * T))``.
    A truncated sum has no spectral decomposition, so ``energies`` and
    ``weights`` are None there and ``tail_estimate`` bounds the dropped terms.
    """

    transition: Transition
    mode: AmplitudeMode
    time_span: mpmath.mpf
    value: mpmath.mpf
    energies: tuple | None
    weights: tuple | None
    prefactor: mpmath.mpf
    terms_used: int = 0
    tail_estimate: mpmath.mpf | None = None


def _mixing(u, mp):
    """1 / sqrt(1 + (2B/delta)^2), the one radicand every closed form is written in."""
    return 1 / mp.sqrt(1 + 4 * u * u)


def spectral_weights(wells: WellFrequencies, pre: InstantonPrefactors,
                     ctx: PrecisionContext | None = None) -> tuple:
    """|<1|E_k>|^2 for k = 0, 1, 2 as fractions of <1|1> (they sum to one)."""
    mp = resolve(ctx).mp
    s = _mixing(mp.mpf(pre.coupling_b) / mp.mpf(wells.delta), mp)
    half = mp.mpf(1) / 2
    return (half * (half - s / 2), half, half * (half + s / 2))


def _decompose(transition, T, energies, weights, prefactor, mp):
    value = mp.fsum(w * mp.exp(-e * T) for e, w in zip(energies, weights))
    return AmplitudeDecomposition(transition, AmplitudeMode.CLOSED_FORM, T, value,
                                  tuple(energies), tuple(weights), prefactor)


def amplitude_0_to_1(T, wells: WellFrequencies, pre: InstantonPrefactors,
                     mode: str | AmplitudeMode = AmplitudeMode.CLOSED_FORM,
                     ctx: PrecisionContext | None = None, *, max_i: int = DEFAULT_MAX_I,
                     upper_level: int = 2) -> AmplitudeDecomposition:
    """<1|e^{-HT}|0>, summed over strings of i+1 instantons and i anti-instantons.

    ``upper_level=1`` swaps E2 for E1 in the closed form; it exists only so the
    two candidate exponent pairs can be compared against the truncated sum.
    """
    ctx = resolve(ctx)
    mp = ctx.mp
    T = mp.mpf(T)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    mode = AmplitudeMode(mode)
    prefactor = mp.mpf(pre.normalization) / mp.sqrt(2)
    if mode is AmplitudeMode.TRUNCATED_SUM:
        terms = [odd_term(i, T, wells, pre, ctx) for i in range(max_i + 1)]
        return AmplitudeDecomposition(Transition.ZERO_TO_ONE, mode, T, mp.fsum(terms), None, None,
                                      prefactor, len(terms), abs(terms[-1]))
    b = mp.mpf(pre.coupling_b)
    u = b / mp.mpf(wells.delta)
    c = u * _mixing(u, mp)
    energies = instanton_levels(wells, b, ctx)
    if upper_level == 2:
        weights = (prefactor * c, mp.zero, -prefactor * c)
    elif upper_level == 1:
        weights = (prefactor * c, -prefactor * c, mp.zero)
    else:
        raise ValueError("upper_level must be 1 or 2")
    return _decompose(Transition.ZERO_TO_ONE, T, energies, weights, prefactor, mp)


def amplitude_1_to_1(T, wells: WellFrequencies, pre: InstantonPrefactors,
                     mode: str | AmplitudeMode = AmplitudeMode.CLOSED_FORM,
                     ctx: PrecisionContext | None = None, *,
                     max_i: int = DEFAULT_MAX_I) -> AmplitudeDecomposition:
    """<1|e^{-HT}|1>: the constant path x(t) = 1 plus strings of i instanton pairs."""
    ctx = resolve(ctx)
    mp = ctx.mp
    T = mp.mpf(T)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    mode = AmplitudeMode(mode)
    norm = mp.mpf(pre.normalization)
    if mode is AmplitudeMode.TRUNCATED_SUM:
        trivial = norm * mp.exp(-mp.mpf(wells.omega1) * T / 2)
        terms = [even_term(i, T, wells, pre, ctx) for i in range(1, max_i + 1)]
        return AmplitudeDecomposition(Transition.ONE_TO_ONE, mode, T, trivial + mp.fsum(terms), None,
                                      None, norm, len(terms) + 1, abs(terms[-1]))
    b = mp.mpf(pre.coupling_b)
    energies = instanton_levels(wells, b, ctx)
    weights = tuple(norm * w for w in spectral_weights(wells, pre, ctx))
    return _decompose(Transition.ONE_TO_ONE, T, energies, weights, norm, mp)
