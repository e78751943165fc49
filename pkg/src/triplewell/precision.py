"""Configurable-precision arithmetic, adaptive quadrature and guarded series sums.

Every routine here works inside a dedicated :class:`mpmath.MPContext` chosen by
the digit count of a :class:`PrecisionContext`.  Contexts are cached per digit
count and never have their precision changed after creation, so concurrent
callers never see each other's settings.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from typing import Callable

import mpmath

from .errors import QuadratureError

DEFAULT_DIGITS = 60
MIN_DIGITS = 30
ENV_DIGITS = "TRIPLEWELL_DIGITS"


@functools.lru_cache(maxsize=None)
def mp_context(digits: int) -> mpmath.ctx_mp.MPContext:
    """Return a private mpmath context fixed at ``digits`` decimal digits."""
    ctx = mpmath.MPContext()
    ctx.dps = digits
    return ctx


def _default_digits() -> int:
    raw = os.environ.get(ENV_DIGITS)
    if raw is None or raw.strip() == "":
        return DEFAULT_DIGITS
    try:
        digits = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_DIGITS} must be a positive integer, got {raw!r}") from None
    if digits <= 0:
        raise ValueError(f"{ENV_DIGITS} must be a positive integer, got {raw!r}")
    return digits


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and the tolerances derived from it.

    Tolerances default to ``10**-(digits - 20)``, which is 1e-40 at the
    default 60 digits.  They are floats, so the default is clamped at 1e-300.
    """

    digits: int = DEFAULT_DIGITS
    quad_tolerance: float | None = None
    series_tolerance: float | None = None

    def __post_init__(self) -> None:
        if int(self.digits) != self.digits or self.digits < MIN_DIGITS:
            raise ValueError(f"digits must be an integer >= {MIN_DIGITS}, got {self.digits}")
        default_tol = 10.0 ** -min(self.digits - 20, 300)
        if self.quad_tolerance is None:
            object.__setattr__(self, "quad_tolerance", default_tol)
        if self.series_tolerance is None:
            object.__setattr__(self, "series_tolerance", default_tol)
        for name in ("quad_tolerance", "series_tolerance"):
            tol = getattr(self, name)
            if not 0 < tol < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {tol}")

    @classmethod
    def default(cls) -> "PrecisionContext":
        """Default context, honouring the ``TRIPLEWELL_DIGITS`` override."""
        digits = _default_digits()
        if digits < MIN_DIGITS:
            raise ValueError(f"{ENV_DIGITS}={digits} is below the minimum of {MIN_DIGITS}")
        return cls(digits=digits)

    @property
    def mp(self) -> mpmath.ctx_mp.MPContext:
        return mp_context(self.digits)

    def mpf(self, x) -> mpmath.mpf:
        return self.mp.mpf(x)

    def with_digits(self, digits: int) -> "PrecisionContext":
        """Same relative tolerance budget at a different precision."""
        return PrecisionContext(digits=digits)

    @property
    def epsilon(self) -> mpmath.mpf:
        return self.mp.mpf(10) ** (-self.digits)


def resolve(ctx: PrecisionContext | None) -> PrecisionContext:
    return PrecisionContext.default() if ctx is None else ctx


@dataclass(frozen=True)
class SeriesSum:
    value: mpmath.mpf
    terms_used: int
    converged: bool
    last_term_magnitude: mpmath.mpf = field(repr=False)


# ---------------------------------------------------------------------------
# Gauss-Legendre panels
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def gauss_legendre(order: int, digits: int) -> tuple[tuple, tuple]:
    """Nodes and weights on [-1, 1], found by Newton iteration on P_order."""
    mp = mp_context(digits + 10)
    nodes, weights = [], []
    tol = mp.mpf(10) ** (-(digits + 5))
    for k in range(1, order // 2 + 1):
        x = mp.cos(mp.pi * (k - mp.mpf(1) / 4) / (order + mp.mpf(1) / 2))
        for _ in range(100):
            p0, p1 = mp.one, x
            for j in range(2, order + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = order * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < tol:
                break
        w = 2 / ((1 - x * x) * dp * dp)
        nodes += [x, -x]
        weights += [w, w]
    if order % 2:
        p0, p1 = mp.one, mp.zero
        for j in range(2, order + 1):
            p0, p1 = p1, (-(j - 1) * p0) / j
        dp = order * p0
        nodes.append(mp.zero)
        weights.append(2 / (dp * dp))
    out = mp_context(digits)
    return tuple(out.mpf(x) for x in nodes), tuple(out.mpf(w) for w in weights)


def _panel(f, a, b, nodes, weights, mp):
    half = (b - a) / 2
    mid = (a + b) / 2
    return half * mp.fsum(w * f(mid + half * x) for x, w in zip(nodes, weights))


def integrate_adaptive(
    f: Callable,
    a,
    b,
    ctx: PrecisionContext | None = None,
    *,
    order: int | None = None,
    max_depth: int = 40,
) -> mpmath.mpf:
    """Integrate ``f`` over ``[a, b]`` by adaptive bisection of Gauss-Legendre panels.

    A panel is accepted when its one-panel estimate and the sum over its two
    halves agree within its share (by width) of ``quad_tolerance`` times the
    magnitude of the whole-interval estimate.

    Raises:
        QuadratureError: if a panel is still unresolved at ``max_depth``.
    """
    ctx = resolve(ctx)
    mp = ctx.mp
    a, b = mp.mpf(a), mp.mpf(b)
    if a > b:
        raise ValueError(f"integrate_adaptive needs a <= b, got [{a}, {b}]")
    if a == b:
        return mp.zero
    order = order or max(20, ctx.digits // 2)
    nodes, weights = gauss_legendre(order, ctx.digits)

    whole = _panel(f, a, b, nodes, weights, mp)
    tol = mp.mpf(ctx.quad_tolerance)
    scale = max(abs(whole), ctx.epsilon)
    width = b - a

    # Explicit stack keeps the traversal order (and therefore the result) fixed.
    total = mp.zero
    stack = [(a, b, whole, 0)]
    while stack:
        lo, hi, coarse, depth = stack.pop()
        mid = (lo + hi) / 2
        left = _panel(f, lo, mid, nodes, weights, mp)
        right = _panel(f, mid, hi, nodes, weights, mp)
        fine = left + right
        if abs(fine - coarse) <= tol * scale * (hi - lo) / width:
            total += fine
            continue
        if depth >= max_depth:
            raise QuadratureError(lo, hi, abs(fine - coarse))
        stack.append((mid, hi, right, depth + 1))
        stack.append((lo, mid, left, depth + 1))
    return total


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------


def sum_series(
    term: Callable[[int], object],
    ctx: PrecisionContext | None = None,
    max_terms: int = 1000,
    *,
    min_terms: int = 1,
) -> SeriesSum:
    """Sum ``term(0) + term(1) + ...`` until the terms drop below tolerance.

    A term is small when ``|term| <= series_tolerance * max(|partial sum|, eps)``.
    Once the terms have been seen to alternate in sign, two consecutive small
    terms are needed before stopping.  Non-convergence within ``max_terms`` is
    reported through ``converged=False``, never raised.
    """
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    ctx = resolve(ctx)
    mp = ctx.mp
    tol = mp.mpf(ctx.series_tolerance)
    floor = ctx.epsilon

    partial = mp.zero
    small_run = 0
    alternating = False
    prev_sign = 0
    last = mp.zero
    for i in range(max_terms):
        t = mp.mpf(term(i))
        partial += t
        last = abs(t)
        sign = (t > 0) - (t < 0)
        if sign and prev_sign and sign != prev_sign:
            alternating = True
        if sign:
            prev_sign = sign
        if last <= tol * max(abs(partial), floor):
            small_run += 1
        else:
            small_run = 0
        needed = 2 if alternating else 1
        if small_run >= needed and i + 1 >= min_terms:
            return SeriesSum(partial, i + 1, True, last)
    return SeriesSum(partial, max_terms, False, last)
