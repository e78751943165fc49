"""The symmetric triple-well potential, its instantons and semiclassical prefactors.

Units are hbar = 1 and mass = 1.  The potential

    V(x) = omega**2 / 2 * x**2 * (x**2 - 1)**2

has a central minimum at x = 0 with curvature omega and two side minima at
x = +-1 with curvature 2*omega.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import mpmath

from .precision import PrecisionContext, integrate_adaptive, resolve


@dataclass(frozen=True)
class TripleWellParams:
    omega: float

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class WellFrequencies:
    omega0: mpmath.mpf
    omega1: mpmath.mpf
    delta: mpmath.mpf


class ProfileKind(str, enum.Enum):
    INSTANTON_RIGHT = "instantonRight"
    INSTANTON_LEFT = "instantonLeft"
    ANTI_INSTANTON_RIGHT = "antiInstantonRight"
    ANTI_INSTANTON_LEFT = "antiInstantonLeft"


# (overall sign, sign of the exponent's time argument)
_PROFILE_SIGNS = {
    ProfileKind.INSTANTON_RIGHT: (1, 1),  # 0 -> +1
    ProfileKind.INSTANTON_LEFT: (-1, -1),  # -1 -> 0
    ProfileKind.ANTI_INSTANTON_RIGHT: (1, -1),  # +1 -> 0
    ProfileKind.ANTI_INSTANTON_LEFT: (-1, 1),  # 0 -> -1
}


@dataclass(frozen=True)
class InstantonProfile:
    kind: ProfileKind
    center: float = 0.0


@dataclass(frozen=True)
class InstantonPrefactors:
    """Semiclassical data for one tunnelling event.

    ``coupling_b`` is the only quantity that enters the energies;
    ``matching_factor`` is recovered from it as B / (sqrt(2) * A).
    """

    action: mpmath.mpf
    fluctuation_factor: mpmath.mpf
    matching_factor: mpmath.mpf
    coupling_b: mpmath.mpf
    normalization: mpmath.mpf


def eval_potential(params: TripleWellParams, x, derivative_order: int = 0,
                   ctx: PrecisionContext | None = None):
    """V, V' or V'' at ``x``."""
    mp = resolve(ctx).mp
    w2 = mp.mpf(params.omega) ** 2
    x = mp.mpf(x)
    x2 = x * x
    if derivative_order == 0:
        return w2 / 2 * x2 * (x2 - 1) ** 2
    if derivative_order == 1:
        # d/dx of (x^6 - 2x^4 + x^2) / 2
        return w2 * x * (3 * x2 * x2 - 4 * x2 + 1)
    if derivative_order == 2:
        return w2 * (15 * x2 * x2 - 12 * x2 + 1)
    raise ValueError(f"derivative_order must be 0, 1 or 2, got {derivative_order}")


def well_frequencies(params: TripleWellParams, ctx: PrecisionContext | None = None) -> WellFrequencies:
    mp = resolve(ctx).mp
    w = mp.mpf(params.omega)
    return WellFrequencies(omega0=w, omega1=2 * w, delta=w / 2)


def _scaled_time(params, profile, t, mp):
    sign, direction = _PROFILE_SIGNS[ProfileKind(profile.kind)]
    # The exact solution of x'' = V'(x) relaxes with rate omega at x = 0 and
    # 2*omega at x = +-1, hence the factor 2 in the exponent.
    s = 2 * mp.mpf(params.omega) * (mp.mpf(t) - mp.mpf(profile.center)) * direction
    return sign, direction, s


def instanton_profile(params: TripleWellParams, profile: InstantonProfile, t,
                      ctx: PrecisionContext | None = None):
    """Value of the tunnelling path at Euclidean time ``t``.

    ``(1 + e^{-s})^{-1/2}`` with ``s = 2 omega (t - t0)`` (sign-adjusted per
    kind).  For ``s < 0`` the algebraically equal ``e^{s/2} / sqrt(1 + e^s)``
    is used so the exponential never overflows.
    """
    mp = resolve(ctx).mp
    sign, _, s = _scaled_time(params, profile, t, mp)
    if s >= 0:
        value = 1 / mp.sqrt(1 + mp.exp(-s))
    else:
        value = mp.exp(s / 2) / mp.sqrt(1 + mp.exp(s))
    return sign * value


def instanton_velocity(params: TripleWellParams, profile: InstantonProfile, t,
                       ctx: PrecisionContext | None = None):
    """Analytic time derivative of :func:`instanton_profile`."""
    mp = resolve(ctx).mp
    x = instanton_profile(params, profile, t, ctx)
    _, direction, _ = _scaled_time(params, profile, t, mp)
    # dx/dt = omega * x * (1 - x^2) along every kind, up to the direction sign.
    return direction * mp.mpf(params.omega) * x * (1 - x * x)


def classical_action(params: TripleWellParams, method: str = "analytic",
                     ctx: PrecisionContext | None = None):
    """S0 = integral of sqrt(2 V) from the central well to a side well (= omega/4)."""
    ctx = resolve(ctx)
    mp = ctx.mp
    w = mp.mpf(params.omega)
    if method == "analytic":
        return w / 4
    if method == "quadrature":
        return integrate_adaptive(lambda x: mp.sqrt(2 * eval_potential(params, x, 0, ctx)), 0, 1, ctx)
    raise ValueError(f"unknown method {method!r}; expected 'analytic' or 'quadrature'")


def coupling_b(omega, ctx: PrecisionContext | None = None):
    """B = 8 / sqrt(3 pi) * omega^{3/2} * exp(-omega/4)."""
    mp = resolve(ctx).mp
    w = mp.mpf(omega)
    return 8 / mp.sqrt(3 * mp.pi) * w ** mp.mpf(1.5) * mp.exp(-w / 4)


def instanton_prefactors(params: TripleWellParams, ctx: PrecisionContext | None = None) -> InstantonPrefactors:
    ctx = resolve(ctx)
    mp = ctx.mp
    w = mp.mpf(params.omega)
    action = classical_action(params, "analytic", ctx)
    a = mp.exp(-action)
    b = coupling_b(w, ctx)
    return InstantonPrefactors(
        action=action,
        fluctuation_factor=a,
        matching_factor=b / (mp.sqrt(2) * a),
        coupling_b=b,
        normalization=mp.sqrt(w / (2 * mp.pi)),
    )
