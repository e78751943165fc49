"""Singlet-plus-doublet energies predicted by the dilute instanton gas."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import mpmath

from .potential import TripleWellParams, WellFrequencies, coupling_b, well_frequencies
from .precision import PrecisionContext, resolve


class SpectrumMethod(str, enum.Enum):
    INSTANTON = "instanton"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class SpectrumTriplet:
    e0: mpmath.mpf
    e1: mpmath.mpf
    e2: mpmath.mpf
    method: SpectrumMethod

    def as_tuple(self) -> tuple:
        return (self.e0, self.e1, self.e2)


@dataclass(frozen=True)
class SplittingPair:
    delta10: mpmath.mpf
    delta21: mpmath.mpf


def instanton_levels(wells: WellFrequencies, b, ctx: PrecisionContext | None = None) -> tuple:
    """(E0, E1, E2) from the well frequencies and the one-instanton coupling ``b``.

    E0, E2 = (w0 + w1)/4 -+ sqrt(delta^2/4 + b^2);  E1 = w1/2.
    """
    mp = resolve(ctx).mp
    w0, w1, delta = mp.mpf(wells.omega0), mp.mpf(wells.omega1), mp.mpf(wells.delta)
    b = mp.mpf(b)
    center = (w0 + w1) / 4
    root = mp.sqrt(delta * delta / 4 + b * b)
    return center - root, w1 / 2, center + root


def instanton_spectrum(params: TripleWellParams, ctx: PrecisionContext | None = None,
                       *, coupling=None) -> SpectrumTriplet:
    """Lowest three levels of the triple well in the dilute-gas approximation.

    ``coupling`` overrides B (e.g. ``0`` for the decoupled-well limit).
    """
    ctx = resolve(ctx)
    b = coupling_b(params.omega, ctx) if coupling is None else coupling
    e0, e1, e2 = instanton_levels(well_frequencies(params, ctx), b, ctx)
    return SpectrumTriplet(e0, e1, e2, SpectrumMethod.INSTANTON)


def energy_differences(spec: SpectrumTriplet) -> SplittingPair:
    return SplittingPair(delta10=spec.e1 - spec.e0, delta21=spec.e2 - spec.e1)


def asymptotic_limits(params: TripleWellParams, ctx: PrecisionContext | None = None) -> tuple:
    """Large-omega limits (E0 -> omega/2, E1 = E2 -> omega) used as plot guides."""
    mp = resolve(ctx).mp
    w = mp.mpf(params.omega)
    return w / 2, w
