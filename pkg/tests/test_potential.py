from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triplewell.potential import (
    InstantonProfile,
    ProfileKind,
    TripleWellParams,
    classical_action,
    coupling_b,
    eval_potential,
    instanton_prefactors,
    instanton_profile,
    instanton_velocity,
    well_frequencies,
)
from triplewell.precision import PrecisionContext
from triplewell.verification import MIN_OBSERVED_ORDER, observed_orders, second_difference_errors

CTX = PrecisionContext(60)
MP = CTX.mp

omegas = st.sampled_from([1, 4, 30, 50, 110]) | st.floats(0.5, 150)
xs = st.fractions(-3, 3).map(lambda f: MP.mpf(f.numerator) / f.denominator)


def test_params_reject_nonpositive_omega():
    for bad in (0, -1.0):
        with pytest.raises(ValueError):
            TripleWellParams(bad)


def test_potential_values():
    p30 = TripleWellParams(30)
    assert eval_potential(p30, 0, 0, CTX) == 0
    for x in (1, -1):
        assert eval_potential(p30, x, 0, CTX) == 0
        assert eval_potential(p30, x, 2, CTX) == 3600
    assert eval_potential(TripleWellParams(50), 0.5, 0, CTX) == MP.mpf("175.78125")


def test_potential_bad_order():
    with pytest.raises(ValueError):
        eval_potential(TripleWellParams(1), 0, 3, CTX)


@settings(max_examples=40, deadline=None)
@given(omegas, xs)
def test_potential_even_and_derivatives_consistent(omega, x):
    p = TripleWellParams(omega)
    assert eval_potential(p, -x, 0, CTX) == eval_potential(p, x, 0, CTX)
    assert eval_potential(p, -x, 1, CTX) == -eval_potential(p, x, 1, CTX)
    v1 = MP.diff(lambda y: eval_potential(p, y, 0, CTX), x)
    v2 = MP.diff(lambda y: eval_potential(p, y, 1, CTX), x)
    scale = MP.mpf(omega) ** 2 * (1 + abs(x)) ** 6
    assert abs(v1 - eval_potential(p, x, 1, CTX)) <= scale * MP.mpf(10) ** -40
    assert abs(v2 - eval_potential(p, x, 2, CTX)) <= scale * MP.mpf(10) ** -40


@pytest.mark.parametrize("omega,expected", [(30, (30, 60, 15)), (1, (1, 2, 0.5)), (110, (110, 220, 55))])
def test_well_frequencies(omega, expected):
    w = well_frequencies(TripleWellParams(omega), CTX)
    assert (w.omega0, w.omega1, w.delta) == tuple(MP.mpf(v) for v in expected)


def test_frequencies_are_the_well_curvatures():
    p = TripleWellParams(7)
    w = well_frequencies(p, CTX)
    assert MP.sqrt(eval_potential(p, 0, 2, CTX)) == w.omega0
    assert MP.sqrt(eval_potential(p, 1, 2, CTX)) == w.omega1


@pytest.mark.parametrize("kind", list(ProfileKind))
def test_profile_at_center(kind):
    x = instanton_profile(TripleWellParams(30), InstantonProfile(kind), 0, CTX)
    sign = 1 if "Right" in kind.value else -1
    assert abs(x - sign / MP.sqrt(2)) < MP.mpf(10) ** -58


def test_profile_endpoints():
    p = TripleWellParams(30)
    right = InstantonProfile(ProfileKind.INSTANTON_RIGHT)
    assert abs(instanton_profile(p, right, -5, CTX)) < MP.mpf(10) ** -60
    ctx = PrecisionContext(400)
    far = instanton_profile(p, right, 10, ctx)
    # s = 2 omega t = 600, so x = 1 - e^{-600}/2 + O(e^{-1200})
    assert abs((1 - far) / (ctx.mp.exp(-600) / 2) - 1) < ctx.mp.mpf(10) ** -100


def test_profile_does_not_overflow():
    p = TripleWellParams(110)
    for kind in ProfileKind:
        x = instanton_profile(p, InstantonProfile(kind), -1e6, CTX)
        assert abs(x) <= 1


@settings(max_examples=30, deadline=None)
@given(omegas, st.floats(-3, 3))
def test_left_profiles_mirror_right(omega, t):
    p = TripleWellParams(omega)
    for a, b in ((ProfileKind.INSTANTON_RIGHT, ProfileKind.ANTI_INSTANTON_LEFT),
                 (ProfileKind.ANTI_INSTANTON_RIGHT, ProfileKind.INSTANTON_LEFT)):
        assert instanton_profile(p, InstantonProfile(a), t, CTX) == -instanton_profile(p, InstantonProfile(b), t, CTX)


@settings(max_examples=30, deadline=None)
@given(omegas, st.floats(-2, 2), st.sampled_from(list(ProfileKind)))
def test_zero_euclidean_energy(omega, t, kind):
    p = TripleWellParams(omega)
    prof = InstantonProfile(kind, 0.25)
    x = instanton_profile(p, prof, t, CTX)
    v = instanton_velocity(p, prof, t, CTX)
    assert abs(v * v / 2 - eval_potential(p, x, 0, CTX)) <= MP.mpf(omega) ** 2 * MP.mpf(10) ** -55


def test_velocity_matches_numerical_derivative():
    p = TripleWellParams(30)
    for kind in ProfileKind:
        prof = InstantonProfile(kind)
        for t in ("-0.03", "0.01", "0.05"):
            t = MP.mpf(t)
            num = MP.diff(lambda s: instanton_profile(p, prof, s, CTX), t)
            assert abs(num - instanton_velocity(p, prof, t, CTX)) < MP.mpf(10) ** -40


def test_monotone_direction():
    p = TripleWellParams(30)
    ts = [MP.mpf(k) / 50 for k in range(-10, 11)]
    for kind, rising in ((ProfileKind.INSTANTON_RIGHT, True), (ProfileKind.ANTI_INSTANTON_RIGHT, False),
                         (ProfileKind.INSTANTON_LEFT, True), (ProfileKind.ANTI_INSTANTON_LEFT, False)):
        vals = [instanton_profile(p, InstantonProfile(kind), t, CTX) for t in ts]
        pairs = list(zip(vals, vals[1:]))
        assert all((b > a) if rising else (b < a) for a, b in pairs)


@pytest.mark.parametrize("omega", [1, 30])
@pytest.mark.parametrize("kind", list(ProfileKind))
def test_equation_of_motion_second_order(omega, kind):
    p = TripleWellParams(omega)
    w = MP.mpf(omega)
    sample = [MP.mpf(s) / w for s in ("-1", "0.2", "1.5")]
    steps = [MP.mpf("1e-3") / w / 2**k for k in range(3)]
    errors = second_difference_errors(p, InstantonProfile(kind), CTX, steps, sample)
    assert min(observed_orders(errors)) >= MIN_OBSERVED_ORDER
    # and the residual itself is O(h^2) relative to the acceleration scale omega^2
    assert errors[-1] / w**2 < (steps[-1] * w) ** 2


def test_action_values():
    assert classical_action(TripleWellParams(30), "analytic", CTX) == MP.mpf("7.5")
    assert classical_action(TripleWellParams(4), "analytic", CTX) == 1
    q = classical_action(TripleWellParams(50), "quadrature", CTX)
    assert abs(q - MP.mpf("12.5")) < MP.mpf(10) ** -40


@pytest.mark.parametrize("omega", [1, 30, 50, 110])
def test_action_quadrature_matches_analytic(omega):
    p = TripleWellParams(omega)
    q = classical_action(p, "quadrature", CTX)
    assert abs(q / classical_action(p, "analytic", CTX) - 1) <= CTX.quad_tolerance


def test_action_unknown_method():
    with pytest.raises(ValueError):
        classical_action(TripleWellParams(1), "trapezoid", CTX)


def test_prefactors():
    pre = instanton_prefactors(TripleWellParams(30), CTX)
    assert pre.action == MP.mpf("7.5")
    assert pre.fluctuation_factor == MP.exp(MP.mpf("-7.5"))
    assert pre.normalization == MP.sqrt(MP.mpf(30) / (2 * MP.pi))
    assert abs(pre.matching_factor * MP.sqrt(2) * pre.fluctuation_factor - pre.coupling_b) < MP.mpf(10) ** -58
    b50 = coupling_b(50, CTX)
    assert abs(b50 / MP.mpf("3.4335e-3") - 1) < 1e-4
