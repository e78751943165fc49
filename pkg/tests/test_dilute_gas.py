from __future__ import annotations

import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triplewell.dilute_gas import (
    AmplitudeMode,
    IntegralMethod,
    SequenceKind,
    amplitude_0_to_1,
    amplitude_1_to_1,
    basic_integral,
    coefficient_sequence,
    common_factor,
    even_term,
    fit_exponentials,
    odd_term,
    ordered_time_integral,
    series_seed,
    spectral_weights,
)
from triplewell.errors import MethodNotAllowedError, SeriesConvergenceError
from triplewell.potential import TripleWellParams, instanton_prefactors, well_frequencies
from triplewell.precision import PrecisionContext

CTX = PrecisionContext(60)
MP = CTX.mp


def setup(omega):
    p = TripleWellParams(omega)
    return well_frequencies(p, CTX), instanton_prefactors(p, CTX)


def setup_with_ratio(u, omega=30):
    """Wells at ``omega`` with B overridden so that B / delta = u."""
    wells, pre = setup(omega)
    return wells, dataclasses.replace(pre, coupling_b=MP.mpf(u) * wells.delta)


def rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------------------
# Basic integral
# ---------------------------------------------------------------------------


def test_ordered_time_volume():
    # k ordered times in an interval of length L fill L^k / k!
    one = lambda t: MP.one  # noqa: E731
    for k in range(1, 5):
        vol = ordered_time_integral([one] * k, 0, 2, CTX)
        assert rel(vol, MP.mpf(2) ** k / MP.factorial(k)) < MP.mpf(10) ** -45


def test_ordered_time_two_factor_oracle():
    # int_{0<s<t<1} s * e^t = int_0^1 t^2/2 e^t dt = (e - 2) / 2
    got = ordered_time_integral([lambda s: s, lambda t: MP.exp(t)], 0, 1, CTX)
    assert rel(got, (MP.e - 2) / 2) < MP.mpf(10) ** -45


@pytest.mark.parametrize("T", ["0.1", "0.7", "2"])
def test_first_integral_closed_form(T):
    wells, pre = setup(30)
    T = MP.mpf(T)
    got = basic_integral(0, 0, T, wells, pre, IntegralMethod.CLOSED_FORM, CTX, include_common_factor=False)
    u = pre.coupling_b / wells.delta
    expected = u * (MP.exp(wells.delta * T / 2) - MP.exp(-wells.delta * T / 2))
    assert rel(got.value, expected) < MP.mpf(10) ** -50
    assert not got.includes_common_factor


def test_short_time_limit():
    wells, pre = setup(30)
    for method in IntegralMethod:
        v = basic_integral(0, 0, MP.mpf("1e-30"), wells, pre, method, CTX).value
        assert abs(v) <= 2 * pre.coupling_b * MP.mpf("1e-30")


def test_long_time_decay():
    wells, pre = setup(30)
    short = basic_integral(1, 1, 1, wells, pre, ctx=CTX).value
    long = basic_integral(1, 1, 200, wells, pre, ctx=CTX).value
    assert abs(long) < abs(short) * MP.mpf(10) ** -100


def test_method_triangle_small_case():
    wells, pre = setup(1)
    vals = [basic_integral(1, 1, MP.mpf("0.2"), wells, pre, m, CTX).value for m in IntegralMethod]
    assert max(rel(v, vals[0]) for v in vals) < MP.mpf(10) ** -30


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 12), st.integers(0, 12), st.floats(0.01, 3.0), st.sampled_from([1, 30, 70]))
def test_closed_form_matches_recursion(n, m, T, omega):
    wells, pre = setup(omega)
    a = basic_integral(n, m, T, wells, pre, IntegralMethod.CLOSED_FORM, CTX).value
    b = basic_integral(n, m, T, wells, pre, IntegralMethod.RECURSIVE, CTX).value
    # Both routes add terms of size ~ u^{n+m+1} e^{(delta + B) T} times the
    # common factor; for short T the result is far smaller, so digits cancel.
    u = pre.coupling_b / wells.delta
    T = MP.mpf(T)
    magnitude = u ** (n + m + 1) * MP.exp((wells.delta + pre.coupling_b) * T) * common_factor(T, wells, CTX)
    assert abs(a - b) <= MP.mpf(10) ** -(CTX.digits - 8) * magnitude


def test_common_factor_bookkeeping():
    wells, pre = setup(30)
    T = MP.mpf("0.4")
    with_cf = basic_integral(2, 1, T, wells, pre, ctx=CTX, include_common_factor=True).value
    without = basic_integral(2, 1, T, wells, pre, ctx=CTX, include_common_factor=False).value
    assert rel(with_cf, without * common_factor(T, wells, CTX)) < MP.mpf(10) ** -55


def test_oracle_is_limited():
    wells, pre = setup(1)
    with pytest.raises(MethodNotAllowedError):
        basic_integral(3, 2, 0.5, wells, pre, IntegralMethod.QUADRATURE, CTX)


@pytest.mark.parametrize("args", [(-1, 0, 0.5), (0, 0, 0), (0, 0, -1)])
def test_basic_integral_rejects_bad_input(args):
    wells, pre = setup(1)
    with pytest.raises(ValueError):
        basic_integral(*args, wells, pre, ctx=CTX)


# ---------------------------------------------------------------------------
# Multi-instanton terms
# ---------------------------------------------------------------------------


def test_one_instanton_term():
    wells, pre = setup(30)
    T = MP.mpf("0.3")
    u = pre.coupling_b / wells.delta
    i00 = u * (MP.exp(wells.delta * T / 2) - MP.exp(-wells.delta * T / 2))
    expected = pre.normalization / MP.sqrt(2) * pre.coupling_b * common_factor(T, wells, CTX) * i00 / pre.coupling_b
    assert rel(odd_term(0, T, wells, pre, CTX), expected) < MP.mpf(10) ** -50


def test_terms_vanish_at_short_time():
    wells, pre = setup(30)
    assert abs(odd_term(0, MP.mpf("1e-40"), wells, pre, CTX)) < MP.mpf(10) ** -38
    assert abs(even_term(1, MP.mpf("1e-40"), wells, pre, CTX)) < MP.mpf(10) ** -38


@pytest.mark.parametrize("method", list(IntegralMethod))
def test_odd_term_is_diagonal_integral(method):
    wells, pre = setup(1)
    T = MP.mpf("0.5")
    expected = pre.normalization / MP.sqrt(2) * basic_integral(2, 2, T, wells, pre, ctx=CTX).value
    assert rel(odd_term(2, T, wells, pre, CTX, method), expected) < MP.mpf(10) ** -30


@pytest.mark.parametrize("i,T", [(1, "0.4"), (2, "0.4")])
@pytest.mark.parametrize("method", list(IntegralMethod))
def test_even_term_is_offdiagonal_integral(i, T, method):
    wells, pre = setup(1)
    T = MP.mpf(T)
    expected = pre.normalization / 2 * basic_integral(i - 1, i, T, wells, pre, ctx=CTX).value
    assert rel(even_term(i, T, wells, pre, CTX, method), expected) < MP.mpf(10) ** -30


def test_even_term_three():
    wells, pre = setup(1)
    T = MP.mpf("0.4")
    expected = pre.normalization / 2 * basic_integral(2, 3, T, wells, pre, IntegralMethod.RECURSIVE, CTX).value
    assert rel(even_term(3, T, wells, pre, CTX), expected) < MP.mpf(10) ** -40


def test_term_index_validation():
    wells, pre = setup(1)
    with pytest.raises(ValueError):
        odd_term(-1, 0.5, wells, pre, CTX)
    with pytest.raises(ValueError):
        even_term(0, 0.5, wells, pre, CTX)


# ---------------------------------------------------------------------------
# Coefficient sequences
# ---------------------------------------------------------------------------

U = MP.mpf("0.1")
S = 1 / MP.sqrt(MP.mpf("1.04"))


def test_series_seeds():
    assert rel(series_seed(SequenceKind.A_PLUS, 0, U, CTX), U * S) < MP.mpf(10) ** -38
    assert MP.nstr(series_seed(SequenceKind.A_PLUS, 0, U, CTX), 10) == "0.09805806757"
    a1 = series_seed(SequenceKind.A_PLUS, 1, U, CTX)
    assert rel(a1, (1 - S) / 2) < MP.mpf(10) ** -38
    assert MP.nstr(a1, 10) == "0.009709662155"
    assert rel(series_seed(SequenceKind.LAMBDA_PLUS, 0, U, CTX), (1 - S) / 2) < MP.mpf(10) ** -38


def test_minus_seeds_mirror_plus():
    for j in range(4):
        plus = series_seed(SequenceKind.A_PLUS, j, U, CTX)
        minus = series_seed(SequenceKind.A_MINUS, j, U, CTX)
        assert rel(minus, (-1) ** (j + 1) * plus) < MP.mpf(10) ** -38


@pytest.mark.parametrize("u", ["0.5", "0.8", "4"])
def test_series_outside_convergence_domain(u):
    with pytest.raises(SeriesConvergenceError):
        series_seed(SequenceKind.A_PLUS, 0, MP.mpf(u), CTX)
    wells, pre = setup_with_ratio(u)
    with pytest.raises(SeriesConvergenceError):
        coefficient_sequence(SequenceKind.A_PLUS, 5, wells, pre, CTX)


@pytest.mark.parametrize("kind", list(SequenceKind))
def test_recursions_hold_identically(kind):
    wells, pre = setup_with_ratio(U)
    seq = coefficient_sequence(kind, 41, wells, pre, CTX)
    v = seq.values
    scale = MP.mpf(10) ** -(CTX.digits - 5)
    if kind is SequenceKind.LAMBDA_MINUS:
        am = coefficient_sequence(SequenceKind.A_MINUS, 41, wells, pre, CTX).values
        for k in range(1, 40):  # values[k] is Lambda^-_{k+1} = u (a^-_k - Lambda^-_k)
            assert abs(v[k] - U * (am[k] - v[k - 1])) <= scale * max(abs(v[k]), abs(U * am[k]))
        return
    sign = 1 if kind is SequenceKind.A_MINUS else -1
    for i in range(1, 40):
        lhs, rhs = v[i + 1], v[i - 1] + sign * v[i] / U
        assert abs(lhs - rhs) <= scale * max(abs(v[i - 1]), abs(v[i] / U))


@pytest.mark.parametrize("kind", list(SequenceKind))
def test_recursion_agrees_with_direct_series(kind):
    wells, pre = setup_with_ratio(U)
    seq = coefficient_sequence(kind, 25, wells, pre, CTX)
    for k in (5, 12, 24):
        index = seq.first_index + k
        direct = series_seed(kind, index, U, PrecisionContext(120))
        assert rel(seq.values[k], direct) < MP.mpf(10) ** -50


def test_coefficient_sequence_needs_two_values():
    wells, pre = setup_with_ratio(U)
    with pytest.raises(ValueError):
        coefficient_sequence(SequenceKind.A_PLUS, 1, wells, pre, CTX)


def test_exponential_fits():
    wells, pre = setup_with_ratio(U)
    tiny = MP.mpf(10) ** -40
    fit = fit_exponentials(coefficient_sequence(SequenceKind.A_PLUS, 10, wells, pre, CTX), wells, pre, CTX)
    assert rel(fit.coeff_plus, U * S) < MP.mpf(10) ** -40 and abs(fit.coeff_minus) < tiny
    fit = fit_exponentials(coefficient_sequence(SequenceKind.A_MINUS, 10, wells, pre, CTX), wells, pre, CTX)
    assert abs(fit.coeff_plus) < tiny and rel(fit.coeff_minus, -U * S) < MP.mpf(10) ** -40
    fit = fit_exponentials(coefficient_sequence(SequenceKind.LAMBDA_PLUS, 10, wells, pre, CTX), wells, pre, CTX)
    assert rel(fit.coeff_plus, (1 - S) / 2) < MP.mpf(10) ** -40 and abs(fit.coeff_minus) < tiny


@pytest.mark.parametrize("kind", list(SequenceKind))
def test_fit_reconstructs_sequence(kind):
    wells, pre = setup_with_ratio(U)
    seq = coefficient_sequence(kind, 30, wells, pre, CTX)
    fit = fit_exponentials(seq, wells, pre, CTX)
    for k, v in enumerate(seq.values):
        model = fit.coeff_plus * fit.exponent_plus**k + fit.coeff_minus * fit.exponent_minus**k
        # rounding in the fitted coefficients is amplified by the larger root
        growth = max(abs(fit.exponent_plus), abs(fit.exponent_minus), 1) ** k
        assert abs(model - v) <= MP.mpf(10) ** -(CTX.digits - 5) * growth * abs(seq.values[0])


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 2.0))
def test_exponential_sum_reconstruction(bt):
    wells, pre = setup_with_ratio(U)
    seq = coefficient_sequence(SequenceKind.A_PLUS, 40, wells, pre, CTX)
    fit = fit_exponentials(seq, wells, pre, CTX)
    bt = MP.mpf(bt)
    summed = MP.fsum(a * bt**i / MP.factorial(i) for i, a in enumerate(seq.values))
    assert abs(summed - fit.coeff_plus * MP.exp(fit.exponent_plus * bt)) <= MP.mpf(10) ** -20


# ---------------------------------------------------------------------------
# Amplitudes
# ---------------------------------------------------------------------------


def test_zero_to_one_truncated_vs_closed():
    wells, pre = setup(30)
    closed = amplitude_0_to_1(0.1, wells, pre, AmplitudeMode.CLOSED_FORM, CTX)
    summed = amplitude_0_to_1(0.1, wells, pre, AmplitudeMode.TRUNCATED_SUM, CTX, max_i=12)
    assert rel(summed.value, closed.value) <= 1e-12
    assert closed.weights[1] == 0
    assert summed.energies is None and summed.weights is None
    assert summed.terms_used == 13


def test_one_to_one_truncated_vs_closed():
    wells, pre = setup(30)
    closed = amplitude_1_to_1(0.1, wells, pre, AmplitudeMode.CLOSED_FORM, CTX)
    summed = amplitude_1_to_1(0.1, wells, pre, AmplitudeMode.TRUNCATED_SUM, CTX, max_i=12)
    assert rel(summed.value, closed.value) <= 1e-12


def test_closed_form_decomposition_is_consistent():
    wells, pre = setup(30)
    T = MP.mpf("0.7")
    amp = amplitude_1_to_1(T, wells, pre, AmplitudeMode.CLOSED_FORM, CTX)
    rebuilt = MP.fsum(w * MP.exp(-e * T) for e, w in zip(amp.energies, amp.weights))
    assert amp.value == rebuilt
    assert amp.energies[0] < amp.energies[1] < amp.energies[2]


@pytest.mark.parametrize("mode", list(AmplitudeMode))
def test_zero_to_one_vanishes_at_short_time(mode):
    wells, pre = setup(30)
    v = amplitude_0_to_1(MP.mpf("1e-40"), wells, pre, mode, CTX).value
    assert abs(v) < MP.mpf(10) ** -37


@pytest.mark.parametrize("omega", [1, 30, 50])
def test_one_to_one_weights_non_negative(omega):
    wells, pre = setup(omega)
    w = spectral_weights(wells, pre, CTX)
    assert all(x >= 0 for x in w)
    assert abs(MP.fsum(w) - 1) < MP.mpf(10) ** -58
    assert abs(w[0] + w[2] - MP.mpf(1) / 2) < MP.mpf(10) ** -58


def test_weights_at_ratio_one_tenth():
    wells, pre = setup_with_ratio(U)
    w = spectral_weights(wells, pre, CTX)
    # twice the normalised weights: 1/2 -+ 1/(2 sqrt(1.04)) on E0 / E2
    assert rel(2 * w[0], (1 - S) / 2) < MP.mpf(10) ** -55
    assert rel(2 * w[2], (1 + S) / 2) < MP.mpf(10) ** -55


def test_weights_decoupled_limit():
    wells, pre = setup_with_ratio("1e-30")
    w = spectral_weights(wells, pre, CTX)
    assert w[0] < MP.mpf(10) ** -58
    assert abs(w[1] - MP.mpf(1) / 2) < MP.mpf(10) ** -58 and abs(w[2] - MP.mpf(1) / 2) < MP.mpf(10) ** -58


def test_truncation_error_decreases():
    wells, pre = setup(30)
    T = MP.mpf("0.5")
    closed = amplitude_0_to_1(T, wells, pre, AmplitudeMode.CLOSED_FORM, CTX).value
    errors = [rel(amplitude_0_to_1(T, wells, pre, AmplitudeMode.TRUNCATED_SUM, CTX, max_i=k).value, closed)
              for k in range(2, 13)]  # beyond ~13 terms the sum hits working precision
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_amplitudes_reject_nonpositive_time():
    wells, pre = setup(30)
    for fn in (amplitude_0_to_1, amplitude_1_to_1):
        with pytest.raises(ValueError):
            fn(0, wells, pre, ctx=CTX)
