import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from oscillab import (
    AlphaMode,
    AlphaSpec,
    DeltaFunction,
    MainTermExpr,
    PrefixTable,
    Side,
    delta_at,
    max_scaled,
    measure_above,
    moment_integral,
    omega_report,
    sign_changes,
    smoothed_power_integral,
)
from oscillab.delta import CSV_COLUMNS
from oscillab.errors import ArgumentError, DegeneratePredictionError, RangeError

from oracles import (
    dense_measure,
    dense_moment,
    dense_sign_changes,
    divisor_main_term,
    hyperbola_divisor_sum,
)


def test_sawtooth_values(sawtooth):
    assert delta_at(sawtooth, 10.5) == pytest.approx(-0.5, abs=1e-12)
    assert delta_at(sawtooth, 10.0) == pytest.approx(-0.5, abs=1e-12)
    assert sawtooth.left_limit(11) == pytest.approx(-1.0, abs=1e-12)
    assert sawtooth.right_limit(11) == pytest.approx(0.0, abs=1e-12)


def test_divisor_value_at_100(divisor_delta):
    expected = hyperbola_divisor_sum(100) - 0.5 * 9 - divisor_main_term(100.0)
    assert delta_at(divisor_delta, 100.0) == pytest.approx(expected, abs=1e-10)
    assert delta_at(divisor_delta, 100.0) == pytest.approx(1.540, abs=1e-3)


def test_range_errors(sawtooth):
    with pytest.raises(RangeError):
        delta_at(sawtooth, 0.5)
    with pytest.raises(RangeError):
        moment_integral(sawtooth, 30_000, 2)
    with pytest.raises(RangeError):
        sign_changes(sawtooth, 0.5, 3)


@pytest.mark.parametrize("T", [1000, 10_000])
def test_sawtooth_moments(sawtooth, T):
    assert moment_integral(sawtooth, T, 2) == pytest.approx(T / 3, rel=1e-10)
    assert moment_integral(sawtooth, T, 4) == pytest.approx(T / 5, rel=1e-10)


def test_zero_delta_everything_vanishes(zero_delta):
    assert moment_integral(zero_delta, 100, 2) == 0
    assert sign_changes(zero_delta, 10, 20) == []
    r = omega_report(zero_delta, 100, 0.1, 0.25)
    assert r.measure_plus == r.measure_minus == r.measure_abs == 0
    assert r.moment2 == r.moment4 == 0 and r.sign_changes == ()


def test_moment_additivity(divisor_delta):
    T = 3000.25
    whole = moment_integral(divisor_delta, T, 2)
    a = moment_integral(divisor_delta, T, 2, T2=1.5 * T)
    b = moment_integral(divisor_delta, 1.5 * T, 2, T2=2 * T)
    assert whole == pytest.approx(a + b, rel=1e-10)


def test_weighted_and_smoothed_moments(sawtooth):
    T = 200
    weighted = moment_integral(sawtooth, T, weight_alpha=0.25)
    ref = math.fsum(
        quad(lambda x, n=n: (n - x) ** 2 * x**-1.5, n, n + 1, epsabs=0, epsrel=1e-13)[0]
        for n in range(T, 2 * T)
    )
    assert weighted == pytest.approx(ref, rel=1e-10)
    y = 1000.0
    smooth = moment_integral(sawtooth, T, weight_alpha=0.0, smoothing_y=y)
    # -{x} has mean square 1/3 per unit; the weight x^-1 e^(-2x/y) is smooth
    approx = mpmath.quad(lambda u: u**-1 * mpmath.e ** (-2 * u / y) / 3, [T, 0.5 * y * math.log(1e16) + T])
    assert smooth == pytest.approx(float(approx), rel=2e-3)


def test_sign_changes_sawtooth(sawtooth):
    xs = sign_changes(sawtooth, 10, 20)
    assert xs == [float(n) for n in range(10, 20)]


def test_sign_changes_divisor_window(divisor_delta):
    xs = sign_changes(divisor_delta, 100, 200)
    assert xs and np.all(np.diff(xs) > 0)
    assert 100 <= xs[0] and xs[-1] <= 200


def test_measure_trivial_thresholds(divisor_delta):
    assert measure_above(divisor_delta, 1000, 1e9, AlphaSpec(), Side.ABS) == 0
    assert measure_above(divisor_delta, 1000, 0.0, AlphaSpec(), Side.ABS) == pytest.approx(1000, abs=1e-6)


def test_measure_divisor_against_dense_grid(divisor_delta):
    got = measure_above(divisor_delta, 1000, 0.5, AlphaSpec(alpha0=0.25), Side.ABS)
    ref = dense_measure(divisor_delta, 1000, 2000, 0.5, 0.25, "abs")
    assert abs(got - ref) <= 2e-3 * 1000


def test_measure_monotone_in_lambda(divisor_delta):
    lams = np.linspace(0, 3, 20)
    vals = [measure_above(divisor_delta, 2000, lam, AlphaSpec(), Side.PLUS) for lam in lams]
    assert np.all(np.diff(vals) <= 1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_random_windows_match_dense_oracles(divisor_delta, seed):
    rng = np.random.default_rng(seed)
    T = float(rng.uniform(50, 2000))
    lam, alpha = float(rng.uniform(0, 1)), float(rng.uniform(0.1, 0.35))
    spec = AlphaSpec(alpha0=alpha)
    for side in Side:
        got = measure_above(divisor_delta, T, lam, spec, side)
        ref = dense_measure(divisor_delta, T, 2 * T, lam, alpha, side.value)
        assert abs(got - ref) <= 2e-3 * T
    m2 = moment_integral(divisor_delta, T, 2)
    assert m2 == pytest.approx(dense_moment(divisor_delta, T, 2 * T, 2), rel=1e-4)
    found = np.array(sign_changes(divisor_delta, T, 2 * T))
    dense = dense_sign_changes(divisor_delta, T, 2 * T)
    for x in dense:
        assert np.min(np.abs(found - x)) <= 1e-3
    # the grid only misses pairs of crossings closer than one cell
    unmatched = [x for x in found if np.min(np.abs(dense - x)) > 1e-3]
    for x in unmatched:
        gaps = np.abs(found - x)
        assert np.sort(gaps)[1] <= 2e-3


def test_one_sided_sets_partition_the_absolute_set(divisor_delta):
    r = omega_report(divisor_delta, 10_000, 0.1, AlphaSpec(alpha0=0.25))
    assert r.measure_plus > 0 and r.measure_minus > 0
    assert r.measure_abs == pytest.approx(r.measure_plus + r.measure_minus, abs=1e-6 * r.T)
    for m in (r.measure_plus, r.measure_minus, r.measure_abs):
        assert 0 <= m <= r.T
    xs = np.array(r.sign_changes)
    assert np.all(np.diff(xs) > 0) and xs[0] >= r.T and xs[-1] <= 2 * r.T


def test_max_scaled_against_dense_grid(divisor_delta):
    val, loc = max_scaled(divisor_delta, 5000, 0.25)
    x = np.linspace(5000, 10000, 5_000_001)[1:-1]
    n = np.arange(5001, 10000)
    ends = [divisor_delta.left_limit(k) for k in n] + [divisor_delta.right_limit(k) for k in n]
    ref = max(
        np.max(np.abs(divisor_delta(x)) * x**-0.25),
        np.max(np.abs(ends) * np.concatenate([n, n]) ** -0.25),
    )
    assert val == pytest.approx(ref, rel=1e-9)
    assert 5000 <= loc <= 10000


def test_report_csv_and_json(divisor_delta):
    r = omega_report(divisor_delta, 1000, 0.2, AlphaSpec(AlphaMode.PAPER_FORM, c=0.1))
    assert len(r.csv_row().split(",")) == len(CSV_COLUMNS)
    assert r.alpha == pytest.approx(3 / 8 - 0.1 / math.log(1000) ** 0.125)
    assert '"n_sign_changes"' in r.to_json()


def test_report_threshold_comparison(divisor_delta):
    r = omega_report(divisor_delta, 1000, 0.2, 0.25, threshold=lambda T: 5 * T**0.5)
    assert r.extras["threshold"] == pytest.approx(5 * 1000**0.5)
    assert r.extras["measure_abs"] == r.measure_abs


def test_alpha_spec_validation():
    with pytest.raises(ArgumentError):
        AlphaSpec(AlphaMode.PAPER_FORM, c=0)
    with pytest.raises(ArgumentError):
        AlphaSpec(AlphaMode.PAPER_FORM, c=5).at(100)
    with pytest.raises(ArgumentError):
        AlphaSpec(AlphaMode.PAPER_FORM, c=0.1).at(1.0)


def test_smoothed_power_zero_exponent():
    r = smoothed_power_integral(100.0, 1e4, 0.0)
    assert r.value.real == pytest.approx(1e4 * math.exp(-100 / 1e4), rel=1e-12)


@given(st.floats(1, 1e3), st.floats(1, 1e4), st.floats(0, 0.95), st.floats(-20, 20))
def test_smoothed_power_matches_incomplete_gamma(T, y, re, im):
    z = complex(re, im)
    got = smoothed_power_integral(T, y, z).value
    ref = complex(mpmath.power(y, 1 - z) * mpmath.gammainc(1 - z, T / y))
    scale = mpmath.quad(lambda u: mpmath.e ** (-u / y) * u ** (-re), [T, mpmath.inf])
    assert abs(got - ref) <= 1e-9 * float(scale)


@pytest.mark.parametrize("T", [100.0, 1000.0, 10_000.0])
def test_smoothed_power_leading_term(T):
    z = 0.5 + 1j * math.log(T) ** 2
    r = smoothed_power_integral(T, 1e6 * T, z)
    ratio = r.value / r.prediction
    assert abs(ratio - 1) < 1e-4
    assert r.prediction == pytest.approx(-(T ** (1 - z)) / (1 - z))


def test_smoothed_power_truncation_is_converged():
    from oscillab import delta as dm

    base = smoothed_power_integral(10.0, 50.0, 0.3).value
    old = dm.POWER_CUTOFF
    try:
        dm.POWER_CUTOFF = old**2
        wider = smoothed_power_integral(10.0, 50.0, 0.3).value
    finally:
        dm.POWER_CUTOFF = old
    assert abs(wider - base) < 1e-15 * abs(base)


def test_smoothed_power_degenerate_prediction():
    with pytest.raises(DegeneratePredictionError) as exc:
        smoothed_power_integral(1.0, 10.0, 1.0 + 0j, predict=True)
    assert exc.value is not None
