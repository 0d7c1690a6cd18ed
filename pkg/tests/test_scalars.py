from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import gaussians, tau_scalars
from starform.scalars import (IMAG, ONE, TAU, TWO_PI, FormalSeries, GaussianRational, NotInvertible,
                              TauScalar, evaluate_numeric, series_invert, series_mul)


def ts(*coeffs):
    return [TauScalar({0: c}) for c in coeffs]


def test_cauchy_product_truncates():
    a = FormalSeries(ts(1, 1), 2)
    b = FormalSeries(ts(1, -1), 2)
    assert series_mul(a, b) == FormalSeries(ts(1, 0, -1), 2)


def test_lambda_squared_vanishes_at_order_one():
    lam = FormalSeries(ts(0, 1), 1)
    assert series_mul(lam, lam).is_zero()


def test_unit_is_neutral():
    f = FormalSeries(ts(3, Fraction(1, 2), -7), 2)
    assert series_mul(FormalSeries.constant(ONE, 2), f) == f


def test_invert_geometric():
    assert series_invert(FormalSeries(ts(1, 1), 2)) == FormalSeries(ts(1, -1, 1), 2)
    assert series_invert(FormalSeries(ts(1), 2)) == FormalSeries(ts(1), 2)
    assert series_invert(FormalSeries(ts(2), 2)) == FormalSeries(ts(Fraction(1, 2)), 2)


def test_invert_rejects_zero_head():
    with pytest.raises(NotInvertible):
        series_invert(FormalSeries(ts(0, 1), 2))


def test_tau_is_not_invertible_as_unit_check():
    # tau is a formal transcendental: only nonzero tau-degree-0 constants are units
    with pytest.raises(NotInvertible):
        TAU.inverse()


def test_numeric_values():
    assert abs(evaluate_numeric(TAU, 15) - 6.283185307179586j) < 1e-12
    assert evaluate_numeric(ONE + TAU * TauScalar(), 15) == 1.0
    assert abs(evaluate_numeric(TAU * TAU, 15) - (-39.478418)) < 1e-6
    assert abs(evaluate_numeric(TWO_PI, 15) - 6.283185307179586) < 1e-12


def test_conj_flips_tau_and_i():
    assert TAU.conj() == -TAU
    assert IMAG.conj() == -IMAG
    assert TWO_PI.conj() == TWO_PI


@given(tau_scalars, tau_scalars, tau_scalars)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + b == b + a


@given(tau_scalars, tau_scalars)
def test_conj_is_involutive_homomorphism(a, b):
    assert a.conj().conj() == a
    assert (a * b).conj() == a.conj() * b.conj()
    assert (a + b).conj() == a.conj() + b.conj()


@given(gaussians.filter(bool), st.lists(tau_scalars, min_size=3, max_size=3))
def test_invert_roundtrip(head, tail):
    f = FormalSeries([TauScalar({0: head})] + tail, 3)
    one = FormalSeries.constant(ONE, 3)
    assert series_mul(f, series_invert(f)) == one
    assert series_mul(series_invert(f), f) == one


@given(tau_scalars)
def test_numeric_is_a_ring_map(a):
    lhs = evaluate_numeric(a * a, 30)
    rhs = evaluate_numeric(a, 30) ** 2
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


def test_gaussian_arithmetic():
    z = GaussianRational(Fraction(1, 2), 3)
    assert z * z.inverse() == GaussianRational(1, 0)
    assert z.conj() == GaussianRational(Fraction(1, 2), -3)
