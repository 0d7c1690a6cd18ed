from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from conftest import HALF, e, rng_of, seeds
from starform.cover import monopole_bundle
from starform.operators import OperatorSeries, op_exp, op_log
from starform.sampling import random_series, random_wave
from starform.scalars import IMAG, ONE, TAU, ContextMismatch, FormalSeries, TauScalar
from starform.starprod import (Laplacian, SymTensorField, commutator, delta_kappa, fiber_insert,
                               fiber_translation_op, laplacian, lift, make_spec, apply_N, poisson_bracket,
                               series_conj, star, star_inverse, star_kappa, star_kappa_composite,
                               star_magnetic, star_standard, sym_derivative, sym_derivative_power)
from starform.symbols import Symbol, sym_mul

KAPPAS = [Fraction(0), Fraction(1, 3), HALF, Fraction(1)]
q, p = Symbol.q(1), Symbol.p(1)
e1 = e(1, 1)


def lam(order, r, sym):
    coeffs = [sym.zero_like()] * (order + 1)
    coeffs[r] = sym
    return FormalSeries(coeffs, order)


def const(dim, c):
    return Symbol.const(dim, c)


# ---------------------------------------------------------------------------
# frozen example values, each re-derived by the sympy oracle below


def test_standard_product_of_momentum_and_mode():
    spec = make_spec(0, 2, 1)
    got = star_standard(lift(p, spec), lift(e1, spec))
    want = lift(p * e1, spec) + lam(2, 1, e1.scale(-IMAG * TAU))
    assert got == want
    ref = oracle.star_standard(oracle.to_sympy(p), oracle.to_sympy(e1), 1, 2)
    assert oracle.equal(oracle.series_to_sympy(got), ref)


def test_laplacian_examples():
    assert laplacian(e1).is_zero()
    assert laplacian(q * p) == const(1, 1)
    assert laplacian(p * e1) == e1.scale(TAU)


def test_N_kappa_examples():
    for k in KAPPAS:
        got = apply_N(lift(q * p, 2), k)
        assert got == lift(q * p, 2) + lam(2, 1, const(1, -IMAG * TauScalar({0: k})))
        assert apply_N(lift(e1 + q, 2), k) == lift(e1 + q, 2)
    f = lift(p * p * e1, 3)
    assert apply_N(f, 0) == f
    assert apply_N(apply_N(f, Fraction(1, 3)), Fraction(1, 3), inverse=True) == f


@pytest.mark.parametrize("kappa", KAPPAS)
def test_position_momentum_commutator(kappa):
    spec = make_spec(kappa, 3, 1)
    assert commutator(lift(q, spec), lift(p, spec), spec) == lam(3, 1, const(1, IMAG))


def test_vertical_lifts_multiply_pointwise():
    rng = rng_of(7)
    for k in KAPPAS:
        spec = make_spec(k, 3, 2)
        u, v = random_wave(rng, 2), random_wave(rng, 2)
        assert star(lift(u, spec), lift(v, spec), spec) == lift(sym_mul(u, v), spec)
    spec = make_spec(0, 3, 2)
    u, f = random_wave(rng, 2), random_series(rng, 2, 3)
    assert star(lift(u, spec), f, spec) == f.map(lambda s: sym_mul(u, s))


def test_symmetrized_derivative_of_x_dy():
    x, y = Symbol.q(2, 0), Symbol.q(2, 1)
    a = SymTensorField.one_form([Symbol.zero(2), x])
    d = sym_derivative(a)
    assert d.components == {(0, 1): const(2, Fraction(1, 2))}
    assert sym_derivative(SymTensorField.one_form([const(2, 1), Symbol.zero(2)])).is_zero()
    hess = sym_derivative_power(SymTensorField.function(x * y), 2)
    assert hess.components == {(0, 1): const(2, 1)}
    assert fiber_insert(a, Symbol.p(2, 1) ** 2) == (x * Symbol.p(2, 1)).scale(2)
    assert fiber_insert(SymTensorField.one_form([const(1, 1)]), p) == const(1, 1)
    assert fiber_insert(d, e(2, 1, 0)).is_zero()


def test_delta_on_momentum():
    a = q * q + e1
    A = SymTensorField.one_form([a])
    spec = make_spec(HALF, 3, 1)
    assert delta_kappa(A, lift(p, spec), spec) == lam(3, 1, a.scale(IMAG))
    assert delta_kappa(A, lift(e1, spec), spec).is_zero()
    s = fiber_translation_op(A, spec)
    assert s.apply(lift(p, spec)) == lift(p, spec) + lam(3, 1, -a)
    assert s.apply(lift(e1 + q, spec)) == lift(e1 + q, spec)
    zero = SymTensorField.one_form([Symbol.zero(1)])
    f = random_series(rng_of(1), 1, 3)
    assert fiber_translation_op(zero, spec).apply(f) == f


@pytest.mark.parametrize("kappa", KAPPAS)
def test_exact_one_form_gives_inner_derivation(kappa):
    rng = rng_of(11)
    spec = make_spec(kappa, 3, 2)
    u = random_wave(rng, 2) + Symbol.q(2, 0) * Symbol.q(2, 1)
    du = sym_derivative(SymTensorField.function(u))
    f = random_series(rng, 2, 3)
    assert delta_kappa(du, f, spec) == commutator(lift(u, spec), f, spec)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_closed_translation_is_automorphism(kappa):
    rng = rng_of(5)
    spec = make_spec(kappa, 3, 1)
    A = SymTensorField.one_form([e1.scale(2) + e(1, -1) + const(1, 3)])
    s = fiber_translation_op(A, spec)
    f, g = random_series(rng, 1, 3), random_series(rng, 1, 3)
    assert s.apply(star(f, g, spec)) == star(s.apply(f), s.apply(g), spec)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_vertical_lift_identities(kappa):
    rng = rng_of(3)
    spec = make_spec(kappa, 3, 2)
    u = random_wave(rng, 2) + Symbol.q(2, 0) ** 2
    f = random_series(rng, 2, 3, max_pdeg=3)
    k = TauScalar({0: kappa})

    def insert_exp(c):
        # sum_s (c lambda)^s / s! F(D^s u) f
        out = f.zero_like()
        t = SymTensorField.function(u)
        fact = 1
        for s in range(4):
            term = f.map(lambda h: fiber_insert(t, h)).map(lambda h: h.scale(c ** s * TauScalar({0: Fraction(1, fact)})))
            out = out + term.shift(s)
            t = sym_derivative(t)
            fact *= s + 1
        return out

    assert star(lift(u, spec), f, spec) == insert_exp(IMAG * k)
    assert star(f, lift(u, spec), spec) == insert_exp(-IMAG * (ONE - k))


def test_kappa_product_matches_oracle():
    for n, order, seed in [(1, 3, 0), (1, 3, 1), (2, 2, 2)]:
        rng = rng_of(seed)
        for k in (Fraction(0), Fraction(1, 3), HALF):
            spec = make_spec(k, order, n)
            f, g = random_series(rng, n, order, max_qdeg=1), random_series(rng, n, order)
            ref = oracle.star_kappa(oracle.series_to_sympy(f), oracle.series_to_sympy(g), k, n, order)
            assert oracle.equal(oracle.series_to_sympy(star_kappa(f, g, spec)), ref)


# ---------------------------------------------------------------------------
# invariants


@given(seeds, st.sampled_from(KAPPAS), st.sampled_from([1, 2]))
def test_closed_form_equals_composite_route(seed, kappa, n):
    rng = rng_of(seed)
    spec = make_spec(kappa, 3, n)
    f, g = random_series(rng, n, 3, max_qdeg=1), random_series(rng, n, 3, max_pdeg=3)
    assert star_kappa(f, g, spec) == star_kappa_composite(f, g, spec)


@settings(max_examples=10)
@given(seeds, st.sampled_from(KAPPAS), st.sampled_from([1, 2]))
def test_associativity(seed, kappa, n):
    rng = rng_of(seed)
    spec = make_spec(kappa, 3, n)
    f, g, h = (random_series(rng, n, 3, max_qdeg=1) for _ in range(3))
    assert star(star(f, g, spec), h, spec) == star(f, star(g, h, spec), spec)


@given(seeds, st.sampled_from(KAPPAS))
def test_unit_and_semiclassical_limit(seed, kappa):
    rng = rng_of(seed)
    spec = make_spec(kappa, 2, 2)
    f, g = random_series(rng, 2, 2), random_series(rng, 2, 2)
    one = lift(const(2, 1), spec)
    assert star(one, f, spec) == f == star(f, one, spec)
    fg, gf = star(f, g, spec), star(g, f, spec)
    assert fg.coeffs[0] == sym_mul(f.coeffs[0], g.coeffs[0])
    bracket = poisson_bracket(f.coeffs[0], g.coeffs[0]).scale(IMAG)
    assert fg.coeffs[1] - gf.coeffs[1] == bracket


@given(seeds)
def test_weyl_product_is_hermitian(seed):
    rng = rng_of(seed)
    spec = make_spec(HALF, 3, 2)
    f, g = random_series(rng, 2, 3), random_series(rng, 2, 3)
    assert series_conj(star(f, g, spec)) == star(series_conj(g), series_conj(f), spec)


def test_standard_product_is_not_hermitian():
    spec = make_spec(0, 2, 1)
    f, g = lift(q, spec), lift(p, spec)
    res = series_conj(star(f, g, spec)) - star(series_conj(g), series_conj(f), spec)
    assert res.lowest_order() == 1


@given(seeds)
def test_star_inverse(seed):
    rng = rng_of(seed)
    spec = make_spec(HALF, 3, 1)
    f = lift(e(1, 2).scale(3), spec) + random_series(rng, 1, 3).shift(1)
    inv = star_inverse(f, spec)
    one = lift(const(1, 1), spec)
    assert star(f, inv, spec) == one == star(inv, f, spec)


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        star(lift(q, 2), lift(p, 3), make_spec(0, 2, 1))


# ---------------------------------------------------------------------------
# operator series


def test_op_exp_log_roundtrip():
    lap = OperatorSeries.single(Laplacian(), 1, 3)
    assert op_log(op_exp(OperatorSeries.zero(3))).apply(lift(p, 3)).is_zero()
    back = op_log(op_exp(lap))
    for f in (q * p, p * p * e1, q * q * p ** 3, e(1, -2) * p ** 2):
        assert back.apply(lift(f, 3)) == lap.apply(lift(f, 3))
        assert op_exp(OperatorSeries.zero(3)).apply(lift(f, 3)) == lift(f, 3)


# ---------------------------------------------------------------------------
# magnetic product


@pytest.mark.parametrize("m", [-1, 1, 2])
@pytest.mark.parametrize("kappa", [Fraction(0), Fraction(1, 3), HALF])
def test_magnetic_commutators(m, kappa):
    b = monopole_bundle(m)
    spec = make_spec(kappa, 3, 2, magnetic=b)
    x, y = lift(Symbol.q(2, 0), spec), lift(Symbol.q(2, 1), spec)
    px, py = lift(Symbol.p(2, 0), spec), lift(Symbol.p(2, 1), spec)
    com = lambda f, g: star_magnetic(f, g, 0, spec) - star_magnetic(g, f, 0, spec)
    assert com(x, px) == lam(3, 1, const(2, IMAG))
    assert com(y, py) == lam(3, 1, const(2, IMAG))
    assert com(x, y).is_zero()
    assert com(px, py) == lam(3, 2, const(2, TauScalar.tau(1, m)))


def test_zero_field_magnetic_product_is_plain():
    rng = rng_of(4)
    spec = make_spec(HALF, 3, 2, magnetic=monopole_bundle(0))
    f, g = random_series(rng, 2, 3), random_series(rng, 2, 3)
    assert star_magnetic(f, g, 0, spec) == star_kappa(f, g, spec.plain())
    one = lift(const(2, 1), spec)
    assert star_magnetic(one, f, 0, spec) == f


@settings(max_examples=5)
@given(seeds)
def test_magnetic_associativity(seed):
    rng = rng_of(seed)
    spec = make_spec(HALF, 3, 2, magnetic=monopole_bundle(1))
    f, g, h = (random_series(rng, 2, 3) for _ in range(3))
    assert star(star(f, g, spec), h, spec) == star(f, star(g, h, spec), spec)
