"""Seeded random symbols for randomized identity checks."""
from __future__ import annotations

import random
from fractions import Fraction

from .scalars import FormalSeries, GaussianRational, TauScalar
from .symbols import Symbol


def _coeff(rng: random.Random, complex_coeffs: bool, tau: bool) -> TauScalar:
    re = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    im = Fraction(rng.randint(-2, 2), rng.randint(1, 2)) if complex_coeffs else Fraction(0)
    if re == 0 and im == 0:
        re = Fraction(1)
    deg = 1 if tau and rng.random() < 0.2 else 0
    return TauScalar({deg: GaussianRational(re, im)})


def random_symbol(rng: random.Random, dim: int, terms: int = 3, max_freq: int = 1, max_pdeg: int = 2,
                  max_qdeg: int = 0, complex_coeffs: bool = True, tau: bool = True) -> Symbol:
    out = Symbol.zero(dim)
    for _ in range(terms):
        k = tuple(rng.randint(-max_freq, max_freq) for _ in range(dim))
        beta = tuple(rng.randint(0, max_qdeg) for _ in range(dim))
        alpha = [0] * dim
        for _ in range(rng.randint(0, max_pdeg)):
            alpha[rng.randrange(dim)] += 1
        out = out + Symbol.mono(dim, k, beta, tuple(alpha), _coeff(rng, complex_coeffs, tau))
    return out


def random_wave(rng: random.Random, dim: int, terms: int = 2, max_freq: int = 1, **kw) -> Symbol:
    return random_symbol(rng, dim, terms, max_freq, max_pdeg=0, **kw)


def random_series(rng: random.Random, dim: int, order: int, lambda_terms: int = 2, **kw) -> FormalSeries:
    """Series whose first ``lambda_terms`` coefficients are random symbols."""
    coeffs = []
    for r in range(order + 1):
        if r < lambda_terms:
            coeffs.append(random_symbol(rng, dim, **kw))
        else:
            coeffs.append(Symbol.zero(dim))
    return FormalSeries(coeffs, order)


def random_wave_series(rng: random.Random, dim: int, order: int, lambda_terms: int = 2, **kw) -> FormalSeries:
    return random_series(rng, dim, order, lambda_terms, max_pdeg=0, **kw)


def real_symbol(rng: random.Random, dim: int, **kw) -> Symbol:
    """A real-valued symbol: s + conj(s)."""
    s = random_symbol(rng, dim, **kw)
    return s + s.conj()
