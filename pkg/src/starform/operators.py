"""lambda-graded series of linear operators on symbols.

An ``OperatorSeries`` stores, for every lambda-order r, a finite linear
combination of *words* in generator maps.  A word ``(g1, g2, g3)`` acts as
``g1(g2(g3(f)))``.  Generators are small hashable callables, so operators act
lazily on the infinite-dimensional symbol space and compose by concatenating
words.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Iterable

from .scalars import ONE, FormalSeries, TauScalar
from .symbols import Symbol, partial_p, partial_q, sym_mul


class Generator:
    """Base class for the atomic maps that words are built from."""

    name = "?"

    def __call__(self, f: Symbol) -> Symbol:
        raise NotImplementedError

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class PartialQ(Generator):
    axis: int

    @property
    def name(self):
        return f"∂q{self.axis}"

    def __call__(self, f):
        return partial_q(f, self.axis)


@dataclass(frozen=True, repr=False)
class PartialP(Generator):
    axis: int

    @property
    def name(self):
        return f"∂p{self.axis}"

    def __call__(self, f):
        return partial_p(f, self.axis)


@dataclass(frozen=True, repr=False)
class Multiply(Generator):
    factor: Symbol

    @property
    def name(self):
        return f"mul[{self.factor}]"

    def __call__(self, f):
        return sym_mul(self.factor, f)


@dataclass(frozen=True, repr=False, eq=False)
class FunctionMap(Generator):
    """Wrap an arbitrary linear map; compared by identity."""

    fn: Callable[[Symbol], Symbol]
    label: str = "map"

    @property
    def name(self):
        return self.label

    def __call__(self, f):
        return self.fn(f)


def _clean(op: dict) -> dict:
    return {w: c for w, c in op.items() if c}


class OperatorSeries:
    """sum_r lambda^r T_r with each T_r a linear combination of words."""

    __slots__ = ("grades", "order")

    def __init__(self, grades: Iterable[dict], order: int):
        grades = [_clean(dict(g)) for g in grades][: order + 1]
        grades += [{}] * (order + 1 - len(grades))
        self.grades = tuple(grades)
        self.order = order

    @classmethod
    def identity(cls, order: int) -> "OperatorSeries":
        return cls([{(): ONE}], order)

    @classmethod
    def zero(cls, order: int) -> "OperatorSeries":
        return cls([], order)

    @classmethod
    def single(cls, gen: Generator, grade: int, order: int, coeff=ONE) -> "OperatorSeries":
        grades = [{} for _ in range(order + 1)]
        if grade <= order:
            grades[grade] = {(gen,): TauScalar.coerce(coeff)}
        return cls(grades, order)

    def __add__(self, other: "OperatorSeries") -> "OperatorSeries":
        n = min(self.order, other.order)
        out = []
        for r in range(n + 1):
            g = dict(self.grades[r])
            for w, c in other.grades[r].items():
                g[w] = g.get(w, TauScalar()) + c
            out.append(g)
        return OperatorSeries(out, n)

    def __neg__(self):
        return OperatorSeries([{w: -c for w, c in g.items()} for g in self.grades], self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "OperatorSeries":
        c = TauScalar.coerce(c)
        return OperatorSeries([{w: c * v for w, v in g.items()} for g in self.grades], self.order)

    def __rmul__(self, c):
        return self.scale(c)

    def shift(self, k: int = 1) -> "OperatorSeries":
        """Multiply by lambda^k."""
        return OperatorSeries([{}] * k + list(self.grades), self.order)

    def compose(self, other: "OperatorSeries") -> "OperatorSeries":
        """(self o other): apply ``other`` first."""
        n = min(self.order, other.order)
        out = [{} for _ in range(n + 1)]
        for a in range(n + 1):
            for w1, c1 in self.grades[a].items():
                for b in range(n + 1 - a):
                    for w2, c2 in other.grades[b].items():
                        w = w1 + w2
                        acc = out[a + b]
                        acc[w] = acc.get(w, TauScalar()) + c1 * c2
        return OperatorSeries(out, n)

    __matmul__ = compose

    def grade0_is_zero(self) -> bool:
        return not self.grades[0]

    def grade0_is_identity(self) -> bool:
        return self.grades[0] == {(): ONE}

    def apply_symbol(self, f: Symbol, grade: int) -> Symbol:
        return apply_words(self.grades[grade], f)

    def apply(self, f: FormalSeries) -> FormalSeries:
        """(T f)_r = sum_{a+b=r} T_a(f_b), truncated at the smaller order."""
        n = min(self.order, f.order)
        zero = f.coeffs[0].zero_like()
        out = [zero] * (n + 1)
        for b in range(n + 1):
            fb = f.coeffs[b]
            if fb.is_zero():
                continue
            cache = {(): fb}
            for a in range(n + 1 - b):
                if self.grades[a]:
                    out[a + b] = out[a + b] + apply_words(self.grades[a], fb, cache)
        return FormalSeries(out, n)

    def __call__(self, f: FormalSeries) -> FormalSeries:
        return self.apply(f)

    def __repr__(self):
        parts = []
        for r, g in enumerate(self.grades):
            for w, c in g.items():
                parts.append(f"λ^{r}·({c})·{'∘'.join(map(repr, w)) or 'id'}")
        return " + ".join(parts) or "0"


def apply_words(op: dict, f: Symbol, cache: dict | None = None) -> Symbol:
    """Apply a linear combination of words, sharing common word suffixes."""
    if cache is None:
        cache = {(): f}
    acc = f.zero_like()
    for word, c in op.items():
        acc = acc + _apply_word(word, cache).scale(c)
    return acc


def _apply_word(word: tuple, cache: dict) -> Symbol:
    hit = cache.get(word)
    if hit is not None:
        return hit
    inner = _apply_word(word[1:], cache)
    res = inner if inner.is_zero() else word[0](inner)
    cache[word] = res
    return res


def op_power(d: OperatorSeries, k: int) -> OperatorSeries:
    out = OperatorSeries.identity(d.order)
    for _ in range(k):
        out = out.compose(d)
    return out


def op_exp(d: OperatorSeries) -> OperatorSeries:
    """exp(D) for D with vanishing grade-0 part (so the sum stops at k = order)."""
    if not d.grade0_is_zero():
        raise ValueError("op_exp requires an operator series with zero grade-0 part")
    out = OperatorSeries.identity(d.order)
    term = OperatorSeries.identity(d.order)
    for k in range(1, d.order + 1):
        term = term.compose(d).scale(TauScalar({0: Fraction(1, k)}))
        out = out + term
    return out


def op_log(t: OperatorSeries) -> OperatorSeries:
    """log(T) for T = id + O(lambda)."""
    if not t.grade0_is_identity():
        raise ValueError("op_log requires grade-0 part equal to the identity")
    x = t - OperatorSeries.identity(t.order)
    out = OperatorSeries.zero(t.order)
    power = OperatorSeries.identity(t.order)
    for k in range(1, t.order + 1):
        power = power.compose(x)
        sign = 1 if k % 2 else -1
        out = out + power.scale(TauScalar({0: Fraction(sign, k)}))
    return out


def from_maps(maps: Iterable[tuple[int, Callable, str]], order: int) -> OperatorSeries:
    """Build an OperatorSeries from ``(grade, linear_map, label)`` triples."""
    grades = [{} for _ in range(order + 1)]
    for r, fn, label in maps:
        if r <= order:
            grades[r][(FunctionMap(fn, label),)] = ONE
    return OperatorSeries(grades, order)


def inverse_factorial(k: int) -> TauScalar:
    return TauScalar({0: Fraction(1, factorial(k))})
