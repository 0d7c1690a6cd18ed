"""Exact coefficient arithmetic.

Two layers live here:

* ``GaussianRational`` and ``TauScalar``: exact numbers in Q(i)[tau], where
  ``tau`` is a formal transcendental standing in for 2*pi*i.  Conjugation
  sends ``i -> -i`` and ``tau -> -tau``.
* ``FormalSeries``: lambda-power series truncated at a fixed order ``N``, with
  coefficients in any ring that supports ``+``, ``-`` and ``*``.

The identity ``exp(tau*z) = 1`` for integer ``z`` is *not* known to this
module.  It is applied only by the exponentiation code in ``explog`` and the
integrality checks in ``cech``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Iterable, Sequence

import mpmath


class ContextMismatch(ValueError):
    """Operands were built for different truncation contexts."""


class NotInvertible(ArithmeticError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class TruncationContext:
    """Truncation order ``order`` (N) and torus dimension ``dim`` (n)."""

    order: int
    dim: int = 1

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("truncation order must be >= 0")
        if self.dim < 1:
            raise ValueError("torus dimension must be >= 1")

    def check(self, other: "TruncationContext"):
        if other != self:
            raise ContextMismatch(f"{other} used inside {self}")


# ---------------------------------------------------------------------------
# Gaussian rationals


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", as_fraction(self.re))
        object.__setattr__(self, "im", as_fraction(self.im))

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            raise TypeError("floating complex numbers are not exact")
        return cls(as_fraction(x), Fraction(0))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self):
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self):
        n = self.norm2()
        if not n:
            raise NotInvertible("division by zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * GaussianRational.coerce(other).inverse()

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __str__(self):
        im = self.im
        sign = "-" if im < 0 else "+"
        return f"({self.re}{sign}{abs(im)}i)"

    __repr__ = __str__


I = GaussianRational(0, 1)


# ---------------------------------------------------------------------------
# Q(i)[tau]
#
# Internally a TauScalar is a dict (tau_degree, i_power) -> nonzero Fraction
# with i_power in {0, 1}.  The symbol kernel uses the same flat layout so
# scalar multiplication never allocates intermediate objects.


def _flat_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (d1, j1), c1 in a.items():
        for (d2, j2), c2 in b.items():
            j = j1 + j2
            c = c1 * c2
            if j == 2:
                j = 0
                c = -c
            key = (d1 + d2, j)
            v = out.get(key)
            out[key] = c if v is None else v + c
    return {k: v for k, v in out.items() if v}


def _flat_add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for k, v in b.items():
        w = out.get(k, 0) + (v if sign > 0 else -v)
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return out


class TauScalar:
    """An exact element of Q(i)[tau]."""

    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs=None):
        flat: dict = {}
        if coeffs:
            for deg, val in dict(coeffs).items():
                if deg < 0:
                    raise ValueError("tau degrees must be non-negative")
                g = GaussianRational.coerce(val)
                if g.re:
                    flat[(deg, 0)] = g.re
                if g.im:
                    flat[(deg, 1)] = g.im
        self._c = flat
        self._hash = None

    @classmethod
    def _from_flat(cls, flat: dict) -> "TauScalar":
        t = cls.__new__(cls)
        t._c = {k: v for k, v in flat.items() if v}
        t._hash = None
        return t

    @classmethod
    def coerce(cls, x) -> "TauScalar":
        if isinstance(x, TauScalar):
            return x
        return cls({0: GaussianRational.coerce(x)})

    @classmethod
    def tau(cls, power: int = 1, coeff=1) -> "TauScalar":
        return cls({power: coeff})

    @property
    def coeffs(self) -> dict[int, GaussianRational]:
        """Map tau-degree -> GaussianRational (no zero entries)."""
        out: dict[int, GaussianRational] = {}
        for (d, j), v in self._c.items():
            g = out.get(d, GaussianRational())
            out[d] = g + (GaussianRational(0, v) if j else GaussianRational(v, 0))
        return dict(sorted(out.items()))

    def coeff(self, deg: int) -> GaussianRational:
        return GaussianRational(self._c.get((deg, 0), 0), self._c.get((deg, 1), 0))

    @property
    def degree(self) -> int:
        return max((d for d, _ in self._c), default=-1)

    def is_zero(self) -> bool:
        return not self._c

    __bool__ = lambda self: bool(self._c)

    def is_constant(self) -> bool:
        return all(d == 0 for d, _ in self._c)

    def __add__(self, other):
        return TauScalar._from_flat(_flat_add(self._c, TauScalar.coerce(other)._c))

    __radd__ = __add__

    def __sub__(self, other):
        return TauScalar._from_flat(_flat_add(self._c, TauScalar.coerce(other)._c, -1))

    def __rsub__(self, other):
        return TauScalar.coerce(other) - self

    def __neg__(self):
        return TauScalar._from_flat({k: -v for k, v in self._c.items()})

    def __mul__(self, other):
        try:
            o = TauScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return TauScalar._from_flat(_flat_mul(self._c, o._c))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        for _ in range(k):
            out = out * self
        return out

    def conj(self) -> "TauScalar":
        # tau -> -tau contributes (-1)^d, i -> -i contributes (-1)^j
        return TauScalar._from_flat(
            {(d, j): (-v if (d + j) % 2 else v) for (d, j), v in self._c.items()})

    def inverse(self) -> "TauScalar":
        if not self._c or not self.is_constant():
            raise NotInvertible(f"{self} is not a unit of Q(i)[tau]")
        return TauScalar({0: self.coeff(0).inverse()})

    def __truediv__(self, other):
        return self * TauScalar.coerce(other).inverse()

    def __eq__(self, other):
        if isinstance(other, TauScalar):
            return self._c == other._c
        try:
            return self._c == TauScalar.coerce(other)._c
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._c.items()))
        return self._hash

    def __str__(self):
        if not self._c:
            return "0"
        return " + ".join(f"{g}τ^{d}" for d, g in self.coeffs.items())

    def __repr__(self):
        return f"TauScalar({self})"


ZERO = TauScalar()
ONE = TauScalar({0: 1})
TAU = TauScalar({1: 1})
IMAG = TauScalar({0: I})
TWO_PI = TauScalar({1: GaussianRational(0, -1)})  # 2*pi = tau / i


def scalar_ops(a: TauScalar, b: TauScalar) -> dict[str, Any]:
    """Bundle of the basic ring operations on a pair (used by the CLI self-test)."""
    return {"add": a + b, "mul": a * b, "neg": -a, "conj": a.conj(), "eq": a == b}


def evaluate_numeric(a: TauScalar, precision: int = 15) -> complex:
    """Substitute tau = 2*pi*i and evaluate with ``precision`` significant digits.

    Only used for order/positivity diagnostics; exact results never pass
    through here.
    """
    if precision < 1:
        raise ValueError("precision must be >= 1")
    a = TauScalar.coerce(a)
    with mpmath.workdps(precision + 5):
        tau = 2 * mpmath.pi * 1j
        total = mpmath.mpc(0)
        for (d, j), v in a._c.items():
            total += mpmath.mpf(v.numerator) / v.denominator * (1j if j else 1) * tau ** d
        return complex(total)


# ---------------------------------------------------------------------------
# lambda-truncated formal series


def _ring_zero(x):
    if hasattr(x, "zero_like"):
        return x.zero_like()
    return type(x)(0) if isinstance(x, (int, Fraction)) else x * 0


class FormalSeries:
    """sum_{r=0}^{order} lambda^r coeffs[r], truncated at ``order``.

    Coefficients beyond ``order`` are never stored.  Binary operations carry
    the smaller of the two orders.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Sequence, order: int | None = None, zero=None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("order must be >= 0")
        if not coeffs and zero is None:
            raise ValueError("cannot infer the coefficient ring of an empty series")
        if zero is None:
            zero = _ring_zero(coeffs[0])
        coeffs = coeffs[: order + 1]
        coeffs += [zero] * (order + 1 - len(coeffs))
        self.coeffs = tuple(coeffs)
        self.order = order

    @classmethod
    def constant(cls, x, order: int) -> "FormalSeries":
        return cls([x], order, zero=_ring_zero(x))

    @classmethod
    def monomial(cls, x, power: int, order: int) -> "FormalSeries":
        z = _ring_zero(x)
        return cls([z] * power + [x], order, zero=z)

    def zero_like(self) -> "FormalSeries":
        z = _ring_zero(self.coeffs[0])
        return FormalSeries([z], self.order, zero=z)

    def __getitem__(self, r: int):
        return self.coeffs[r]

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return self.order + 1

    def truncate(self, order: int) -> "FormalSeries":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return FormalSeries(self.coeffs[: order + 1], order)

    def map(self, fn: Callable) -> "FormalSeries":
        return FormalSeries([fn(c) for c in self.coeffs], self.order)

    def _align(self, other):
        if not isinstance(other, FormalSeries):
            other = FormalSeries.constant(other, self.order)
        n = min(self.order, other.order)
        return self.coeffs[: n + 1], other.coeffs[: n + 1], n

    def __add__(self, other):
        a, b, n = self._align(other)
        return FormalSeries([x + y for x, y in zip(a, b)], n)

    __radd__ = __add__

    def __neg__(self):
        return FormalSeries([-x for x in self.coeffs], self.order)

    def __sub__(self, other):
        a, b, n = self._align(other)
        return FormalSeries([x - y for x, y in zip(a, b)], n)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            return FormalSeries([c * other for c in self.coeffs], self.order)
        return series_mul(self, other)

    def __rmul__(self, other):
        return FormalSeries([other * c for c in self.coeffs], self.order)

    def shift(self, k: int = 1) -> "FormalSeries":
        """Multiply by lambda^k (dropping what falls past the order)."""
        z = _ring_zero(self.coeffs[0])
        return FormalSeries([z] * k + list(self.coeffs), self.order, zero=z)

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.coeffs)

    def lowest_order(self) -> int | None:
        for r, c in enumerate(self.coeffs):
            if not _is_zero(c):
                return r
        return None

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        return f"FormalSeries({list(self.coeffs)!r}, order={self.order})"

    def __str__(self):
        parts = [f"λ^{r}·[{c}]" for r, c in enumerate(self.coeffs) if not _is_zero(c)]
        return " + ".join(parts) if parts else "0"


def _is_zero(c) -> bool:
    if hasattr(c, "is_zero"):
        return c.is_zero()
    return c == 0


def series_mul(f: FormalSeries, g: FormalSeries, mul: Callable | None = None) -> FormalSeries:
    """Truncated Cauchy product.  ``mul`` overrides the coefficient product."""
    if not isinstance(f, FormalSeries) or not isinstance(g, FormalSeries):
        raise TypeError("series_mul expects two FormalSeries")
    n = min(f.order, g.order)
    mul = mul or (lambda x, y: x * y)
    out = []
    for r in range(n + 1):
        acc = None
        for s in range(r + 1):
            if _is_zero(f.coeffs[s]) or _is_zero(g.coeffs[r - s]):
                continue
            term = mul(f.coeffs[s], g.coeffs[r - s])
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else _ring_zero(f.coeffs[0]))
    return FormalSeries(out, n)


def _inverse(x):
    if isinstance(x, (int, Fraction)):
        if x == 0:
            raise NotInvertible("zero leading coefficient")
        return Fraction(1) / x
    if hasattr(x, "inverse"):
        return x.inverse()
    raise NotInvertible(f"no inverse available for {type(x).__name__}")


def series_invert(f: FormalSeries, mul: Callable | None = None) -> FormalSeries:
    """Two-sided inverse for a commutative coefficient product (recursion on r)."""
    mul = mul or (lambda x, y: x * y)
    inv0 = _inverse(f.coeffs[0])
    out = [inv0]
    for r in range(1, f.order + 1):
        acc = None
        for s in range(1, r + 1):
            if _is_zero(f.coeffs[s]):
                continue
            t = mul(f.coeffs[s], out[r - s])
            acc = t if acc is None else acc + t
        if acc is None:
            out.append(_ring_zero(inv0))
        else:
            out.append(-mul(inv0, acc))
    return FormalSeries(out, f.order)


def lam(order: int, coeff=None) -> FormalSeries:
    """The series ``lambda`` itself (times ``coeff``) at the given order."""
    c = ONE if coeff is None else coeff
    return FormalSeries.monomial(c, 1, order)


def series_of(values: Iterable, order: int, zero=None) -> FormalSeries:
    return FormalSeries(list(values), order, zero=zero)
