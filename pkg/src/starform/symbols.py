"""Phase-space symbols on charts of T*T^n.

A symbol is a finite sum of terms ``c * q^beta * p^alpha * e_k`` where
``e_k = exp(tau k.q)`` is a Fourier mode of the unit-period torus and ``c``
lies in Q(i)[tau].  Chart symbols may carry q-polynomials; a symbol without
any is *global* (periodic in q).  Wave functions are symbols with no
p-dependence, and ``MatrixSymbol`` holds square matrices of symbols.

Terms are stored flat: the key is the integer tuple
``(k_1..k_n, beta_1..beta_n, alpha_1..alpha_n, tau_degree, i_power)`` and the
value a nonzero Fraction.  ``Symbol.terms`` regroups them by ``(k, beta,
alpha)`` for display and inspection.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from math import comb
from typing import Iterable, Mapping, Sequence

from .scalars import GaussianRational, NotInvertible, TauScalar, as_fraction


class NonGlobalSymbol(ValueError):
    """A q-polynomial term appeared where a periodic function is required."""


def _vec(v, n: int) -> tuple[int, ...]:
    if v is None:
        return (0,) * n
    if isinstance(v, int):
        v = (v,)
    v = tuple(int(x) for x in v)
    if len(v) != n:
        raise ValueError(f"expected a length-{n} integer vector, got {v}")
    return v


class Symbol:
    """Immutable exact symbol in ``dim`` torus variables."""

    __slots__ = ("dim", "_t", "_hash")

    def __init__(self, dim: int, terms: Mapping | None = None):
        self.dim = dim
        self._t: dict = {}
        self._hash = None
        if terms:
            for (k, beta, alpha), c in terms.items():
                k, beta, alpha = _vec(k, dim), _vec(beta, dim), _vec(alpha, dim)
                if any(x < 0 for x in beta + alpha):
                    raise ValueError("polynomial exponents must be non-negative")
                for (d, j), v in TauScalar.coerce(c)._c.items():
                    key = k + beta + alpha + (d, j)
                    w = self._t.get(key, 0) + v
                    if w:
                        self._t[key] = w
                    else:
                        self._t.pop(key, None)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def _raw(cls, dim: int, flat: dict) -> "Symbol":
        s = cls.__new__(cls)
        s.dim = dim
        s._t = flat
        s._hash = None
        return s

    @classmethod
    def const(cls, dim: int, c=1) -> "Symbol":
        return cls(dim, {(None, None, None): c})

    @classmethod
    def zero(cls, dim: int) -> "Symbol":
        return cls._raw(dim, {})

    @classmethod
    def mono(cls, dim: int, k=None, qpow=None, ppow=None, coeff=1) -> "Symbol":
        return cls(dim, {(_vec(k, dim), _vec(qpow, dim), _vec(ppow, dim)): coeff})

    @classmethod
    def fourier(cls, dim: int, k, coeff=1) -> "Symbol":
        """``coeff * e_k``."""
        return cls.mono(dim, k=k, coeff=coeff)

    @classmethod
    def q(cls, dim: int, i: int = 0) -> "Symbol":
        e = [0] * dim
        e[i] = 1
        return cls.mono(dim, qpow=e)

    @classmethod
    def p(cls, dim: int, i: int = 0) -> "Symbol":
        e = [0] * dim
        e[i] = 1
        return cls.mono(dim, ppow=e)

    def zero_like(self) -> "Symbol":
        return Symbol._raw(self.dim, {})

    # -- layout ---------------------------------------------------------------

    def _split(self, key):
        n = self.dim
        return key[:n], key[n:2 * n], key[2 * n:3 * n], key[3 * n], key[3 * n + 1]

    @property
    def terms(self) -> dict[tuple, TauScalar]:
        """``{(k, beta, alpha): TauScalar}`` in canonical (sorted) order."""
        grouped: dict = {}
        for key, v in self._t.items():
            k, b, a, d, j = self._split(key)
            grouped.setdefault((k, b, a), {})[(d, j)] = v
        return {key: TauScalar._from_flat(grouped[key]) for key in sorted(grouped)}

    def coefficient(self, k=None, qpow=None, ppow=None) -> TauScalar:
        n = self.dim
        head = _vec(k, n) + _vec(qpow, n) + _vec(ppow, n)
        return TauScalar._from_flat({key[3 * n:]: v for key, v in self._t.items()
                                     if key[:3 * n] == head})

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    @property
    def is_global(self) -> bool:
        n = self.dim
        return all(not any(key[n:2 * n]) for key in self._t)

    @property
    def is_wave_function(self) -> bool:
        n = self.dim
        return all(not any(key[2 * n:3 * n]) for key in self._t)

    def max_p_degree(self) -> int:
        n = self.dim
        return max((sum(key[2 * n:3 * n]) for key in self._t), default=0)

    def frequencies(self) -> set[tuple[int, ...]]:
        return {key[:self.dim] for key in self._t}

    # -- ring operations ------------------------------------------------------

    def _check(self, other: "Symbol"):
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def _coerce(self, other) -> "Symbol":
        if isinstance(other, Symbol):
            self._check(other)
            return other
        return Symbol.const(self.dim, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._t)
        for key, v in other._t.items():
            w = out.get(key, 0) + v
            if w:
                out[key] = w
            else:
                del out[key]
        return Symbol._raw(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return Symbol._raw(self.dim, {k: -v for k, v in self._t.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Symbol):
            self._check(other)
            return sym_mul(self, other)
        if isinstance(other, (TauScalar, GaussianRational, int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (TauScalar, GaussianRational, int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c) -> "Symbol":
        c = TauScalar.coerce(c)
        if not c._c:
            return self.zero_like()
        out: dict = {}
        for key, v in self._t.items():
            d, j = key[-2], key[-1]
            head = key[:-2]
            for (d2, j2), v2 in c._c.items():
                jj = j + j2
                w = v * v2
                if jj == 2:
                    jj, w = 0, -w
                nk = head + (d + d2, jj)
                x = out.get(nk, 0) + w
                if x:
                    out[nk] = x
                else:
                    out.pop(nk, None)
        return Symbol._raw(self.dim, out)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Symbol.const(self.dim, 1)
        for _ in range(k):
            out = out * self
        return out

    def inverse(self) -> "Symbol":
        """Pointwise inverse; only units ``c * e_k`` (c a nonzero constant) qualify."""
        terms = self.terms
        if len(terms) != 1:
            raise NotInvertible("only single Fourier monomials are invertible")
        (k, beta, alpha), c = next(iter(terms.items()))
        if any(beta) or any(alpha):
            raise NotInvertible("polynomial factors are not invertible")
        return Symbol.fourier(self.dim, tuple(-x for x in k), c.inverse())

    def conj(self) -> "Symbol":
        return sym_conj(self)

    def __eq__(self, other):
        if isinstance(other, Symbol):
            return self.dim == other.dim and self._t == other._t
        if isinstance(other, (int, Fraction, TauScalar, GaussianRational)):
            return self._t == Symbol.const(self.dim, other)._t
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._t.items())))
        return self._hash

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Symbol<{self.dim}>({render(self)})"


WaveFunction = Symbol


def _tuple_str(v: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in v) + ")"


def render(f: Symbol) -> str:
    """Canonical text: terms sorted by (k, beta, alpha); coefficients as (a+bi)τ^d."""
    if f.is_zero():
        return "0"
    parts = []
    for (k, b, a), c in f.terms.items():
        coeff = " + ".join(f"{g}τ^{d}" for d, g in c.coeffs.items())
        parts.append(f"[{coeff}]·e{_tuple_str(k)}·q{_tuple_str(b)}·p{_tuple_str(a)}")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Operations


def sym_mul(f: Symbol, g: Symbol) -> Symbol:
    """Pointwise product; e_k * e_l = e_{k+l}."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if not f._t or not g._t:
        return f.zero_like()
    m = 3 * f.dim
    out: dict = {}
    get = out.get
    for k1, v1 in f._t.items():
        h1 = k1[:m]
        d1, j1 = k1[m], k1[m + 1]
        for k2, v2 in g._t.items():
            j = j1 + k2[m + 1]
            w = v1 * v2
            if j == 2:
                j, w = 0, -w
            key = tuple(x + y for x, y in zip(h1, k2)) + (d1 + k2[m], j)
            x = get(key)
            out[key] = w if x is None else x + w
    return Symbol._raw(f.dim, {k: v for k, v in out.items() if v})


def partial_q(f: Symbol, axis: int) -> Symbol:
    """d/dq^axis: e_k gives tau*k_axis, q^beta gives beta_axis q^(beta - e_axis)."""
    n = f.dim
    bi = n + axis
    di = 3 * n
    out: dict = {}
    for key, v in f._t.items():
        kk = key[axis]
        if kk:
            nk = key[:di] + (key[di] + 1, key[di + 1])
            out[nk] = out.get(nk, 0) + v * kk
        b = key[bi]
        if b:
            nk = key[:bi] + (b - 1,) + key[bi + 1:]
            out[nk] = out.get(nk, 0) + v * b
    return Symbol._raw(n, {k: v for k, v in out.items() if v})


def partial_p(f: Symbol, axis: int) -> Symbol:
    n = f.dim
    ai = 2 * n + axis
    out: dict = {}
    for key, v in f._t.items():
        a = key[ai]
        if a:
            nk = key[:ai] + (a - 1,) + key[ai + 1:]
            out[nk] = out.get(nk, 0) + v * a
    return Symbol._raw(n, {k: v for k, v in out.items() if v})


def partial_multi(f: Symbol, qmulti: Sequence[int] = (), pmulti: Sequence[int] = ()) -> Symbol:
    """Apply d/dq^(qmulti) d/dp^(pmulti) given as per-axis multiplicities."""
    for i, m in enumerate(pmulti):
        for _ in range(m):
            f = partial_p(f, i)
            if f.is_zero():
                return f
    for i, m in enumerate(qmulti):
        for _ in range(m):
            f = partial_q(f, i)
            if f.is_zero():
                return f
    return f


def sym_conj(f: Symbol) -> Symbol:
    """Complex conjugation: k -> -k, i -> -i, tau -> -tau; q and p are real."""
    n = f.dim
    out = {}
    for key, v in f._t.items():
        d, j = key[-2], key[-1]
        nk = tuple(-x for x in key[:n]) + key[n:]
        out[nk] = -v if (d + j) % 2 else v
    return Symbol._raw(n, out)


def substitute_offset(f: Symbol, s) -> Symbol:
    """Rewrite a chart symbol under q -> q + s for an integral deck offset ``s``.

    q^beta expands binomially; e_k is unchanged because exp(tau k.s) = 1.
    """
    n = f.dim
    try:
        s = tuple(as_fraction(x) for x in (s if isinstance(s, (tuple, list)) else (s,)))
    except TypeError:
        raise ValueError("deck offsets must be integers") from None
    if len(s) != n or any(x.denominator != 1 for x in s):
        raise ValueError(f"deck offset {s} is not an integer vector of length {n}")
    s = tuple(int(x) for x in s)
    if not any(s):
        return f
    out: dict = {}
    for key, v in f._t.items():
        beta = key[n:2 * n]
        ranges = [range(b + 1) for b in beta]
        for lower in iproduct(*ranges):
            w = v
            for i, (b, l) in enumerate(zip(beta, lower)):
                w *= comb(b, l) * s[i] ** (b - l)
            if not w:
                continue
            nk = key[:n] + tuple(lower) + key[2 * n:]
            out[nk] = out.get(nk, 0) + w
    return Symbol._raw(n, {k: v for k, v in out.items() if v})


def vertical_lift(u: Symbol) -> Symbol:
    """pi^* u: the same terms read on phase space."""
    if not u.is_wave_function:
        raise ValueError("vertical_lift expects a function on the base (no p-dependence)")
    return u


def zero_section_restrict(f: Symbol) -> Symbol:
    """iota^*: set p = 0."""
    n = f.dim
    return Symbol._raw(n, {k: v for k, v in f._t.items() if not any(k[2 * n:3 * n])})


def torus_integral(u: Symbol) -> TauScalar:
    """Integral over T^n for the normalized Lebesgue measure: the e_0 coefficient."""
    if not u.is_wave_function:
        raise ValueError("torus_integral expects a wave function")
    if not u.is_global:
        raise NonGlobalSymbol("q-polynomial terms are not periodic")
    return u.coefficient()


# ---------------------------------------------------------------------------
# Matrices of symbols


class MatrixSymbol:
    """k x k matrix with Symbol entries (immutable)."""

    __slots__ = ("entries", "dim")

    def __init__(self, entries: Sequence[Sequence[Symbol]]):
        rows = tuple(tuple(r) for r in entries)
        k = len(rows)
        if k < 1 or any(len(r) != k for r in rows):
            raise ValueError("MatrixSymbol must be square with size >= 1")
        dims = {e.dim for r in rows for e in r}
        if len(dims) != 1:
            raise ValueError("entries must share one torus dimension")
        self.entries = rows
        self.dim = dims.pop()

    @property
    def size(self) -> int:
        return len(self.entries)

    @classmethod
    def identity(cls, k: int, dim: int) -> "MatrixSymbol":
        one, zero = Symbol.const(dim, 1), Symbol.zero(dim)
        return cls([[one if i == j else zero for j in range(k)] for i in range(k)])

    @classmethod
    def zeros(cls, k: int, dim: int) -> "MatrixSymbol":
        return cls([[Symbol.zero(dim)] * k for _ in range(k)])

    def zero_like(self) -> "MatrixSymbol":
        return MatrixSymbol.zeros(self.size, self.dim)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def _zip(self, other, fn):
        return MatrixSymbol([[fn(a, b) for a, b in zip(r1, r2)]
                             for r1, r2 in zip(self.entries, other.entries)])

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return MatrixSymbol([[-a for a in r] for r in self.entries])

    def __mul__(self, other):
        if isinstance(other, MatrixSymbol):
            k = self.size
            return MatrixSymbol([[sum((self.entries[i][l] * other.entries[l][j] for l in range(k)),
                                      Symbol.zero(self.dim)) for j in range(k)] for i in range(k)])
        return MatrixSymbol([[a * other for a in r] for r in self.entries])

    def __rmul__(self, other):
        return MatrixSymbol([[a * other for a in r] for r in self.entries])

    def adjoint(self) -> "MatrixSymbol":
        k = self.size
        return MatrixSymbol([[self.entries[j][i].conj() for j in range(k)] for i in range(k)])

    def is_zero(self) -> bool:
        return all(a.is_zero() for r in self.entries for a in r)

    def map(self, fn) -> "MatrixSymbol":
        return MatrixSymbol([[fn(a) for a in r] for r in self.entries])

    def __eq__(self, other):
        return isinstance(other, MatrixSymbol) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __str__(self):
        return "[" + "; ".join(", ".join(render(a) for a in r) for r in self.entries) + "]"

    __repr__ = __str__


def symbols_equal_on(f: Symbol, g: Symbol) -> bool:
    return (f - g).is_zero()


def linear_combination(dim: int, pairs: Iterable) -> Symbol:
    acc = Symbol.zero(dim)
    for c, s in pairs:
        acc = acc + s.scale(c)
    return acc
