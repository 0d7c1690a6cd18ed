"""Star products on T*T^n with the flat connection and Lebesgue density.

Conventions (fixed once, validated by the test-suite):

* Poisson bracket  {f, g} = sum_k df/dq^k dg/dp_k - df/dp_k dg/dq^k.
* Standard order   f *_S g = sum_r (-i lambda)^r / r! (d_p^r f)(d_q^r g),
  so that C_1(f, g) - C_1(g, f) = i {f, g} and (pi^* u) *_S f = u f.
* kappa order      f *_k g = N_k^{-1}(N_k f *_S N_k g),  N_k = exp(-i k lambda Laplacian).
  Multiplying the three exponentials gives the closed bidifferential form
  exp(-i lambda [(1-k) d_p (x) d_q - k d_q (x) d_p]), which is what
  ``star_kappa`` evaluates; ``star_kappa_composite`` keeps the defining route.
* Magnetic product f *'_k g = S_a^{-1}(S_a f *_k S_a g) with
  S_a = exp(i delta_k[A_a]) the quantized fiber translation by A_a.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import factorial
from typing import Any, Mapping, Sequence

from .operators import Generator, OperatorSeries, op_exp
from .scalars import (ContextMismatch, FormalSeries, GaussianRational, TauScalar,
                      TruncationContext, as_fraction)
from .symbols import Symbol, partial_multi, partial_p, partial_q, sym_mul

IM = TauScalar({0: GaussianRational(0, 1)})


@dataclass(frozen=True, eq=False)
class StarProductSpec:
    """Which product to use: kappa-ordering, optionally twisted by a magnetic bundle.

    ``patch`` selects the chart whose potential A_patch defines the magnetic
    product; operands must then be written in that chart.
    """

    kappa: Fraction
    context: TruncationContext
    magnetic: Any = None
    patch: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kappa", as_fraction(self.kappa))
        if self.magnetic is not None:
            if self.context.dim != 2:
                raise ValueError("magnetic products are modelled on T*T^2 only")
            check = getattr(self.magnetic, "check_potentials", None)
            if check is not None:
                check()

    @property
    def order(self) -> int:
        return self.context.order

    @property
    def dim(self) -> int:
        return self.context.dim

    @property
    def is_weyl(self) -> bool:
        return self.kappa == Fraction(1, 2)

    def with_patch(self, patch: int) -> "StarProductSpec":
        return StarProductSpec(self.kappa, self.context, self.magnetic, patch)

    def plain(self) -> "StarProductSpec":
        """The underlying kappa-ordered product without magnetic twist."""
        return StarProductSpec(self.kappa, self.context)

    def check_series(self, *fs: FormalSeries):
        for f in fs:
            if f.order != self.order:
                raise ContextMismatch(f"series of order {f.order} used with order {self.order}")
            c = f.coeffs[0]
            d = getattr(c, "dim", self.dim)
            if d != self.dim:
                raise ContextMismatch(f"symbol of dimension {d} used with dimension {self.dim}")

    def __repr__(self):
        mag = "" if self.magnetic is None else f", magnetic m={self.magnetic.charge}, patch={self.patch}"
        return f"StarProductSpec(kappa={self.kappa}, N={self.order}, n={self.dim}{mag})"


def make_spec(kappa=Fraction(1, 2), order: int = 2, dim: int = 1, magnetic=None, patch: int = 0):
    return StarProductSpec(as_fraction(kappa), TruncationContext(order, dim), magnetic, patch)


def lift(f, spec_or_order, dim: int | None = None) -> FormalSeries:
    """Promote a Symbol to a lambda-constant FormalSeries of the spec's order."""
    if isinstance(f, FormalSeries):
        return f
    order = spec_or_order.order if hasattr(spec_or_order, "order") else spec_or_order
    return FormalSeries.constant(f, order)


# ---------------------------------------------------------------------------
# bidifferential kernel


def _multi_indices(n: int, total: int):
    """All length-n non-negative integer vectors summing to ``total``."""
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _multi_indices(n - 1, total - first):
            yield (first,) + rest


def _mfact(mu) -> int:
    out = 1
    for m in mu:
        out *= factorial(m)
    return out


@lru_cache(maxsize=None)
def kappa_weights(kappa: Fraction, n: int, maxc: int):
    """[(c, mu, nu, weight)] for C_c(f,g) = sum w (d_p^mu d_q^nu f)(d_q^mu d_p^nu g)."""
    out = []
    for c in range(maxc + 1):
        ic = IM ** c
        for a in range(c + 1):
            b = c - a
            fa = (1 - kappa) ** a
            fb = (-kappa) ** b
            if not fa or not fb:
                continue
            for mu in _multi_indices(n, a):
                for nu in _multi_indices(n, b):
                    w = Fraction((-1) ** c) * fa * fb / (_mfact(mu) * _mfact(nu))
                    out.append((c, mu, nu, ic * TauScalar({0: w})))
    return tuple(out)


class _DerivTable:
    """Memoized mixed partials of one symbol."""

    def __init__(self, f: Symbol):
        self.f = f
        self.cache: dict = {}
        self.pdeg = f.max_p_degree()

    def get(self, qmulti, pmulti) -> Symbol:
        if sum(pmulti) > self.pdeg:
            return self.f.zero_like()
        key = (qmulti, pmulti)
        hit = self.cache.get(key)
        if hit is None:
            hit = partial_multi(self.f, qmulti, pmulti)
            self.cache[key] = hit
        return hit


def bidifferential_terms(f: Symbol, g: Symbol, kappa: Fraction, maxc: int) -> list[Symbol]:
    """[C_0(f,g), ..., C_maxc(f,g)] for the kappa-ordered product."""
    n = f.dim
    out = [f.zero_like() for _ in range(maxc + 1)]
    if f.is_zero() or g.is_zero():
        return out
    tf, tg = _DerivTable(f), _DerivTable(g)
    for c, mu, nu, w in kappa_weights(kappa, n, maxc):
        if sum(mu) > tf.pdeg or sum(nu) > tg.pdeg:
            continue
        a = tf.get(nu, mu)
        if a.is_zero():
            continue
        b = tg.get(mu, nu)
        if b.is_zero():
            continue
        out[c] = out[c] + sym_mul(a, b).scale(w)
    return out


def _series_bilinear(f: FormalSeries, g: FormalSeries, kappa: Fraction) -> FormalSeries:
    n = min(f.order, g.order)
    zero = f.coeffs[0].zero_like()
    out = [zero] * (n + 1)
    for a in range(n + 1):
        fa = f.coeffs[a]
        if fa.is_zero():
            continue
        for b in range(n + 1 - a):
            gb = g.coeffs[b]
            if gb.is_zero():
                continue
            for c, term in enumerate(bidifferential_terms(fa, gb, kappa, n - a - b)):
                if not term.is_zero():
                    out[a + b + c] = out[a + b + c] + term
    return FormalSeries(out, n)


# ---------------------------------------------------------------------------
# products


def star_standard(f: FormalSeries, g: FormalSeries, spec: StarProductSpec | None = None) -> FormalSeries:
    """Standard-ordered product sum_r (-i lambda)^r/r! (d_p^r f)(d_q^r g)."""
    if spec is not None:
        spec.check_series(f, g)
    return _series_bilinear(f, g, Fraction(0))


def star_kappa(f: FormalSeries, g: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    spec.check_series(f, g)
    return _series_bilinear(f, g, spec.kappa)


def star_kappa_composite(f: FormalSeries, g: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """N_k^{-1}(N_k f *_S N_k g), evaluated literally."""
    spec.check_series(f, g)
    nf = apply_N_kappa(f, spec)
    ng = apply_N_kappa(g, spec)
    return apply_N_kappa_inv(star_standard(nf, ng), spec)


def star(f: FormalSeries, g: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """The product named by ``spec`` (magnetic if the spec carries a bundle)."""
    if spec.magnetic is not None:
        return star_magnetic(f, g, spec.patch, spec)
    return star_kappa(f, g, spec)


def commutator(f: FormalSeries, g: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    return star(f, g, spec) - star(g, f, spec)


def star_power(f: FormalSeries, k: int, spec: StarProductSpec) -> FormalSeries:
    out = lift(Symbol.const(spec.dim, 1), spec)
    for _ in range(k):
        out = star(out, f, spec)
    return out


# ---------------------------------------------------------------------------
# Laplacian and N_kappa


def laplacian(f: Symbol) -> Symbol:
    """Flat Laplacian sum_k d^2/(dp_k dq^k)."""
    acc = f.zero_like()
    for k in range(f.dim):
        d = partial_p(f, k)
        if not d.is_zero():
            acc = acc + partial_q(d, k)
    return acc


@dataclass(frozen=True, repr=False)
class Laplacian(Generator):
    name = "Δ"

    def __call__(self, f):
        return laplacian(f)


def N_kappa_op(kappa, order: int, sign: int = 1) -> OperatorSeries:
    """exp(-i sign kappa lambda Laplacian) as an operator series."""
    kappa = as_fraction(kappa)
    grades = []
    for r in range(order + 1):
        c = (IM * TauScalar({0: -sign * kappa})) ** r * TauScalar({0: Fraction(1, factorial(r))})
        grades.append({(Laplacian(),) * r: c} if c else {})
    return OperatorSeries(grades, order)


def apply_N_kappa(f: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    return N_kappa_op(spec.kappa, f.order).apply(f)


def apply_N_kappa_inv(f: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    return N_kappa_op(spec.kappa, f.order, sign=-1).apply(f)


def apply_N(f: FormalSeries, kappa, inverse: bool = False) -> FormalSeries:
    return N_kappa_op(kappa, f.order, -1 if inverse else 1).apply(f)


# ---------------------------------------------------------------------------
# symmetric tensor fields, D and F


def _canon(idx: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted(idx))


def _perm_count(idx: tuple[int, ...]) -> int:
    counts: dict = {}
    for i in idx:
        counts[i] = counts.get(i, 0) + 1
    out = factorial(len(idx))
    for c in counts.values():
        out //= factorial(c)
    return out


class SymTensorField:
    """Symmetric covariant tensor of degree s with chart wave-function components.

    Components are stored under sorted index tuples; ``component`` accepts any
    ordering.
    """

    __slots__ = ("degree", "dim", "components", "_hash")

    def __init__(self, degree: int, dim: int, components: Mapping[Sequence[int], Symbol] | None = None):
        self.degree = degree
        self.dim = dim
        comps: dict = {}
        for idx, val in (components or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(not 0 <= i < dim for i in idx):
                raise ValueError(f"bad tensor index {idx} for degree {degree}, dim {dim}")
            if not val.is_wave_function:
                raise ValueError("tensor components must be functions on the base")
            key = _canon(idx)
            if key in comps and comps[key] != val:
                raise ValueError(f"component {idx} conflicts with its symmetric partner")
            if not val.is_zero():
                comps[key] = val
        self.components = comps
        self._hash = None

    @classmethod
    def function(cls, u: Symbol) -> "SymTensorField":
        return cls(0, u.dim, {(): u})

    @classmethod
    def one_form(cls, comps: Sequence[Symbol]) -> "SymTensorField":
        dim = comps[0].dim
        return cls(1, dim, {(i,): c for i, c in enumerate(comps)})

    def component(self, idx: Sequence[int]) -> Symbol:
        return self.components.get(_canon(idx), Symbol.zero(self.dim))

    def is_zero(self) -> bool:
        return not self.components

    def scale(self, c) -> "SymTensorField":
        return SymTensorField(self.degree, self.dim,
                              {k: v.scale(c) for k, v in self.components.items()})

    def __add__(self, other: "SymTensorField") -> "SymTensorField":
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps.get(k, Symbol.zero(self.dim)) + v
        return SymTensorField(self.degree, self.dim, comps)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        return (isinstance(other, SymTensorField) and self.degree == other.degree
                and self.dim == other.dim and self.components == other.components)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.degree, self.dim, frozenset(self.components.items())))
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{k}: {v}" for k, v in sorted(self.components.items()))
        return f"SymTensorField(s={self.degree}, {{{inner}}})"


def sym_derivative(t: SymTensorField) -> SymTensorField:
    """Flat symmetrized derivative: (DT)_{i0..is} = Sym d_{i0} T_{i1..is}."""
    s = t.degree
    comps = {}
    for idx in iproduct(range(t.dim), repeat=s + 1):
        key = _canon(idx)
        if key in comps:
            continue
        acc = Symbol.zero(t.dim)
        for j in range(s + 1):
            rest = key[:j] + key[j + 1:]
            acc = acc + partial_q(t.component(rest), key[j])
        comps[key] = acc.scale(TauScalar({0: Fraction(1, s + 1)}))
    return SymTensorField(s + 1, t.dim, comps)


def sym_derivative_power(t: SymTensorField, k: int) -> SymTensorField:
    for _ in range(k):
        t = sym_derivative(t)
    return t


def fiber_insert(t: SymTensorField, f: Symbol) -> Symbol:
    """F(T) f = sum over ordered index tuples I of T_I d^|I| f / dp_I."""
    acc = f.zero_like()
    for key, comp in t.components.items():
        pm = [0] * t.dim
        for i in key:
            pm[i] += 1
        d = partial_multi(f, (), pm)
        if d.is_zero():
            continue
        acc = acc + sym_mul(comp, d).scale(TauScalar({0: _perm_count(key)}))
    return acc


@dataclass(frozen=True, repr=False)
class FiberInsert(Generator):
    tensor: SymTensorField

    @property
    def name(self):
        return f"F[s={self.tensor.degree}]"

    def __call__(self, f):
        return fiber_insert(self.tensor, f)


def delta_coefficient(kappa: Fraction, s: int) -> TauScalar:
    """[(i k)^{s+1} - (-i(1-k))^{s+1}] / (s+1)!  (multiplies lambda^{s+1} D^s A)."""
    a = (IM * TauScalar({0: kappa})) ** (s + 1)
    b = (IM * TauScalar({0: -(1 - kappa)})) ** (s + 1)
    return (a - b) * TauScalar({0: Fraction(1, factorial(s + 1))})


def delta_kappa_op(a: SymTensorField, kappa, order: int) -> OperatorSeries:
    """delta_k[A] = F( sum_s c_s lambda^{s+1} D^s A ) as an operator series."""
    kappa = as_fraction(kappa)
    grades = [{} for _ in range(order + 1)]
    t = a
    for s in range(order):
        if t.is_zero():
            break
        c = delta_coefficient(kappa, s)
        if c:
            grades[s + 1] = {(FiberInsert(t),): c}
        t = sym_derivative(t)
    return OperatorSeries(grades, order)


def delta_kappa(a: SymTensorField, f: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    return delta_kappa_op(a, spec.kappa, f.order).apply(f)


@lru_cache(maxsize=512)
def _fiber_translation(a: SymTensorField, kappa: Fraction, order: int, sign: int) -> OperatorSeries:
    return op_exp(delta_kappa_op(a, kappa, order).scale(IM * TauScalar({0: sign})))


def fiber_translation_op(a: SymTensorField, spec: StarProductSpec, inverse: bool = False) -> OperatorSeries:
    """S = exp(i delta_k[A]); ``inverse`` gives exp(-i delta_k[A])."""
    return _fiber_translation(a, spec.kappa, spec.order, -1 if inverse else 1)


def star_magnetic(f: FormalSeries, g: FormalSeries, patch: int, spec: StarProductSpec) -> FormalSeries:
    """f *'_k g = S_patch^{-1}(S_patch f *_k S_patch g) in the chart ``patch``."""
    bundle = spec.magnetic
    if bundle is None:
        raise ValueError("star_magnetic needs a spec carrying line-bundle data")
    if patch not in bundle.patches():
        raise ValueError(f"unknown patch {patch}")
    base = spec.plain()
    a = bundle.potential(patch)
    s = fiber_translation_op(a, base)
    s_inv = fiber_translation_op(a, base, inverse=True)
    return s_inv.apply(star_kappa(s.apply(f), s.apply(g), base))


def poisson_bracket(f: Symbol, g: Symbol) -> Symbol:
    acc = f.zero_like()
    for k in range(f.dim):
        acc = acc + sym_mul(partial_q(f, k), partial_p(g, k)) - sym_mul(partial_p(f, k), partial_q(g, k))
    return acc


def ad_op(h: FormalSeries, spec: StarProductSpec) -> OperatorSeries:
    """ad(H) = [H, .]_* as an operator series (grade-0 part vanishes)."""
    from .operators import from_maps

    maps = []
    kappa = spec.kappa
    n = h.order
    if spec.magnetic is not None:
        raise NotImplementedError("ad_op is provided for the kappa-ordered products")
    for a in range(n + 1):
        ha = h.coeffs[a]
        if ha.is_zero():
            continue
        for c in range(1, n + 1 - a):
            def comm(f, ha=ha, c=c):
                return (bidifferential_terms(ha, f, kappa, c)[c]
                        - bidifferential_terms(f, ha, kappa, c)[c])
            maps.append((a + c, comm, f"[H{a},·]_{c}"))
    return from_maps(maps, n)


def series_conj(f: FormalSeries) -> FormalSeries:
    """Complex conjugation of a symbol series (lambda is real)."""
    return f.map(lambda s: s.conj())


def star_inverse(f: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """Two-sided *-inverse of f whose lambda^0 part is a unit c e_k."""
    u = lift(f.coeffs[0].inverse(), f.order)
    one = lift(Symbol.const(f.coeffs[0].dim, 1), f.order)
    x = one - star(u, f, spec)
    acc, term = one, one
    for _ in range(f.order):
        term = star(term, x, spec)
        acc = acc + term
    return star(acc, u, spec)
