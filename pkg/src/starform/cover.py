"""Combinatorial good covers of T^n and line-bundle data on them.

Each circle factor is covered by three arcs; arc j is charted by the lift
(j/3 - eps, (j+1)/3 + eps) of the unit interval.  Charts of two overlapping
patches differ by an integer deck translation: q_alpha = q_beta + s[alpha, beta].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product as iproduct
from functools import cached_property

from .scalars import TWO_PI, TauScalar, as_fraction
from .starprod import SymTensorField
from .symbols import Symbol, partial_q, substitute_offset

ARCS = 3


def _arc_offset(a: int, b: int) -> int | None:
    """Deck offset between arc charts a and b of one circle (None if disjoint)."""
    if a == b or abs(a - b) == 1:
        return 0
    if (a, b) == (ARCS - 1, 0):
        return 1
    if (a, b) == (0, ARCS - 1):
        return -1
    return None


@dataclass(frozen=True)
class GoodCover:
    dim: int
    arcs: tuple = field(repr=False)  # patch index -> per-axis arc tuple

    @property
    def patches(self) -> range:
        return range(len(self.arcs))

    @cached_property
    def offsets(self) -> dict:
        """(alpha, beta) -> deck offset vector, for every ordered pair of distinct overlapping patches."""
        out = {}
        for a, b in iproduct(self.patches, repeat=2):
            if a == b:
                continue
            s = tuple(_arc_offset(x, y) for x, y in zip(self.arcs[a], self.arcs[b]))
            if None not in s:
                out[(a, b)] = s
        return out

    def offset(self, a: int, b: int) -> tuple:
        if a == b:
            return (0,) * self.dim
        try:
            return self.offsets[(a, b)]
        except KeyError:
            raise ValueError(f"patches {a} and {b} do not overlap") from None

    def overlaps(self, a: int, b: int) -> bool:
        return a == b or (a, b) in self.offsets

    def nonempty(self, simplex) -> bool:
        # three arcs of one circle never share a point
        return all(len({self.arcs[p][ax] for p in simplex}) <= 2 for ax in range(self.dim))

    @cached_property
    def pairs(self) -> tuple:
        return tuple((a, b) for a, b in combinations(self.patches, 2) if self.overlaps(a, b))

    @cached_property
    def triples(self) -> tuple:
        return tuple(t for t in combinations(self.patches, 3) if self.nonempty(t))

    @cached_property
    def quadruples(self) -> tuple:
        return tuple(t for t in combinations(self.patches, 4) if self.nonempty(t))

    def to_chart(self, f: Symbol, source: int, target: int) -> Symbol:
        """Rewrite a chart-``source`` symbol in the coordinates of chart ``target``."""
        if source == target:
            return f
        return substitute_offset(f, self.offset(source, target))

    def check(self):
        for (a, b), s in self.offsets.items():
            if tuple(-x for x in self.offsets[(b, a)]) != s:
                raise AssertionError(f"offsets not antisymmetric on ({a}, {b})")
        for a, b, c in self.triples:
            tot = [x + y + z for x, y, z in zip(self.offset(a, b), self.offset(b, c), self.offset(c, a))]
            if any(tot):
                raise AssertionError(f"offsets inconsistent on triple {(a, b, c)}")
        return True

    def euler_characteristic(self) -> int:
        return len(self.patches) - len(self.pairs) + len(self.triples) - len(self.quadruples)


def build_torus_cover(n: int) -> GoodCover:
    if n not in (1, 2):
        raise ValueError(f"unsupported torus dimension {n}")
    return GoodCover(n, tuple(iproduct(range(ARCS), repeat=n)))


# ---------------------------------------------------------------------------
# line bundles


class BundleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LineBundleData:
    """Monopole-type line bundle on the 2-torus cover.

    ``exponents[(a, b)]`` is c_ab written in chart a, stored for a < b; the
    transition function is phi_ab = exp(tau c_ab).  The potential in every
    chart is A = 2 pi m x dy and the curvature B = 2 pi m dx^dy.
    """

    charge: Fraction
    cover: GoodCover
    exponents: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return self.cover.dim

    def patches(self) -> range:
        return self.cover.patches

    @property
    def field_strength(self) -> TauScalar:
        """Coefficient of dx^dy in B, i.e. 2 pi m = -i tau m."""
        return TWO_PI * TauScalar({0: self.charge})

    def potential(self, patch: int) -> SymTensorField:
        ax = Symbol.mono(2, qpow=(1, 0), coeff=self.field_strength)
        return SymTensorField.one_form([Symbol.zero(2), ax])

    def exponent(self, a: int, b: int) -> Symbol:
        """c_ab as a function in chart a (c_ba = -c_ab)."""
        if a == b:
            return Symbol.zero(2)
        if a < b:
            return self.exponents[(a, b)]
        return -self.cover.to_chart(self.exponents[(b, a)], b, a)

    def branch(self, a: int, b: int) -> int:
        """Constant part of c_ab; the branch of log phi_ab."""
        c = self.exponent(a, b).coefficient()
        return int(c.coeff(0).re)

    def frequency(self, a: int, b: int) -> tuple:
        """phi_ab = e_k with k the q-linear slope of c_ab."""
        c = self.exponent(a, b)
        return tuple(int(c.coefficient(qpow=tuple(int(i == j) for j in range(2))).coeff(0).re)
                     for i in range(2))

    def transition(self, a: int, b: int) -> Symbol:
        return Symbol.fourier(2, self.frequency(a, b))

    def log_transition(self, a: int, b: int) -> Symbol:
        """tau c_ab: the classical logarithm of phi_ab with its branch."""
        return self.exponent(a, b).scale(TauScalar.tau())

    def check_potentials(self):
        """A_a - A_b = 2 pi dc_ab on overlaps and dA_a = B."""
        cov = self.cover
        for a, b in cov.offsets:
            aa = self.potential(a)
            ab = self.potential(b)
            c = self.exponent(a, b)
            for i in range(2):
                lhs = aa.component((i,)) - cov.to_chart(ab.component((i,)), b, a)
                rhs = partial_q(c, i).scale(TWO_PI)
                if lhs != rhs:
                    raise BundleError(f"A_{a} - A_{b} != 2 pi dc on axis {i}")
        for a in self.patches():
            pot = self.potential(a)
            curl = partial_q(pot.component((1,)), 0) - partial_q(pot.component((0,)), 1)
            if curl != Symbol.const(2, self.field_strength):
                raise BundleError(f"dA_{a} != B")
        return True


def monopole_bundle(m, cover: GoodCover | None = None) -> LineBundleData:
    """Line bundle of Chern number m on T^2."""
    m = as_fraction(m)
    if m.denominator != 1:
        raise BundleError(f"no line bundle of fractional charge {m}")
    cover = cover or build_torus_cover(2)
    if cover.dim != 2:
        raise BundleError("monopole bundles live on the 2-torus cover")
    exps = {}
    y = Symbol.q(2, 1)
    for a, b in cover.pairs:
        sx = cover.offset(a, b)[0]
        exps[(a, b)] = y.scale(TauScalar({0: m * sx}))
    bundle = LineBundleData(m, cover, exps)
    bundle.check_potentials()
    return bundle

