"""Cech cochains on the torus nerve, deformed transition functions and Deligne's relative class.

Cochains are dicts keyed by increasing patch tuples.  For the 2-torus,
H^2 is one-dimensional; class coordinates are taken with respect to the
generator obtained from the Cech-de Rham zig-zag of dx^dy with chart
primitives x dy.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import sympy

from .cover import GoodCover, LineBundleData
from .explog import bch_compose, star_exp, star_log
from .reports import CheckReport, merge, residual_report
from .scalars import TWO_PI, FormalSeries, TauScalar, as_fraction
from .starprod import (StarProductSpec, SymTensorField, fiber_translation_op, lift,
                       star, star_kappa, star_magnetic)
from .symbols import Symbol, substitute_offset

SCHEMA_VERSION = 1


class NotACocycle(ValueError):
    pass


class CocycleError(AssertionError):
    def __init__(self, msg: str, simplex=None):
        super().__init__(msg)
        self.simplex = simplex


def _integer_constant(s: Symbol) -> int | None:
    """The integer n if ``s`` is the constant n, else None."""
    terms = s.terms
    if not terms:
        return 0
    if len(terms) != 1:
        return None
    (k, beta, alpha), c = next(iter(terms.items()))
    if any(k) or any(beta) or any(alpha) or not c.is_constant():
        return None
    g = c.coeff(0)
    if g.im or g.re.denominator != 1:
        return None
    return int(g.re)


# ---------------------------------------------------------------------------
# classical data


def triple_sum(cover: GoodCover, exponent, a: int, b: int, c: int) -> Symbol:
    """c_ab + c_bc + c_ca written in chart a."""
    return (exponent(a, b) + cover.to_chart(exponent(b, c), b, a)
            + cover.to_chart(exponent(c, a), c, a))


def verify_classical_cocycle(bundle: LineBundleData, cover: GoodCover | None = None) -> dict:
    """Integer 2-cocycle n_abc = c_ab + c_bc + c_ca; raises CocycleError on violation."""
    cover = cover or bundle.cover
    cover.check()
    out = {}
    for t in cover.triples:
        s = triple_sum(cover, bundle.exponent, *t)
        n = _integer_constant(s)
        if n is None:
            raise CocycleError(f"c-sum on triple {t} is {s}, not an integer", t)
        out[t] = n
    return out


# ---------------------------------------------------------------------------
# cochain linear algebra


def coboundary_matrix(cover: GoodCover, k: int) -> sympy.Matrix:
    """delta: C^k -> C^{k+1} on the nerve (k = 0, 1, 2)."""
    simp = {0: [(p,) for p in cover.patches], 1: list(cover.pairs),
            2: list(cover.triples), 3: list(cover.quadruples)}
    src, dst = simp[k], simp[k + 1]
    col = {s: j for j, s in enumerate(src)}
    m = sympy.zeros(len(dst), len(src))
    for i, t in enumerate(dst):
        for pos in range(len(t)):
            face = t[:pos] + t[pos + 1:]
            m[i, col[face]] += (-1) ** pos
    return m


def apply_coboundary(cover: GoodCover, cochain: dict, k: int) -> dict:
    simp = {1: cover.pairs, 2: cover.triples, 3: cover.quadruples}
    out = {}
    for t in simp[k + 1]:
        out[t] = sum((-1) ** pos * cochain.get(t[:pos] + t[pos + 1:], 0) for pos in range(len(t)))
    return out


@lru_cache(maxsize=4)
def h2_generator(cover: GoodCover) -> dict:
    """Cech image of [dx^dy]: theta_a = x dy, theta_a - theta_b = d f_ab with f_ab = s^x_ab y_a."""
    y = Symbol.q(2, 1)

    def f(a, b):
        if a < b:
            return y.scale(cover.offset(a, b)[0])
        return -cover.to_chart(f(b, a), b, a)

    out = {}
    for t in cover.triples:
        n = _integer_constant(triple_sum(cover, f, *t))
        if n is None:
            raise AssertionError("zig-zag of dx^dy did not produce an integer cocycle")
        out[t] = n
    return out


def cech_class_reduce(cocycle: dict, cover: GoodCover) -> list[Fraction]:
    """Coordinates of a Cech 2-cocycle in the fixed H^2 basis."""
    if cover.dim != 2:
        raise ValueError("H^2 coordinates are implemented for the 2-torus")
    d2 = apply_coboundary(cover, cocycle, 2)
    if any(d2.values()):
        bad = next(t for t, v in d2.items() if v)
        raise NotACocycle(f"delta of the cochain is nonzero on {bad}")
    triples = list(cover.triples)
    gen = h2_generator(cover)
    d1 = coboundary_matrix(cover, 1)
    g = sympy.Matrix([gen[t] for t in triples])
    rhs = sympy.Matrix([sympy.Rational(cocycle.get(t, 0)) for t in triples])
    system = g.row_join(d1)
    sol, params = system.gauss_jordan_solve(rhs)
    sol = sol.subs({p: 0 for p in params})
    r = sympy.Rational(sol[0])
    # the generator direction must be pinned down uniquely
    check = system * sol - rhs
    if any(check):
        raise NotACocycle("cochain is not in the span of the generator and coboundaries")
    return [Fraction(int(r.p), int(r.q))]


# ---------------------------------------------------------------------------
# deformed transition functions


@dataclass
class DeformedTransition:
    """t_ab and phi_ab = Exp(t_ab) in chart a, for all ordered overlapping pairs."""

    cover: GoodCover
    logs: dict
    transitions: dict
    spec: StarProductSpec = field(repr=False)

    def phi(self, a, b) -> FormalSeries:
        return self.transitions[(a, b)]

    def t(self, a, b) -> FormalSeries:
        return self.logs[(a, b)]


def _to_chart_series(cover, f: FormalSeries, src, dst) -> FormalSeries:
    if src == dst:
        return f
    s = cover.offset(src, dst)
    return f.map(lambda x: substitute_offset(x, s))


def pulled_back_transitions(bundle: LineBundleData, spec: StarProductSpec) -> DeformedTransition:
    """phi_hat = pi^* phi with t_ab = tau c_ab (exact: q-functions commute and multiply pointwise)."""
    cov = bundle.cover
    logs, phis = {}, {}
    for a, b in cov.offsets:
        phis[(a, b)] = lift(bundle.transition(a, b), spec)
        logs[(a, b)] = lift(bundle.log_transition(a, b), spec)
    return DeformedTransition(cov, logs, phis, spec)


def default_gauge(a: int, spec: StarProductSpec) -> FormalSeries:
    """A patch-dependent, p-dependent gauge generator h_a used to make the pipeline non-trivial."""
    d = spec.dim
    px, py = Symbol.p(d, 0), Symbol.p(d, 1)
    ex = Symbol.fourier(d, (1, 0))
    h = (px.scale(Fraction(a + 1, 3)) * ex + py * py.scale(Fraction(1, a + 2))
         + Symbol.q(d, 1).scale(Fraction(a % 3 - 1, 2)))
    return FormalSeries.monomial(h, 1, spec.order)


def gauged_transitions(bundle: LineBundleData, spec: StarProductSpec, gauge=default_gauge) -> DeformedTransition:
    """phi'_ab = g_a * pi^*phi_ab * g_b^{-1} with g_a = Exp(lambda h_a)."""
    cov = bundle.cover
    g = {a: star_exp(gauge(a, spec), spec) for a in cov.patches}
    ginv = {a: star_exp(-gauge(a, spec), spec) for a in cov.patches}
    logs, phis = {}, {}
    for a, b in cov.offsets:
        base = lift(bundle.transition(a, b), spec)
        ph = star(star(g[a], base, spec), _to_chart_series(cov, ginv[b], b, a), spec)
        phis[(a, b)] = ph
        logs[(a, b)] = star_log(ph, spec, bundle.branch(a, b))
    return DeformedTransition(cov, logs, phis, spec)


def verify_quantum_cocycle(dt: DeformedTransition, spec: StarProductSpec | None = None) -> CheckReport:
    """phi_ab * phi_bc * phi_ca = 1 on triples and phi_ab * phi_ba = 1 on pairs."""
    spec = spec or dt.spec
    cov = dt.cover
    one = lift(Symbol.const(spec.dim, 1), spec)
    parts = []
    for a, b in cov.pairs:
        r = star(dt.phi(a, b), _to_chart_series(cov, dt.phi(b, a), b, a), spec) - one
        parts.append(residual_report(f"pair{(a, b)}", r))
    for a, b, c in cov.triples:
        r = star(star(dt.phi(a, b), _to_chart_series(cov, dt.phi(b, c), b, a), spec),
                 _to_chart_series(cov, dt.phi(c, a), c, a), spec) - one
        parts.append(residual_report(f"triple{(a, b, c)}", r))
    return merge("quantum_cocycle", parts)


# ---------------------------------------------------------------------------
# equivalences and conjugation identities


def chart_potential(bundle: LineBundleData, patch: int, chart: int) -> SymTensorField:
    """A_patch written in the coordinates of ``chart``."""
    a = bundle.potential(patch)
    if patch == chart:
        return a
    return SymTensorField(1, a.dim, {k: bundle.cover.to_chart(v, patch, chart)
                                     for k, v in a.components.items()})


def conjugation_check(bundle: LineBundleData, spec: StarProductSpec, a: int, b: int,
                      probes: list[FormalSeries]) -> CheckReport:
    """S_a S_b^{-1} f = phi_ab * f * phi_ba on the overlap, in chart a."""
    plain = spec.plain()
    s_a = fiber_translation_op(chart_potential(bundle, a, a), plain)
    s_b_inv = fiber_translation_op(chart_potential(bundle, b, a), plain, inverse=True)
    phi_ab = lift(bundle.transition(a, b), plain)
    phi_ba = lift(bundle.transition(b, a), plain)
    parts = []
    for i, f in enumerate(probes):
        lhs = s_a.apply(s_b_inv.apply(f))
        rhs = star_kappa(star_kappa(phi_ab, f, plain), phi_ba, plain)
        parts.append(residual_report(f"conj{(a, b)}#{i}", lhs - rhs))
    return merge(f"conjugation{(a, b)}", parts)


def equivalence_check(bundle: LineBundleData, spec_prime: StarProductSpec, a: int,
                      pairs: list[tuple]) -> CheckReport:
    """S_a(f *' g) = S_a f * S_a g, with *' evaluated from the spec's reference patch."""
    plain = spec_prime.plain()
    s_a = fiber_translation_op(chart_potential(bundle, a, a), plain)
    parts = []
    ref = spec_prime.patch
    cov = bundle.cover
    for i, (f, g) in enumerate(pairs):
        if ref == a:
            prod = star_magnetic(f, g, ref, spec_prime)
        else:
            # evaluate in the reference chart and carry the result back
            fr = _to_chart_series(cov, f, a, ref)
            gr = _to_chart_series(cov, g, a, ref)
            prod = _to_chart_series(cov, star_magnetic(fr, gr, ref, spec_prime), ref, a)
        lhs = s_a.apply(prod)
        rhs = star_kappa(s_a.apply(f), s_a.apply(g), plain)
        parts.append(residual_report(f"equiv[{a}]#{i}", lhs - rhs))
    return merge(f"equivalence[{a}]", parts)


def magnetic_patch_independence(bundle: LineBundleData, spec_prime: StarProductSpec, a: int, b: int,
                                pairs: list[tuple]) -> CheckReport:
    """f *'_a g computed in chart a equals the chart-b computation carried back."""
    cov = bundle.cover
    parts = []
    for i, (f, g) in enumerate(pairs):
        lhs = star_magnetic(f, g, a, spec_prime)
        fb, gb = _to_chart_series(cov, f, a, b), _to_chart_series(cov, g, a, b)
        rhs = _to_chart_series(cov, star_magnetic(fb, gb, b, spec_prime), b, a)
        parts.append(residual_report(f"patch{(a, b)}#{i}", lhs - rhs))
    return merge(f"patch_independence{(a, b)}", parts)


def probe_symbols(spec: StarProductSpec) -> list[FormalSeries]:
    d = spec.dim
    x, y = Symbol.q(d, 0), Symbol.q(d, 1)
    px, py = Symbol.p(d, 0), Symbol.p(d, 1)
    e = Symbol.fourier(d, (1, -1))
    return [lift(px * py, spec), lift(py * py * e + x * px, spec),
            lift(y * px * px + py.scale(Fraction(1, 2)), spec)]


# ---------------------------------------------------------------------------
# Deligne's relative class


@dataclass
class CechClassResult:
    triples: list
    cocycle: list
    coordinates: list
    integral: bool
    classical: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def coordinate(self) -> Fraction:
        return self.coordinates[0]

    def to_json(self) -> dict:
        return {"schema": SCHEMA_VERSION,
                "triples": [list(t) for t in self.triples],
                "cocycle": list(self.cocycle),
                "coordinates": [str(c) for c in self.coordinates],
                "integral": self.integral}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class RelativeClassError(AssertionError):
    pass


def relative_class(bundle: LineBundleData, spec: StarProductSpec, spec_prime: StarProductSpec,
                   gauge=default_gauge, probe_patches: tuple = (1, 4)) -> CechClassResult:
    """Cech representative of t(*', *) for *' the magnetic product of ``bundle``.

    Steps: check S_a is an equivalence *' -> * and S_a S_b^{-1} = Ad(phi_ab);
    take t_ab = Ln(phi'_ab) for gauged transitions; compose
    t_abc = t_ab o t_bc o t_ca and require each to be tau times an integer.
    """
    if spec.magnetic is not None or spec_prime.magnetic is not bundle:
        raise ValueError("expected (plain kappa product, magnetic product of this bundle)")
    if spec.kappa != spec_prime.kappa or spec.context != spec_prime.context:
        raise ValueError("the two products must share kappa and truncation context")
    cov = bundle.cover
    checks = []
    probes = probe_symbols(spec)
    pairs = [(probes[0], probes[1])]
    for a in probe_patches:
        checks.append(equivalence_check(bundle, spec_prime, a, pairs).require())
    for a, b in [(0, 6), (0, 2), (4, 8)]:
        if cov.overlaps(a, b):
            checks.append(conjugation_check(bundle, spec, a, b, probes).require())

    dt = gauged_transitions(bundle, spec, gauge)
    checks.append(verify_quantum_cocycle(dt, spec).require())
    classical = verify_classical_cocycle(bundle)
    cocycle = {}
    for a, b, c in cov.triples:
        tabc = bch_compose(bch_compose(dt.t(a, b), _to_chart_series(cov, dt.t(b, c), b, a), spec),
                           _to_chart_series(cov, dt.t(c, a), c, a), spec)
        for r in range(1, tabc.order + 1):
            if not tabc.coeffs[r].is_zero():
                raise RelativeClassError(f"t_{(a, b, c)} depends on lambda at order {r}")
        n = _tau_integer(tabc.coeffs[0])
        if n is None:
            raise RelativeClassError(f"t_{(a, b, c)} = {tabc.coeffs[0]} is not tau times an integer")
        cocycle[(a, b, c)] = n
    if cocycle != classical:
        raise RelativeClassError("quantum cocycle differs from the classical Chern cocycle")
    coords = cech_class_reduce(cocycle, cov)
    triples = list(cov.triples)
    return CechClassResult(triples, [cocycle[t] for t in triples], coords,
                           all(c.denominator == 1 for c in coords),
                           [classical[t] for t in triples], checks)


def _tau_integer(s: Symbol) -> int | None:
    """n if ``s`` is the constant tau*n."""
    terms = s.terms
    if not terms:
        return 0
    if len(terms) != 1:
        return None
    (k, beta, alpha), c = next(iter(terms.items()))
    if any(k) or any(beta) or any(alpha) or set(c.coeffs) != {1}:
        return None
    g = c.coeff(1)
    if g.im or g.re.denominator != 1:
        return None
    return int(g.re)


def magnetic_spec(bundle: LineBundleData, kappa, order: int, patch: int = 0) -> StarProductSpec:
    from .scalars import TruncationContext

    return StarProductSpec(as_fraction(kappa), TruncationContext(order, 2), bundle, patch)


def plain_spec(kappa, order: int, dim: int = 2) -> StarProductSpec:
    from .scalars import TruncationContext

    return StarProductSpec(as_fraction(kappa), TruncationContext(order, dim))


# ---------------------------------------------------------------------------
# Dirac integrality and the Picard action


@dataclass
class DiracResult:
    integral: bool
    charges: list

    @property
    def charge(self) -> Fraction:
        return self.charges[0]

    def to_json(self) -> dict:
        return {"integral": self.integral, "charge": str(self.charge),
                "charges": [str(c) for c in self.charges]}


def dirac_check(b: FormalSeries) -> DiracResult:
    """Charges (1/2pi) * (dx^dy coefficient of B) per lambda-order; integral iff all are integers."""
    charges = []
    for r, c in enumerate(b.coeffs):
        c = TauScalar.coerce(c)
        if c.is_zero():
            charges.append(Fraction(0))
            continue
        if set(c.coeffs) != {1}:
            raise ValueError(f"B at lambda^{r} is {c}: not a constant multiple of 2 pi in this model")
        charges.append(_div_two_pi(c))
    return DiracResult(all(q.denominator == 1 for q in charges), charges)


def _div_two_pi(c: TauScalar) -> Fraction:
    # c = g tau with g Gaussian; 2 pi = -i tau, so c / 2pi = i g
    g = c.coeff(1)
    if g.re:
        raise ValueError(f"B coefficient {c} is not real")
    return -g.im


def curvature_series(charges, order: int | None = None) -> FormalSeries:
    """B = sum_r lambda^r 2 pi m_r dx^dy as a series of TauScalar coefficients."""
    vals = [TWO_PI * TauScalar({0: as_fraction(m)}) for m in charges]
    return FormalSeries(vals, len(vals) - 1 if order is None else order, zero=TauScalar())


def morita_equivalent(b: FormalSeries, b_prime: FormalSeries) -> bool:
    """Relative class of the two magnetic products is 2 pi i-integral iff (B - B')/2pi is."""
    return dirac_check(b - b_prime).integral


@dataclass(frozen=True)
class CharClass:
    """[omega]/(i lambda) + sum_r lambda^r c_r, coordinates along [dx^dy]."""

    symplectic: Fraction
    coords: tuple

    @classmethod
    def zero(cls, order: int, symplectic=1) -> "CharClass":
        return cls(as_fraction(symplectic), (TauScalar(),) * (order + 1))

    def to_json(self) -> dict:
        return {"head": str(self.symplectic), "coords": [str(c) for c in self.coords]}


def picard_action(cls: CharClass, m) -> CharClass:
    """Phi_L: add tau * c_1(L) to the lambda^0 coordinate."""
    m = as_fraction(m)
    c = list(cls.coords)
    c[0] = c[0] + TauScalar.tau(1, m)
    return CharClass(cls.symplectic, tuple(c))
