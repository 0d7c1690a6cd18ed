"""Representations on formal wave functions and Rieffel induction to line-bundle sections.

Wave functions are trigonometric polynomials on T^n (chart data may carry
q-polynomials).  A section of L over Q, or of pi^*L over phase space, is
stored as a dict patch -> local coefficient series.  Sections are only
required to be consistent on the overlaps a computation touches: for
nonzero charge no trigonometric polynomial data is consistent everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .cover import LineBundleData
from .hermitian import WEYL, hat, metric_eval, unhat
from .reports import CheckReport, merge, residual_report
from .scalars import IMAG, FormalSeries, TauScalar, evaluate_numeric
from .starprod import (StarProductSpec, _multi_indices, apply_N, fiber_translation_op,
                       series_conj, star_kappa, star_magnetic, star_standard)
from .symbols import Symbol, partial_multi, sym_mul, torus_integral, zero_section_restrict


def _weight(mu) -> TauScalar:
    """(-i)^|mu| / mu!"""
    denom = 1
    for m in mu:
        denom *= factorial(m)
    return (-IMAG) ** sum(mu) * TauScalar({0: Fraction(1, denom)})


def rho_standard(f: FormalSeries, u: FormalSeries) -> FormalSeries:
    """rho_S(f) u = sum_mu (-i lambda)^|mu| / mu! (d_p^mu f)|_{p=0} d_q^mu u."""
    n = min(f.order, u.order)
    dim = f.coeffs[0].dim
    out = [Symbol.zero(dim)] * (n + 1)
    for a in range(n + 1):
        fa = f.coeffs[a]
        if fa.is_zero():
            continue
        for c in range(min(n - a, fa.max_p_degree()) + 1):
            for mu in _multi_indices(dim, c):
                coef = zero_section_restrict(partial_multi(fa, (), mu))
                if coef.is_zero():
                    continue
                w = _weight(mu)
                for b in range(n + 1 - a - c):
                    ub = u.coeffs[b]
                    if ub.is_zero():
                        continue
                    d = partial_multi(ub, mu, ())
                    if not d.is_zero():
                        out[a + b + c] = out[a + b + c] + sym_mul(coef, d).scale(w)
    return FormalSeries(out, n)


def rho_kappa(f: FormalSeries, u: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """rho_k(f) = rho_S(N_k f); kappa = 1/2 is the Schroedinger representation."""
    return rho_standard(apply_N(f, spec.kappa), u)


def rho_weyl(f: FormalSeries, u: FormalSeries) -> FormalSeries:
    return rho_standard(apply_N(f, WEYL), u)


def l2_inner(u: FormalSeries, v: FormalSeries) -> FormalSeries:
    """<u, v> = integral of conj(u) v; antilinear in u, lambda real."""
    n = min(u.order, v.order)
    out = [TauScalar() for _ in range(n + 1)]
    for a in range(n + 1):
        ua = u.coeffs[a]
        if ua.is_zero():
            continue
        cu = ua.conj()
        for b in range(n + 1 - a):
            if not v.coeffs[b].is_zero():
                out[a + b] = out[a + b] + torus_integral(sym_mul(cu, v.coeffs[b]))
    return FormalSeries(out, n, zero=TauScalar())


def adjoint_check(f: FormalSeries, u: FormalSeries, v: FormalSeries, spec: StarProductSpec) -> CheckReport:
    """<rho(f)u, v> = <u, rho(conj f) v> for the kappa-ordered representation."""
    lhs = l2_inner(rho_kappa(f, u, spec), v)
    rhs = l2_inner(u, rho_kappa(series_conj(f), v, spec))
    res = lhs - rhs
    low = res.lowest_order()
    if low is None:
        return CheckReport("adjoint", True, f"exact to order {res.order}")
    return CheckReport("adjoint", False, f"residual at lambda^{low}",
                       {"order": low, "witness": str(res.coeffs[low])})


def representation_check(f: FormalSeries, g: FormalSeries, u: FormalSeries, spec: StarProductSpec) -> CheckReport:
    """rho_k(f *_k g) u = rho_k(f) rho_k(g) u."""
    lhs = rho_kappa(star_kappa(f, g, spec), u, spec)
    rhs = rho_kappa(f, rho_kappa(g, u, spec), spec)
    return residual_report("representation", lhs - rhs)


# ---------------------------------------------------------------------------
# sections


@dataclass(frozen=True, eq=False)
class SectionCoefficients:
    """Local coefficients sigma_a, related by sigma_a = phi_ab sigma_b on overlaps."""

    bundle: LineBundleData
    coeffs: dict
    base: int | None = None

    @classmethod
    def from_patch(cls, sigma: FormalSeries, patch: int, bundle: LineBundleData) -> "SectionCoefficients":
        """Extend chart data on ``patch`` to every patch meeting it."""
        cov = bundle.cover
        out = {patch: sigma}
        for b in cov.patches:
            if b != patch and cov.overlaps(b, patch):
                phi = bundle.transition(b, patch)
                out[b] = sigma.map(lambda x: cov.to_chart(sym_mul(phi, x), patch, b))
        return cls(bundle, out, patch)

    @classmethod
    def from_global(cls, sigma: FormalSeries, bundle: LineBundleData) -> "SectionCoefficients":
        """Periodic data valid in every chart; a genuine section only for the trivial bundle."""
        if bundle.charge != 0:
            raise ValueError("periodic data is a global section only for charge 0")
        return cls(bundle, {a: sigma for a in bundle.cover.patches})

    def patches(self):
        return sorted(self.coeffs)

    def __getitem__(self, a) -> FormalSeries:
        return self.coeffs[a]

    def map_local(self, fn) -> "SectionCoefficients":
        """Apply ``fn(patch, coefficient)`` patch by patch."""
        return SectionCoefficients(self.bundle, {a: fn(a, c) for a, c in self.coeffs.items()}, self.base)

    def _checked_pairs(self):
        cov = self.bundle.cover
        for a in self.patches():
            for b in self.patches():
                if a >= b or not cov.overlaps(a, b):
                    continue
                # away from the base patch the data is not constrained
                if self.base is None or self.base in (a, b) or cov.nonempty((a, b, self.base)):
                    yield a, b

    def consistency_report(self, check_id: str = "globality") -> CheckReport:
        cov = self.bundle.cover
        parts = []
        for a, b in self._checked_pairs():
            phi = self.bundle.transition(a, b)
            moved = self.coeffs[b].map(lambda x: cov.to_chart(x, b, a))
            res = self.coeffs[a] - moved.map(lambda x: sym_mul(phi, x))
            parts.append(residual_report(f"{check_id}{(a, b)}", res))
        return merge(check_id, parts)


@dataclass(frozen=True, eq=False)
class ElementaryTensor:
    s: SectionCoefficients
    u: FormalSeries


def _translation(bundle: LineBundleData, patch: int, order: int, inverse: bool = False):
    spec = StarProductSpec(WEYL, _context(bundle, order))
    return fiber_translation_op(bundle.potential(patch), spec, inverse)


def _context(bundle, order):
    from .scalars import TruncationContext

    return TruncationContext(order, bundle.dim)


def _require_global(f: FormalSeries):
    if not all(c.is_global for c in f.coeffs):
        raise ValueError("expected a global symbol (no q-polynomial terms)")


def eta_weyl(f: FormalSeries, sigma: SectionCoefficients) -> SectionCoefficients:
    """eta_W(f) sigma: locally rho_W(S_a f) sigma_a."""
    _require_global(f)
    bundle = sigma.bundle

    def local(a, s):
        return rho_weyl(_translation(bundle, a, f.order).apply(f), s)

    return sigma.map_local(local)


def magnetic_weyl_product(f: FormalSeries, g: FormalSeries, bundle: LineBundleData, patch: int = 0) -> FormalSeries:
    spec = StarProductSpec(WEYL, _context(bundle, min(f.order, g.order)), bundle, patch)
    return star_magnetic(f, g, patch, spec)


def rieffel_U(t: ElementaryTensor) -> SectionCoefficients:
    """U(s (x) u): locally rho_W(N^{-1} s_a) u."""
    return t.s.map_local(lambda a, s: rho_weyl(hat(s), t.u))


def section_right_action(s: SectionCoefficients, f: FormalSeries) -> SectionCoefficients:
    """(s . f)_a = s_a *_S N f."""
    _require_global(f)
    nf = apply_N(f, WEYL)
    return s.map_local(lambda a, c: star_standard(c, nf))


def section_left_action(f: FormalSeries, s: SectionCoefficients) -> SectionCoefficients:
    """rho(f) s: locally N(S_a f *_W N^{-1} s_a)."""
    _require_global(f)
    bundle = s.bundle
    weyl = StarProductSpec(WEYL, _context(bundle, f.order))

    def local(a, c):
        return unhat(star_kappa(_translation(bundle, a, f.order).apply(f), hat(c), weyl))

    return s.map_local(local)


def _patchwise_report(check_id: str, lhs: SectionCoefficients, rhs: SectionCoefficients) -> CheckReport:
    parts = [residual_report(f"{check_id}[{a}]", lhs[a] - rhs[a]) for a in lhs.patches()]
    return merge(check_id, parts)


def balancing_check(s: SectionCoefficients, f: FormalSeries, u: FormalSeries) -> CheckReport:
    lhs = rieffel_U(ElementaryTensor(section_right_action(s, f), u))
    rhs = rieffel_U(ElementaryTensor(s, rho_weyl(f, u)))
    return _patchwise_report("balancing", lhs, rhs)


def intertwiner_check(f: FormalSeries, t: ElementaryTensor) -> CheckReport:
    """U(rho(f) s (x) u) = eta_W(f) U(s (x) u)."""
    lhs = rieffel_U(ElementaryTensor(section_left_action(f, t.s), t.u))
    rhs = eta_weyl(f, rieffel_U(t))
    return _patchwise_report("intertwiner", lhs, rhs)


def eta_representation_check(f: FormalSeries, g: FormalSeries, sigma: SectionCoefficients,
                             patch: int = 0) -> CheckReport:
    """eta_W(f *' g) = eta_W(f) eta_W(g) for the magnetic Weyl product."""
    fg = magnetic_weyl_product(f, g, sigma.bundle, patch)
    lhs = eta_weyl(fg, sigma)
    rhs = eta_weyl(f, eta_weyl(g, sigma))
    return _patchwise_report("eta_representation", lhs, rhs)


def section_inner(x: SectionCoefficients, y: SectionCoefficients, patch: int) -> FormalSeries:
    """L^2 pairing of two sections using chart ``patch`` data (the integrand is periodic)."""
    return l2_inner(x[patch], y[patch])


def induced_inner(t1: ElementaryTensor, t2: ElementaryTensor, patch: int) -> FormalSeries:
    """<s (x) u, t (x) v> = <u, rho_W(h(s, t)) v>."""
    spec = StarProductSpec(WEYL, _context(t1.s.bundle, t1.u.order))
    h = metric_eval([t1.s[patch]], [t2.s[patch]], spec)
    return l2_inner(t1.u, rho_weyl(h, t2.u))


def isometry_check(t1: ElementaryTensor, t2: ElementaryTensor, patch: int) -> CheckReport:
    lhs = section_inner(rieffel_U(t1), rieffel_U(t2), patch)
    rhs = induced_inner(t1, t2, patch)
    res = lhs - rhs
    low = res.lowest_order()
    if low is None:
        return CheckReport("isometry", True, f"exact to order {res.order}")
    return CheckReport("isometry", False, f"residual at lambda^{low}", {"witness": str(res.coeffs[low])})


def gram_matrix(tensors: list[ElementaryTensor], patch: int) -> list[list[FormalSeries]]:
    return [[induced_inner(a, b, patch) for b in tensors] for a in tensors]


def induction_positivity(tensors: list[ElementaryTensor], patch: int, precision: int = 30) -> CheckReport:
    """Lowest nonvanishing lambda-order of the Gram matrix is numerically positive semidefinite."""
    if not tensors:
        return CheckReport("induction_positivity", True, "empty family")
    gram = gram_matrix(tensors, patch)
    order = gram[0][0].order
    low = None
    for r in range(order + 1):
        if any(not gram[i][j].coeffs[r].is_zero() for i in range(len(tensors)) for j in range(len(tensors))):
            low = r
            break
    if low is None:
        return CheckReport("induction_positivity", True, "Gram matrix vanishes", {"order": None})
    mat = np.array([[complex(evaluate_numeric(g.coeffs[low], precision)) for g in row] for row in gram])
    herm = np.allclose(mat, mat.conj().T, atol=1e-9)
    eig = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
    total = complex(sum(mat.flatten()))
    ok = herm and eig.min() > -1e-9 and total.real > -1e-9
    return CheckReport("induction_positivity", bool(ok),
                       f"lowest order {low}, min eigenvalue {eig.min():.6g}",
                       {"order": low, "eigenvalues": [f"{e:.6g}" for e in eig]})
