"""Deformed Hermitian fibre metrics and the Hermitian square root of a frame metric.

Sections of the deformed bundle are stored in the standard-ordered picture;
``hat`` moves a local coefficient to the Weyl picture, where the metric is
h(s, s') = sum_i conj(s_i^) *_W s'_i^.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .cover import LineBundleData
from .reports import CheckReport, merge, residual_report
from .scalars import FormalSeries, TauScalar, evaluate_numeric
from .starprod import (StarProductSpec, apply_N, fiber_translation_op, lift, series_conj,
                       star, star_kappa, star_standard)
from .symbols import MatrixSymbol, Symbol

WEYL = Fraction(1, 2)


class NotWeyl(ValueError):
    pass


class NotHermitian(ValueError):
    pass


def _require_weyl(spec: StarProductSpec):
    if spec.kappa != WEYL:
        raise NotWeyl(f"Hermitian structures are built for the Weyl product, got kappa={spec.kappa}")


def hat(s: FormalSeries) -> FormalSeries:
    """Standard-picture coefficient -> Weyl picture: N^{-1} s."""
    return apply_N(s, WEYL, inverse=True)


def unhat(s: FormalSeries) -> FormalSeries:
    return apply_N(s, WEYL)


def right_action(s: FormalSeries, f: FormalSeries) -> FormalSeries:
    """(s . f) = s *_S N f in the standard picture."""
    return star_standard(s, apply_N(f, WEYL))


def metric_eval(s: Sequence[FormalSeries], s_prime: Sequence[FormalSeries], spec: StarProductSpec) -> FormalSeries:
    """h(s, s') on one patch; ``s`` and ``s_prime`` are k-component coefficient vectors."""
    _require_weyl(spec)
    plain = spec.plain()
    if isinstance(s, FormalSeries):
        s, s_prime = [s], [s_prime]
    acc = None
    for a, b in zip(s, s_prime):
        term = star_kappa(series_conj(hat(a)), hat(b), plain)
        acc = term if acc is None else acc + term
    return acc


def metric_globality(bundle: LineBundleData, s_alpha: FormalSeries, a: int, b: int,
                     spec: StarProductSpec) -> CheckReport:
    """h computed from chart a data equals h computed from s_b = phi_ba s_a."""
    cov = bundle.cover
    phi_ba = lift(bundle.transition(b, a), spec)
    s_b = star_standard(phi_ba, s_alpha).map(lambda x: cov.to_chart(x, a, b))
    ha = metric_eval([s_alpha], [s_alpha], spec)
    hb = metric_eval([s_b], [s_b], spec).map(lambda x: cov.to_chart(x, b, a))
    return residual_report(f"metric_globality{(a, b)}", ha - hb)


def unitary_cocycle_check(bundle: LineBundleData, spec: StarProductSpec, transitions=None) -> CheckReport:
    """conj(phi_ab) *_W phi_ab = 1 on every overlap."""
    _require_weyl(spec)
    plain = spec.plain()
    one = lift(Symbol.const(spec.dim, 1), plain)
    parts = []
    for a, b in bundle.cover.offsets:
        phi = transitions[(a, b)] if transitions else lift(bundle.transition(a, b), plain)
        parts.append(residual_report(f"unitary{(a, b)}", star_kappa(series_conj(phi), phi, plain) - one))
    return merge("unitary_cocycle", parts)


# ---------------------------------------------------------------------------
# matrix-valued series


def _entry(m: FormalSeries, i: int, j: int) -> FormalSeries:
    return m.map(lambda x: x[i, j])


def matrix_star(a: FormalSeries, b: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """(A * B)_ij = sum_l A_il * B_lj for series of MatrixSymbol."""
    k = a.coeffs[0].size
    n = min(a.order, b.order)
    cells = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            acc = None
            for l in range(k):
                t = star(_entry(a, i, l), _entry(b, l, j), spec)
                acc = t if acc is None else acc + t
            cells[i][j] = acc
    return FormalSeries([MatrixSymbol([[cells[i][j].coeffs[r] for j in range(k)] for i in range(k)])
                         for r in range(n + 1)], n)


def matrix_adjoint(m: FormalSeries) -> FormalSeries:
    return m.map(lambda x: x.adjoint())


def matrix_identity(k: int, spec: StarProductSpec) -> FormalSeries:
    return FormalSeries.constant(MatrixSymbol.identity(k, spec.dim), spec.order)


def matrix_from_scalar(h: FormalSeries) -> FormalSeries:
    return h.map(lambda x: MatrixSymbol([[x]]))


def hermitian_sqrt(h: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """U = id + sum lambda^r U_r with U* * U = H and every U_r Hermitian.

    At order r the equation fixes U_r + U_r*; the anti-Hermitian part is set to zero.
    """
    _require_weyl(spec)
    if isinstance(h.coeffs[0], Symbol):
        h = matrix_from_scalar(h)
    k = h.coeffs[0].size
    if h.coeffs[0] != MatrixSymbol.identity(k, spec.dim):
        raise NotHermitian("lambda^0 part of the frame metric must be the identity")
    if matrix_adjoint(h) != h:
        raise NotHermitian("frame metric is not Hermitian")
    n = h.order
    zero = MatrixSymbol.zeros(k, spec.dim)
    coeffs = [MatrixSymbol.identity(k, spec.dim)] + [zero] * n
    half = TauScalar({0: Fraction(1, 2)})
    for r in range(1, n + 1):
        u = FormalSeries(coeffs, n)
        partial = matrix_star(matrix_adjoint(u), u, spec).coeffs[r]
        coeffs[r] = (h.coeffs[r] - partial).map(lambda x: x.scale(half))
    return FormalSeries(coeffs, n)


def matrix_star_inverse(u: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """Inverse of U = id + O(lambda): sum_k (id - U)^k."""
    k = u.coeffs[0].size
    one = matrix_identity(k, spec).truncate(u.order)
    x = one - u
    acc, term = one, one
    for _ in range(u.order):
        term = matrix_star(term, x, spec)
        acc = acc + term
    return acc


def orthonormalize_frame(h: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """V = U^{-1}: the frame change making the metric the identity (V* H V = id)."""
    return matrix_star_inverse(hermitian_sqrt(h, spec), spec)


def sqrt_residual(h: FormalSeries, u: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    if isinstance(h.coeffs[0], Symbol):
        h = matrix_from_scalar(h)
    return matrix_star(matrix_adjoint(u), u, spec) - h


# ---------------------------------------------------------------------------
# Theta operators and positivity


def theta_compatibility_check(s: FormalSeries, t: FormalSeries, z: FormalSeries, bundle: LineBundleData,
                              spec: StarProductSpec, patch: int = 0) -> CheckReport:
    """Theta_{s,t} z = s . h(t, z) with Theta_{s,t} = S^{-1}(s^ * conj(t^)) acting by rho."""
    _require_weyl(spec)
    plain = spec.plain()
    a = bundle.potential(patch)
    s_op = fiber_translation_op(a, plain)
    s_inv = fiber_translation_op(a, plain, inverse=True)
    theta = s_inv.apply(star_kappa(hat(s), series_conj(hat(t)), plain))
    lhs = unhat(star_kappa(s_op.apply(theta), hat(z), plain))
    rhs = right_action(s, metric_eval([t], [z], spec))
    return residual_report("theta_compatibility", lhs - rhs)


def theta(s: FormalSeries, t: FormalSeries, bundle: LineBundleData, spec: StarProductSpec,
          patch: int = 0) -> FormalSeries:
    plain = spec.plain()
    s_inv = fiber_translation_op(bundle.potential(patch), plain, inverse=True)
    return s_inv.apply(star_kappa(hat(s), series_conj(hat(t)), plain))


def vacuum_expectation(f: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """omega(f) = <1, rho_W(f) 1>: a positive functional of the Weyl algebra."""
    from .reps import l2_inner, rho_kappa

    one = lift(Symbol.const(spec.dim, 1), f.order)
    return l2_inner(one, rho_kappa(f, one, spec.plain()))


def lowest_numeric(values: FormalSeries, precision: int = 30):
    """(order, complex value) of the lowest nonvanishing coefficient, or (None, 0)."""
    for r, c in enumerate(values.coeffs):
        if not c.is_zero():
            return r, evaluate_numeric(c, precision)
    return None, 0j


def positivity_check(s: Sequence[FormalSeries], spec: StarProductSpec) -> CheckReport:
    """omega(h(s, s)) has a positive lowest coefficient (numerically, tau = 2 pi i)."""
    val = vacuum_expectation(metric_eval(s, s, spec), spec)
    r, x = lowest_numeric(val)
    if r is None:
        return CheckReport("positivity", True, "h(s,s) has vanishing expectation", {"order": None})
    ok = abs(x.imag) < 1e-20 and x.real > 0
    return CheckReport("positivity", ok, f"lowest order {r}: {x.real:.12g}", {"order": r})
