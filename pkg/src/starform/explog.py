"""Star exponentials, star logarithms and BCH composition.

Exp(tH) solves d/dt f = H * f with f(0) = 1.  For a head H_0 = tau(n.q + z)
write f(t) = e^{t H_0} P(t): every right-hand q-derivative of e^{tH_0} P
becomes (d_q + t tau n) P, so P is a polynomial in t whose lambda-coefficients
follow by integrating a recursion.  Evaluating at t then multiplies by
e^{t H_0} = e_{tn}, using e^{tau tz} = 1 (this is the only place where that
rule is applied besides the integrality checks of the cech module).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .scalars import ONE, FormalSeries, TauScalar, as_fraction
from .starprod import StarProductSpec, fiber_translation_op, kappa_weights
from .symbols import Symbol, partial_multi, partial_q, sym_mul


class NotExponentiable(ValueError):
    """The classical head is not of the form tau(n.q + z)."""


@dataclass(frozen=True)
class ExponentiableHead:
    freq: tuple
    winding: int

    @classmethod
    def parse(cls, h0: Symbol) -> "ExponentiableHead":
        n = h0.dim
        freq = [0] * n
        wind = 0
        for (k, beta, alpha), c in h0.terms.items():
            if any(k) or any(alpha) or sum(beta) > 1 or set(c.coeffs) != {1}:
                raise NotExponentiable(f"head term {c} at {(k, beta, alpha)} is not tau*(integer affine)")
            g = c.coeff(1)
            if g.im or g.re.denominator != 1:
                raise NotExponentiable(f"head coefficient {c} is not an integer multiple of tau")
            if sum(beta) == 0:
                wind = int(g.re)
            else:
                freq[beta.index(1)] = int(g.re)
        return cls(tuple(freq), wind)

    def symbol(self, dim: int) -> Symbol:
        out = Symbol.const(dim, TauScalar.tau(1, self.winding))
        for i, k in enumerate(self.freq):
            if k:
                out = out + Symbol.q(dim, i).scale(TauScalar.tau(1, k))
        return out

    def scaled(self, t: Fraction) -> "ExponentiableHead":
        f = [t * k for k in self.freq]
        z = t * self.winding
        if any(x.denominator != 1 for x in f) or z.denominator != 1:
            raise NotExponentiable(f"{t} times head {self} leaves the integer lattice")
        return ExponentiableHead(tuple(int(x) for x in f), int(z))

    def exp(self, dim: int) -> Symbol:
        return Symbol.fourier(dim, self.freq)


# ---------------------------------------------------------------------------
# polynomials in t with symbol coefficients: {power: Symbol}


def _tp_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for j, s in b.items():
        v = out[j] + s if j in out else s
        if v.is_zero():
            out.pop(j, None)
        else:
            out[j] = v
    return out


def _tp_scale(a: dict, c) -> dict:
    out = {}
    for j, s in a.items():
        v = s.scale(c)
        if not v.is_zero():
            out[j] = v
    return out


class _TwistedDerivs:
    """Memoized (d_q + t tau n)^mu d_p^nu of a t-polynomial."""

    def __init__(self, tp: dict, freq: tuple):
        self.tp = tp
        self.freq = freq
        self.cache = {}

    def _dq(self, tp: dict, i: int) -> dict:
        out = {}
        for j, s in tp.items():
            d = partial_q(s, i)
            if not d.is_zero():
                out = _tp_add(out, {j: d})
        if self.freq[i]:
            out = _tp_add(out, _tp_scale({j + 1: s for j, s in tp.items()}, TauScalar.tau(1, self.freq[i])))
        return out

    def get(self, mu: tuple, nu: tuple) -> dict:
        key = (mu, nu)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if not any(mu):
            res = {}
            for j, s in self.tp.items():
                d = partial_multi(s, (), nu)
                if not d.is_zero():
                    res[j] = d
        else:
            i = next(k for k, m in enumerate(mu) if m)
            lower = mu[:i] + (mu[i] - 1,) + mu[i + 1:]
            res = self._dq(self.get(lower, nu), i)
        self.cache[key] = res
        return res


def _twisted_terms(h: Symbol, tw: _TwistedDerivs, kappa: Fraction, cmin: int, cmax: int) -> list:
    """[(c, t-poly)] with e^{-tH0} C_c(h, e^{tH0} P)."""
    out = [{} for _ in range(cmax + 1)]
    hcache = {}
    for c, mu, nu, w in kappa_weights(kappa, h.dim, cmax):
        if c < cmin:
            continue
        key = (nu, mu)
        dh = hcache.get(key)
        if dh is None:
            dh = partial_multi(h, nu, mu)
            hcache[key] = dh
        if dh.is_zero():
            continue
        dp = tw.get(mu, nu)
        if not dp:
            continue
        prod = {j: sym_mul(dh, s).scale(w) for j, s in dp.items()}
        out[c] = _tp_add(out[c], prod)
    return out


def _exp_tpoly(h: FormalSeries, head: ExponentiableHead, kappa: Fraction) -> list:
    """P_0..P_N as t-polynomials with Exp(tH) = e^{tH_0} P(t)."""
    n = h.order
    dim = h.coeffs[0].dim
    h0 = head.symbol(dim)
    ps = [{0: Symbol.const(dim, 1)}]
    tws = []
    for r in range(1, n + 1):
        tws.append(_TwistedDerivs(ps[-1], head.freq))
        rhs: dict = {}
        for b in range(r):
            tw = tws[b]
            for a in range(r - b + 1):
                c = r - a - b
                ha = h0 if a == 0 else h.coeffs[a]
                if ha.is_zero():
                    continue
                # the (a, c) = (0, 0) term is e^{tH0}-derivative of P_r itself; cancelled
                terms = _twisted_terms(ha, tw, kappa, c, c)
                rhs = _tp_add(rhs, terms[c])
        # integrate from 0 to t
        ps.append({j + 1: s.scale(TauScalar({0: Fraction(1, j + 1)})) for j, s in rhs.items()})
    return ps


def _eval_tpoly(tp: dict, t: Fraction, dim: int) -> Symbol:
    acc = Symbol.zero(dim)
    for j, s in tp.items():
        acc = acc + s.scale(TauScalar({0: t ** j}))
    return acc


def _head_of(h: FormalSeries) -> ExponentiableHead:
    h0 = h.coeffs[0]
    if h0.is_zero():
        return ExponentiableHead((0,) * h0.dim, 0)
    return ExponentiableHead.parse(h0)


def _to_plain(h: FormalSeries, spec: StarProductSpec, inverse: bool = False) -> FormalSeries:
    a = spec.magnetic.potential(spec.patch)
    return fiber_translation_op(a, spec.plain(), inverse=inverse).apply(h)


def star_exp(h: FormalSeries, spec: StarProductSpec, t=1) -> FormalSeries:
    """Exp(tH) for the product of ``spec``."""
    spec.check_series(h)
    t = as_fraction(t)
    if spec.magnetic is not None:
        # S is an isomorphism from the magnetic to the plain product in this chart
        return _to_plain(star_exp(_to_plain(h, spec), spec.plain(), t), spec, inverse=True)
    head = _head_of(h)
    top = head.scaled(t)
    ps = _exp_tpoly(h, head, spec.kappa)
    e = top.exp(h.coeffs[0].dim)
    return FormalSeries([sym_mul(e, _eval_tpoly(p, t, e.dim)) for p in ps], h.order)


def exp_ode_residual(h: FormalSeries, spec: StarProductSpec, t=1) -> list:
    """Substitute the t-polynomial solution into d/dt f = H * f; returns the residual t-polynomials."""
    from .starprod import star

    if spec.magnetic is not None:
        raise NotImplementedError
    head = _head_of(h)
    ps = _exp_tpoly(h, head, spec.kappa)
    dim = h.coeffs[0].dim
    # check at several rational sample times: f(t) = e_{tn} P(t), f'(t) = e_{tn}(H0 P + P')
    out = []
    for tt in (Fraction(0), Fraction(1), Fraction(2), Fraction(-1)):
        try:
            top = head.scaled(tt)
        except NotExponentiable:
            continue
        e = top.exp(dim)
        f = FormalSeries([sym_mul(e, _eval_tpoly(p, tt, dim)) for p in ps], h.order)
        deriv = []
        for p in ps:
            dp = {j - 1: s.scale(TauScalar({0: j})) for j, s in p.items() if j}
            val = _eval_tpoly(dp, tt, dim) + sym_mul(head.symbol(dim), _eval_tpoly(p, tt, dim))
            deriv.append(sym_mul(e, val))
        res = FormalSeries(deriv, h.order) - star(h, f, spec)
        out.append(res)
    return out


def star_log(f: FormalSeries, spec: StarProductSpec, branch: int = 0) -> FormalSeries:
    """Ln(f) with classical head tau(n.q + branch) where f_0 = e_n."""
    spec.check_series(f)
    if spec.magnetic is not None:
        return _to_plain(star_log(_to_plain(f, spec), spec.plain(), branch), spec, inverse=True)
    f0 = f.coeffs[0]
    dim = f0.dim
    terms = f0.terms
    if len(terms) != 1:
        raise NotExponentiable("Ln needs a leading term e_n")
    (k, beta, alpha), c = next(iter(terms.items()))
    if any(beta) or any(alpha) or c != ONE:
        raise NotExponentiable("Ln needs a leading term with unit coefficient e_n")
    head = ExponentiableHead(tuple(k), int(branch))
    inv = Symbol.fourier(dim, tuple(-x for x in k))
    coeffs = [head.symbol(dim)] + [Symbol.zero(dim)] * f.order
    for r in range(1, f.order + 1):
        trial = FormalSeries(coeffs, f.order)
        partial = _eval_tpoly(_exp_tpoly(trial.truncate(r), head, spec.kappa)[r], Fraction(1), dim)
        coeffs[r] = sym_mul(inv, f.coeffs[r]) - partial
    return FormalSeries(coeffs, f.order)


def bch_compose(a: FormalSeries, b: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """a o b = Ln(Exp(a) * Exp(b)) on the branch where the heads add."""
    from .starprod import star

    ha, hb = _head_of(a), _head_of(b)
    prod = star(star_exp(a, spec), star_exp(b, spec), spec)
    return star_log(prod, spec, ha.winding + hb.winding)


def bch_compose_many(items, spec: StarProductSpec) -> FormalSeries:
    out = items[0]
    for x in items[1:]:
        out = bch_compose(out, x, spec)
    return out


# ---------------------------------------------------------------------------
# Dynkin's series


def _compositions(total: int, parts: int):
    """Ordered (r_1, s_1, ..., r_k, s_k) with each r_i + s_i >= 1 and sum = total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for r in range(total + 1):
        for s in range(total + 1 - r):
            if r + s == 0:
                continue
            for rest in _compositions(total - r - s, parts - 1):
                yield (r, s) + rest


def dynkin_coefficients(degree: int) -> dict:
    """{word: rational} such that log(e^X e^Y) = sum coeff * [w1,[w2,...,w_k]] up to ``degree``."""
    out: dict = {}
    for total in range(1, degree + 1):
        for k in range(1, total + 1):
            sign = Fraction((-1) ** (k - 1), k)
            for comp in _compositions(total, k):
                word = []
                denom = 1
                for i in range(k):
                    r, s = comp[2 * i], comp[2 * i + 1]
                    word += ["X"] * r + ["Y"] * s
                    denom *= factorial(r) * factorial(s)
                word = tuple(word)
                # right-nested brackets vanish when the innermost pair repeats a letter
                if len(word) > 1 and word[-1] == word[-2]:
                    continue
                coeff = sign / (total * denom)
                out[word] = out.get(word, 0) + coeff
    return {w: c for w, c in out.items() if c}


def bch_series(a: FormalSeries, b: FormalSeries, spec: StarProductSpec) -> FormalSeries:
    """Dynkin's commutator series, truncated where brackets exceed the lambda-order."""
    from .starprod import commutator

    letters = {"X": a, "Y": b}
    cache: dict = {}

    def nested(word):
        hit = cache.get(word)
        if hit is None:
            if len(word) == 1:
                hit = letters[word[0]]
            else:
                hit = commutator(letters[word[0]], nested(word[1:]), spec)
            cache[word] = hit
        return hit

    out = a.zero_like()
    for word, c in sorted(dynkin_coefficients(a.order + 1).items()):
        term = nested(word)
        if not term.is_zero():
            out = out + term.map(lambda s: s.scale(TauScalar({0: c})))
    return out
