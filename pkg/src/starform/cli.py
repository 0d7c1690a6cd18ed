"""Command-line front end.

    starform assoc            randomized product axioms
    starform relative-class   Cech class of the magnetic vs free product
    starform dirac            integrality of the magnetic charge
    starform reps             representations, Rieffel induction, intertwiner

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from .cech import (SCHEMA_VERSION, curvature_series, dirac_check, magnetic_spec, plain_spec,
                   relative_class)
from .cover import monopole_bundle
from .reports import CheckReport, residual_report
from .sampling import random_series, random_wave_series, real_symbol
from .scalars import IMAG as _I, FormalSeries, TruncationContext
from .starprod import StarProductSpec, lift, poisson_bracket, series_conj, star
from .symbols import Symbol, sym_mul

ORDER_ENV = "STARFORM_ORDER"


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    order: int
    dim: int
    kappa: Fraction
    charge: Fraction
    seed: int
    samples: int
    json: bool

    def to_json(self) -> dict:
        d = asdict(self)
        d["kappa"] = str(self.kappa)
        d["charge"] = str(self.charge)
        d.pop("json")
        return d


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


# ---------------------------------------------------------------------------
# commands


def _products(cfg: RunConfig) -> list[tuple[str, StarProductSpec]]:
    ctx = TruncationContext(cfg.order, cfg.dim)
    out = [("standard", StarProductSpec(Fraction(0), ctx)),
           ("weyl", StarProductSpec(Fraction(1, 2), ctx)),
           ("kappa_1/3", StarProductSpec(Fraction(1, 3), ctx))]
    if cfg.kappa not in (0, Fraction(1, 2), Fraction(1, 3)):
        out.append((f"kappa_{cfg.kappa}", StarProductSpec(cfg.kappa, ctx)))
    if cfg.dim == 2 and cfg.charge.denominator == 1:
        out.append(("magnetic_weyl", StarProductSpec(Fraction(1, 2), ctx, monopole_bundle(cfg.charge))))
    return out


def cmd_assoc(cfg: RunConfig, star_fn=star) -> list[CheckReport]:
    rng = random.Random(cfg.seed)
    checks = []
    for name, spec in _products(cfg):
        one = lift(Symbol.const(cfg.dim, 1), spec)
        assoc, unit, semi, herm = [], [], [], []
        for i in range(cfg.samples):
            f, g, h = (random_series(rng, cfg.dim, cfg.order) for _ in range(3))
            res = star_fn(star_fn(f, g, spec), h, spec) - star_fn(f, star_fn(g, h, spec), spec)
            assoc.append(residual_report(f"{name}#{i}", res))
            unit.append(residual_report(f"{name}#{i}", (star_fn(one, f, spec) - f) + (star_fn(f, one, spec) - f)))
            if spec.magnetic is None:
                semi.append(_semiclassical(f, g, spec, star_fn, f"{name}#{i}"))
                if name == "weyl":
                    lhs = series_conj(star_fn(f, g, spec))
                    rhs = star_fn(series_conj(g), series_conj(f), spec)
                    herm.append(residual_report(f"{name}#{i}", lhs - rhs))
        checks.append(_merge(f"assoc.{name}", assoc))
        checks.append(_merge(f"unit.{name}", unit))
        if semi:
            checks.append(_merge(f"semiclassical.{name}", semi))
        if herm:
            checks.append(_merge(f"hermitian.{name}", herm))
    if cfg.order >= 1:
        checks.append(_standard_not_hermitian(cfg, star_fn))
    return checks


def _semiclassical(f, g, spec, star_fn, cid) -> CheckReport:
    fg, gf = star_fn(f, g, spec), star_fn(g, f, spec)
    f0, g0 = f.coeffs[0], g.coeffs[0]
    if fg.coeffs[0] != sym_mul(f0, g0):
        return CheckReport(cid, False, "lambda^0 is not the pointwise product")
    if spec.order >= 1:
        # lambda^1 of the commutator also contains f0 g1 - g1 f0 = 0 terms; compare the bracket part
        c1 = fg.coeffs[1] - gf.coeffs[1]
        want = poisson_bracket(f0, g0).scale(_I)
        if c1 != want:
            return CheckReport(cid, False, "antisymmetrized lambda^1 differs from i{f,g}", {"witness": str(c1 - want)})
    return CheckReport(cid, True, "ok")


def _standard_not_hermitian(cfg: RunConfig, star_fn) -> CheckReport:
    """Expected failure: the standard product is not Hermitian (witness q, p)."""
    spec = StarProductSpec(Fraction(0), TruncationContext(cfg.order, cfg.dim))
    q, p = lift(Symbol.q(cfg.dim, 0), spec), lift(Symbol.p(cfg.dim, 0), spec)
    res = series_conj(star_fn(q, p, spec)) - star_fn(series_conj(p), series_conj(q), spec)
    low = res.lowest_order()
    return CheckReport("hermitian.standard_witness", low is not None,
                       "expected failure observed" if low is not None else "standard product unexpectedly Hermitian",
                       {"order": low})


def _merge(cid: str, parts: list[CheckReport]) -> CheckReport:
    bad = [p for p in parts if not p.passed]
    if not bad:
        return CheckReport(cid, True, f"{len(parts)} samples exact")
    return CheckReport(cid, False, f"{len(bad)}/{len(parts)} failed; first {bad[0].check_id}: {bad[0].detail}",
                       dict(bad[0].data))


def cmd_relative_class(cfg: RunConfig) -> tuple[list[CheckReport], dict]:
    if cfg.dim != 2:
        raise UsageError("relative-class needs --dim 2")
    if cfg.order < 2:
        raise UsageError("class computations need --order >= 2")
    if cfg.charge.denominator != 1:
        raise UsageError("a line bundle needs an integer charge; use the dirac command for fractional charges")
    bundle = monopole_bundle(cfg.charge)
    res = relative_class(bundle, plain_spec(cfg.kappa, cfg.order), magnetic_spec(bundle, cfg.kappa, cfg.order))
    checks = [CheckReport(f"pipeline.{c.check_id}", c.passed, c.detail) for c in res.checks]
    ok = res.coordinate == cfg.charge
    checks.append(CheckReport("class.equals_charge", ok, f"class {res.coordinate}, charge {cfg.charge}"))
    return checks, {"class": str(res.coordinate), "integral": res.integral, "cocycle": res.to_json()}


def cmd_dirac(cfg: RunConfig) -> tuple[list[CheckReport], dict]:
    res = dirac_check(curvature_series([cfg.charge]))
    verdict = {"charge": str(res.charge), "integral": res.integral, "morita_equivalent": res.integral}
    checks = [CheckReport("dirac.charge_roundtrip", res.charge == cfg.charge, f"charge {res.charge}")]
    return checks, verdict


def cmd_reps(cfg: RunConfig) -> tuple[list[CheckReport], dict]:
    from .reps import (ElementaryTensor, SectionCoefficients, adjoint_check, balancing_check,
                       eta_representation_check, eta_weyl, induction_positivity, intertwiner_check,
                       isometry_check, representation_check, rieffel_U)

    if cfg.dim != 2:
        raise UsageError("reps needs --dim 2 (the bundle lives on the 2-torus)")
    if cfg.charge.denominator != 1:
        raise UsageError("reps needs an integer charge")
    rng = random.Random(cfg.seed)
    n, order = cfg.dim, cfg.order
    ctx = TruncationContext(order, n)
    checks = []
    notes = {}
    for kappa in (Fraction(0), Fraction(1, 2)):
        spec = StarProductSpec(kappa, ctx)
        parts = []
        for i in range(cfg.samples):
            f, g = random_series(rng, n, order), random_series(rng, n, order)
            u = random_wave_series(rng, n, order)
            parts.append(representation_check(f, g, u, spec))
        checks.append(_merge(f"rep_property.kappa_{kappa}", parts))
    weyl = StarProductSpec(Fraction(1, 2), ctx)
    adj = [adjoint_check(random_series(rng, n, order), random_wave_series(rng, n, order),
                         random_wave_series(rng, n, order), weyl) for _ in range(cfg.samples)]
    checks.append(_merge("adjoint.weyl", adj))
    std = StarProductSpec(Fraction(0), ctx)
    e1 = Symbol.fourier(n, (1,) + (0,) * (n - 1))
    witness = adjoint_check(lift(sym_mul(Symbol.p(n, 0), e1), std), lift(Symbol.const(n, 1), std), lift(e1, std), std)
    checks.append(CheckReport("adjoint.standard_witness", not witness.passed,
                              "expected failure observed" if not witness.passed else "unexpected pass",
                              witness.data))
    bundle = monopole_bundle(cfg.charge)
    base = 4
    f = FormalSeries([real_symbol(rng, n, max_pdeg=1)] + [Symbol.zero(n)] * order, order)
    g = random_series(rng, n, order, lambda_terms=1, max_pdeg=1)
    sigma = SectionCoefficients.from_patch(random_wave_series(rng, n, order), base, bundle)
    checks.append(eta_weyl(f, sigma).consistency_report("eta.globality"))
    checks.append(eta_representation_check(f, g, sigma, base))
    s = SectionCoefficients.from_patch(random_series(rng, n, order, max_pdeg=1), base, bundle)
    t = SectionCoefficients.from_patch(random_series(rng, n, order, max_pdeg=1), base, bundle)
    u, v = random_wave_series(rng, n, order), random_wave_series(rng, n, order)
    checks.append(rieffel_U(ElementaryTensor(s, u)).consistency_report("rieffel.globality"))
    checks.append(balancing_check(s, g, u))
    checks.append(isometry_check(ElementaryTensor(s, u), ElementaryTensor(t, v), base))
    checks.append(intertwiner_check(f, ElementaryTensor(s, u)))
    checks.append(induction_positivity([ElementaryTensor(s, u), ElementaryTensor(t, v)], base))
    if cfg.charge == 0:
        notes["note"] = "charge 0: eta_W reduces to the Schroedinger representation"
    return checks, notes


# ---------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    env_order = os.environ.get(ORDER_ENV)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=None, help=f"truncation order N (env {ORDER_ENV})")
    common.add_argument("--dim", type=int, default=None, help="torus dimension n (1 or 2)")
    common.add_argument("--kappa", type=_rational, default=Fraction(1, 2), help='ordering parameter, e.g. "1/3"')
    common.add_argument("--charge", type=_rational, default=Fraction(1), help="magnetic charge m")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=None, help="random cases per check")
    common.add_argument("--json", action="store_true", help="machine-readable report")
    p = argparse.ArgumentParser(prog="starform", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("assoc", "relative-class", "dirac", "reps"):
        sub.add_parser(name, parents=[common])
    p.set_defaults(env_order=env_order)
    return p


DEFAULTS = {
    "assoc": {"order": 3, "dim": 1, "samples": 5},
    "relative-class": {"order": 2, "dim": 2, "samples": 0},
    "dirac": {"order": 0, "dim": 2, "samples": 0},
    "reps": {"order": 3, "dim": 2, "samples": 3},
}


def make_config(args) -> RunConfig:
    d = DEFAULTS[args.command]
    order = args.order
    if order is None and args.env_order is not None:
        try:
            order = int(args.env_order)
        except ValueError:
            raise UsageError(f"{ORDER_ENV} must be an integer") from None
    order = d["order"] if order is None else order
    dim = d["dim"] if args.dim is None else args.dim
    samples = d["samples"] if args.samples is None else args.samples
    if order < 0:
        raise UsageError("--order must be non-negative")
    if dim not in (1, 2):
        raise UsageError("--dim must be 1 or 2")
    if samples < 0:
        raise UsageError("--samples must be non-negative")
    return RunConfig(args.command, order, dim, args.kappa, args.charge, args.seed, samples, args.json)


def run(cfg: RunConfig) -> dict:
    extra = {}
    if cfg.command == "assoc":
        checks = cmd_assoc(cfg)
    elif cfg.command == "relative-class":
        checks, extra = cmd_relative_class(cfg)
    elif cfg.command == "dirac":
        checks, extra = cmd_dirac(cfg)
    else:
        checks, extra = cmd_reps(cfg)
    checks = sorted(checks, key=lambda c: c.check_id)
    return {"schema": SCHEMA_VERSION, "command": cfg.command, "config": cfg.to_json(),
            "passed": all(c.passed for c in checks), "checks": [c.to_json() for c in checks],
            "result": extra}


def render_text(report: dict) -> str:
    lines = [f"starform {report['command']}  " + " ".join(f"{k}={v}" for k, v in report["config"].items()
                                                          if k != "command")]
    for c in report["checks"]:
        lines.append(f"  [{'PASS' if c['passed'] else 'FAIL'}] {c['id']}: {c['detail']}")
    for k, v in report["result"].items():
        if k != "cocycle":
            lines.append(f"  {k}: {v}")
    lines.append("PASS" if report["passed"] else "FAIL")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = make_config(args)
        report = run(cfg)
    except UsageError as exc:
        print(f"starform: error: {exc}", file=sys.stderr)
        return 2
    if cfg.json:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print(render_text(report))
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
