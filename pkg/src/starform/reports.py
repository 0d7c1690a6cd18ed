"""Uniform pass/fail records shared by the verification routines and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .scalars import FormalSeries


@dataclass
class CheckReport:
    check_id: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def require(self) -> "CheckReport":
        if not self.passed:
            raise CheckFailed(self)
        return self

    def to_json(self) -> dict[str, Any]:
        return {"id": self.check_id, "passed": self.passed, "detail": self.detail,
                "data": _plain(self.data)}


class CheckFailed(AssertionError):
    def __init__(self, report: CheckReport):
        super().__init__(f"{report.check_id}: {report.detail}")
        self.report = report


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


def residual_report(check_id: str, residual: FormalSeries, where: str = "") -> CheckReport:
    """Pass iff ``residual`` vanishes; otherwise record its lowest lambda-order."""
    low = residual.lowest_order()
    if low is None:
        return CheckReport(check_id, True, f"exact to order {residual.order}{where}")
    return CheckReport(check_id, False, f"residual at lambda^{low}{where}",
                       {"order": low, "witness": str(residual.coeffs[low])})


def merge(check_id: str, parts: list[CheckReport]) -> CheckReport:
    bad = [p for p in parts if not p.passed]
    if not bad:
        return CheckReport(check_id, True, f"{len(parts)} cases exact")
    first = bad[0]
    return CheckReport(check_id, False, f"{len(bad)}/{len(parts)} cases failed; first: {first.detail}",
                       dict(first.data, first=first.check_id))
