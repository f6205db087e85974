"""Test report records and their JSON / table renderings."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item"):
        return _clean(v.item())
    return v


@dataclass
class TestReport:
    """Outcome of one check: ``passed`` iff ``statistic <= bound``.

    For two-sided closeness checks ``statistic`` is the absolute error and
    ``bound`` the tolerance; for goodness-of-fit tests they are the test
    statistic and its critical value.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: float
    bound: float
    n_samples: int = 0
    passed: bool = field(default=False)
    details: dict = field(default_factory=dict)
    skipped: bool = False

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.bound = float(self.bound)
        if not self.skipped:
            self.passed = bool(self.statistic <= self.bound)

    @classmethod
    def skip(cls, name: str, note: str) -> "TestReport":
        return cls(name, math.nan, math.nan, 0, True, {"note": note}, skipped=True)

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return (f"[{status}] {self.name}: statistic={self.statistic:.6g} "
                f"bound={self.bound:.6g} n={self.n_samples}")


def combine(name: str, parts: list[TestReport], **details) -> TestReport:
    """Aggregate sub-checks: passes iff every non-skipped part passes.

    The statistic is the worst ratio ``statistic / bound`` and the bound 1.
    """
    live = [p for p in parts if not p.skipped]
    ratio = max((p.statistic / p.bound if p.bound > 0 else
                 (0.0 if p.statistic <= p.bound else math.inf)) for p in live) if live else 0.0
    rep = TestReport(name, ratio, 1.0, sum(p.n_samples for p in live),
                     details={"parts": [p.to_dict() for p in parts], **details})
    rep.passed = all(p.passed for p in live)
    return rep


def reports_to_json(reports: Iterable[TestReport], indent: int | None = 2) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=indent, sort_keys=False)


def format_table(reports: Iterable[TestReport]) -> str:
    rows = [("status", "name", "statistic", "bound", "n")]
    for r in reports:
        status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
        rows.append((status, r.name, f"{r.statistic:.4g}", f"{r.bound:.4g}", str(r.n_samples)))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows)
