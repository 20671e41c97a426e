"""Success tables, the 2x2 chi-square test, and cumulative success curves."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..engine import RunOutcome

ALPHA = 0.05
SUCCESS = RunOutcome.SUCCESS.value


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    p_value: float
    significant: bool


def chi_square_2x2(a_success: int, a_total: int, b_success: int, b_total: int, alpha: float = ALPHA) -> ChiSquare:
    """Pearson chi-square on a success/failure by arm table, 1 df, no continuity correction."""
    if a_total <= 0 or b_total <= 0:
        raise ValueError("totals must be positive")
    if not (0 <= a_success <= a_total and 0 <= b_success <= b_total):
        raise ValueError("successes must lie in [0, total]")
    table = ((a_success, a_total - a_success), (b_success, b_total - b_success))
    n = a_total + b_total
    cols = (a_success + b_success, n - a_success - b_success)
    if 0 in cols:
        return ChiSquare(0.0, 1.0, False)
    rows = (a_total, b_total)
    stat = 0.0
    for i in range(2):
        for j in range(2):
            expected = rows[i] * cols[j] / n
            stat += (table[i][j] - expected) ** 2 / expected
    # survival function of chi-square with one degree of freedom
    p = math.erfc(math.sqrt(stat / 2))
    return ChiSquare(stat, p, p < alpha)


@dataclass(frozen=True)
class ArmCount:
    successes: int
    total: int
    failed_runs: int = 0

    @property
    def rate(self) -> float:
        return self.successes / self.total if self.total else 0.0


class SuccessTable:
    """Per-arm success counts over completed runs (crashed runs are listed apart)."""

    def __init__(self, counts: dict[str, ArmCount]):
        for arm, c in counts.items():
            if c.successes > c.total:
                raise ValueError(f"arm {arm}: successes exceed total")
        self.counts = dict(counts)

    @classmethod
    def from_rows(cls, rows: Iterable[dict]) -> "SuccessTable":
        tally: dict[str, list[int]] = {}
        for r in rows:
            t = tally.setdefault(r["arm"], [0, 0, 0])
            if r.get("status", "ok") != "ok":
                t[2] += 1
                continue
            t[1] += 1
            t[0] += r.get("outcome") == SUCCESS
        return cls({arm: ArmCount(*t) for arm, t in sorted(tally.items())})

    def __getitem__(self, arm: str) -> ArmCount:
        try:
            return self.counts[arm]
        except KeyError:
            raise KeyError(f"no runs for arm {arm!r}; arms: {sorted(self.counts)}") from None

    def compare(self, arm_a: str, arm_b: str, alpha: float = ALPHA) -> ChiSquare:
        a, b = self[arm_a], self[arm_b]
        return chi_square_2x2(a.successes, a.total, b.successes, b.total, alpha)

    def format(self) -> str:
        width = max([len("arm")] + [len(a) for a in self.counts])
        lines = [f"{'arm':<{width}}  successes  total  failed"]
        for arm, c in self.counts.items():
            lines.append(f"{arm:<{width}}  {c.successes:>9}  {c.total:>5}  {c.failed_runs:>6}")
        return "\n".join(lines)


def read_aggregate(path) -> list[dict]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    for r in rows:
        for key in ("seed", "generations", "executions", "executions_at_solution"):
            if r.get(key) not in (None, ""):
                r[key] = int(r[key])
            elif key in r:
                r[key] = None
    return rows


def cumulative_success_curve(rows: Sequence[dict]) -> dict[str, list[tuple[int, int]]]:
    """Step series of (executions, cumulative successes) per arm.

    Each series starts at (0, 0), steps up at every successful run's
    executions-at-solution, and ends at the largest execution count of
    any run in the arm.
    """
    by_arm: dict[str, list[dict]] = {}
    for r in rows:
        by_arm.setdefault(r["arm"], []).append(r)
    curves = {}
    for arm in sorted(by_arm):
        runs = [r for r in by_arm[arm] if r.get("status", "ok") == "ok"]
        hits = sorted(r["executions_at_solution"] for r in runs
                      if r.get("outcome") == SUCCESS and r.get("executions_at_solution") is not None)
        series = [(0, 0)]
        for k, x in enumerate(hits, 1):
            if series[-1][0] == x:
                series[-1] = (x, k)
            else:
                series.append((x, k))
        end = max([r.get("executions") or 0 for r in runs] + [series[-1][0]])
        if end > series[-1][0]:
            series.append((end, len(hits)))
        curves[arm] = series
    return curves


def curves_csv(curves: dict[str, list[tuple[int, int]]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["arm", "executions", "successes"])
    for arm, series in curves.items():
        for x, y in series:
            w.writerow([arm, x, y])
    return buf.getvalue()
