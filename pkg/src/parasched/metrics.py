"""Evaluation metrics: TEI, TFR, PPR and APR, plus table export."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from statistics import fmean

from .scheduler import Plan, both_busy_intervals, parallel_segments


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ExecutionReport:
    """Outcome of executing a plan: one success flag per scheduled step."""

    flags: Mapping[int, bool] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "flags", dict(self.flags))

    @classmethod
    def all_success(cls, nodes: Iterable[int]) -> "ExecutionReport":
        return cls({i: True for i in nodes})

    @classmethod
    def from_counts(cls, scheduled: int, succeeded: int) -> "ExecutionReport":
        if not 0 <= succeeded <= scheduled:
            raise MetricError(f"succeeded ({succeeded}) must lie in [0, {scheduled}]")
        return cls({i: i < succeeded for i in range(scheduled)})

    @property
    def scheduled(self) -> int:
        return len(self.flags)

    @property
    def succeeded(self) -> int:
        return sum(1 for ok in self.flags.values() if ok)


@dataclass(frozen=True)
class MetricSet:
    tei: float
    tfr: float
    ppr: float
    apr: float

    def as_dict(self) -> dict[str, float]:
        return {"TEI": self.tei, "TFR": self.tfr, "PPR": self.ppr, "APR": self.apr}


def tei(report: ExecutionReport, makespan: float) -> float:
    """Successful steps per unit time, scaled by 100."""
    if makespan <= 0:
        raise MetricError("makespan must be positive")
    if report.scheduled == 0:
        raise MetricError("no scheduled steps")
    return 100.0 * report.succeeded / (report.scheduled * makespan)


def tfr(report: ExecutionReport) -> float:
    if report.scheduled == 0:
        raise MetricError("no scheduled steps")
    return 1.0 - report.succeeded / report.scheduled


def ppr_ratio(actual_steps: int, ideal_steps: int) -> float:
    """Executed steps over package steps (1.0 when nothing was merged)."""
    if actual_steps <= 0:
        raise MetricError("actual step count must be positive")
    if actual_steps > ideal_steps:
        raise MetricError(f"actual steps ({actual_steps}) exceed package steps ({ideal_steps})")
    return actual_steps / ideal_steps


def ppr(actual_steps: int, ideal_steps: int) -> float:
    """Fraction of package steps removed by merging."""
    return 1.0 - ppr_ratio(actual_steps, ideal_steps)


def apr_seconds(plan: Plan) -> int:
    """Seconds during which both arms are executing (dual-arm nodes included)."""
    return sum(b - a for a, b in both_busy_intervals(plan))


def apr(plan: Plan) -> float:
    if plan.makespan <= 0:
        raise MetricError("makespan must be positive")
    return apr_seconds(plan) / plan.makespan


def parallel_interval_count(plan: Plan) -> int:
    return len(parallel_segments(plan))


def metric_set(plan: Plan, report: ExecutionReport, actual_steps: int, ideal_steps: int) -> MetricSet:
    return MetricSet(tei(report, plan.makespan), tfr(report), ppr(actual_steps, ideal_steps), apr(plan))


def average(sets: Sequence[MetricSet]) -> MetricSet:
    """Mean of already-normalised per-group metrics."""
    if not sets:
        raise MetricError("nothing to average")
    return MetricSet(*(fmean(getattr(m, f) for m in sets) for f in ("tei", "tfr", "ppr", "apr")))


# ---- export ---------------------------------------------------------------------

COLUMNS = ("scene", "difficulty", "group", "TEI", "TFR", "PPR", "APR")


def _rows(rows: Iterable[tuple[str, str, str, MetricSet]]) -> list[list[str]]:
    out = []
    for scene, diff, group, m in rows:
        out.append([scene, diff, group] + [f"{v:.3f}" for v in m.as_dict().values()])
    return out


def to_csv(rows: Iterable[tuple[str, str, str, MetricSet]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    w.writerows(_rows(rows))
    return buf.getvalue()


def to_text(rows: Iterable[tuple[str, str, str, MetricSet]]) -> str:
    body = _rows(rows)
    table = [list(COLUMNS)] + body
    widths = [max(len(r[k]) for r in table) for k in range(len(COLUMNS))]
    lines = ["  ".join(c.ljust(w) if k < 3 else c.rjust(w) for k, (c, w) in enumerate(zip(r, widths))).rstrip()
             for r in table]
    return "\n".join(lines) + "\n"
