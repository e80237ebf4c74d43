from __future__ import annotations

import csv
import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from parasched.generation import ideal_step_count, rule_based_dag
from parasched.metrics import (
    COLUMNS,
    ExecutionReport,
    MetricError,
    MetricSet,
    apr,
    apr_seconds,
    average,
    metric_set,
    parallel_interval_count,
    ppr,
    ppr_ratio,
    tei,
    tfr,
    to_csv,
    to_text,
)
from parasched.scheduler import Plan, ScheduleEntry, parallel_segments, schedule


def _entry(a, b, node):
    return ScheduleEntry(a, b, node, f"n{node}")


def test_kitchen_apr(kitchen_dag):
    plan = schedule(kitchen_dag)
    # overlaps 0-12, 17-42, 48-51, 66-69 of the two traces
    assert apr_seconds(plan) == 43
    assert apr(plan) == pytest.approx(43 / 82, abs=1e-12)
    assert parallel_interval_count(plan) == 7


def test_greenhouse_intervals(pkg):
    plan = schedule(rule_based_dag(pkg("greenhouse", "AB")))
    assert plan.makespan == 49
    assert len(parallel_segments(plan)) == 7


def test_tei_examples():
    assert tei(ExecutionReport.from_counts(13, 13), 50) == pytest.approx(2.0)
    assert tei(ExecutionReport.from_counts(13, 0), 50) == 0.0
    assert tei(ExecutionReport.from_counts(4, 4), 100) == pytest.approx(1.0)


def test_tfr_examples():
    assert tfr(ExecutionReport.from_counts(13, 6)) == pytest.approx(7 / 13)
    assert round(tfr(ExecutionReport.from_counts(13, 6)), 3) == 0.538
    assert tfr(ExecutionReport.all_success(range(5))) == 0.0
    assert tfr(ExecutionReport({1: False, 2: False})) == 1.0


def test_ppr_examples(pkg):
    assert ppr(8, 10) == pytest.approx(0.2)
    assert ppr(7, 7) == 0.0
    assert ppr_ratio(8, 10) == pytest.approx(0.8)
    group = pkg("kitchen", "ABC")
    dag = rule_based_dag(group)
    assert (ideal_step_count(group), dag.operational_count()) == (19, 17)
    assert ppr(17, 19) == pytest.approx(2 / 19)


def test_apr_examples():
    alternating = Plan([_entry(0, 5, 1), _entry(10, 15, 3)], [_entry(5, 10, 2)])
    assert apr(alternating) == 0.0
    busy = Plan([_entry(0, 30, 1), _entry(30, 50, 3)], [_entry(10, 30, 2)])
    assert apr(busy) == pytest.approx(0.4)


def test_errors():
    with pytest.raises(MetricError):
        tei(ExecutionReport.from_counts(3, 3), 0)
    with pytest.raises(MetricError):
        tei(ExecutionReport(), 10)
    with pytest.raises(MetricError):
        tfr(ExecutionReport())
    with pytest.raises(MetricError):
        ppr(11, 10)
    with pytest.raises(MetricError):
        ppr(0, 10)
    with pytest.raises(MetricError):
        apr(Plan())
    with pytest.raises(MetricError):
        ExecutionReport.from_counts(3, 4)
    with pytest.raises(MetricError):
        average([])


_spans = st.lists(st.tuples(st.integers(0, 40), st.integers(1, 10)), min_size=1, max_size=6)


def _lane(spans, base):
    out, t = [], 0
    for gap, dur in spans:
        t += gap
        out.append(_entry(t, t + dur, base + len(out)))
        t += dur
    return out


@given(_spans, _spans, st.integers(0, 100), st.integers(2, 4))
def test_apr_translation_and_scale(ls, rs, shift, k):
    plan = Plan(_lane(ls, 1), _lane(rs, 100))
    value = apr(plan)
    assert 0.0 <= value <= 1.0
    moved = Plan([_entry(e.start + shift, e.end + shift, e.node) for e in plan.left],
                 [_entry(e.start + shift, e.end + shift, e.node) for e in plan.right])
    assert apr_seconds(moved) == apr_seconds(plan)
    scaled = Plan([_entry(e.start * k, e.end * k, e.node) for e in plan.left],
                  [_entry(e.start * k, e.end * k, e.node) for e in plan.right])
    assert apr_seconds(scaled) == k * apr_seconds(plan)
    assert math.isclose(apr(scaled), value, abs_tol=1e-12)


@given(st.integers(1, 50), st.data(), st.integers(1, 500))
def test_tei_tfr_identity(n, data, makespan):
    ok = data.draw(st.integers(0, n))
    rep = ExecutionReport.from_counts(n, ok)
    assert abs(tei(rep, makespan) - 100 / makespan * (1 - tfr(rep))) < 1e-12


def test_single_package_ppr_is_zero(corpus):
    for scene in corpus.scenes:
        for p in corpus.packages(scene):
            dag = rule_based_dag([p])
            assert ppr(dag.operational_count(), ideal_step_count([p])) == 0.0


def _rows(kitchen_dag):
    plan = schedule(kitchen_dag)
    ops = [n.index for n in kitchen_dag if not n.is_completion]
    m = metric_set(plan, ExecutionReport.all_success(ops), 17, 19)
    return [("kitchen", "easy", "A+B+C", m), ("kitchen", "easy", "A", MetricSet(1.0, 0.0, 0.0, 0.25))]


def test_csv_export(kitchen_dag):
    rows = list(csv.reader(io.StringIO(to_csv(_rows(kitchen_dag)))))
    assert tuple(rows[0]) == COLUMNS
    assert rows[1][:3] == ["kitchen", "easy", "A+B+C"]
    assert float(rows[1][6]) == pytest.approx(43 / 82, abs=5e-4)
    assert len(rows) == 3


def test_text_export(kitchen_dag):
    lines = to_text(_rows(kitchen_dag)).splitlines()
    assert lines[0].split() == list(COLUMNS)
    assert lines[2].split() == ["kitchen", "easy", "A", "1.000", "0.000", "0.000", "0.250"]
    assert [l.split() for l in to_text([]).splitlines()] == [list(COLUMNS)]


def test_average():
    m = average([MetricSet(1, 0, 0.2, 0.5), MetricSet(3, 0.5, 0, 0.3)])
    assert m == MetricSet(2, 0.25, 0.1, 0.4)
