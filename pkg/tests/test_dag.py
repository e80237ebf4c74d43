from __future__ import annotations

import json

import pytest

from parasched.dag import (
    CycleError,
    DagError,
    NodeKind,
    build_graph,
    critical_path,
    dag_from_json,
    dag_to_json,
    make_node,
    parse_dag_text,
    serialize_dag,
)
from parasched.packages import ParseError

from .conftest import fixture_text

PICK = 'pick(source="table", target="cup")'
PLACE = 'place(source="cup", target="shelf")'


def _norm(text: str) -> list[str]:
    return [line.strip() for line in text.splitlines() if line.strip()]


def test_kitchen_fixture(kitchen_dag):
    assert len(kitchen_dag) == 18
    assert kitchen_dag[18].kind is NodeKind.COMPLETION
    assert kitchen_dag[18].edges == (8, 17)
    assert kitchen_dag.indegree[5] == 2
    assert kitchen_dag[5].edges == (2, 4)


def test_kitchen_critical_path(kitchen_dag):
    assert critical_path(kitchen_dag) == 45


def test_kitchen_serializes_to_source_text(kitchen_dag):
    assert _norm(serialize_dag(kitchen_dag)) == _norm(fixture_text("kitchen_dag.txt"))
    assert parse_dag_text(serialize_dag(kitchen_dag)) == kitchen_dag


def test_reference_sink_node_15_has_no_path_to_completion(kitchen_dag):
    assert kitchen_dag.dangling_sinks() == [15]


def test_template_example_parses():
    text = """Nodes:
node_1:
type: pick
name: pick(source="table", target="carrots")
arm_num: 1
take_time: 5
edge: []

node_2:
type: task_completion
name: task_completion
arm_num: 0
take_time: 0
edge: [1]
"""
    dag = parse_dag_text(text)
    assert dag.completion == 2 and critical_path(dag) == 5


def test_small_graphs():
    chain = build_graph([make_node(1, PICK, 1, 5), make_node(2, PLACE, 1, 7, [1]),
                         make_node(3, "task_completion", 0, 0, [2])])
    assert [chain.indegree[i] for i in (1, 2, 3)] == [0, 1, 1]
    two = build_graph([make_node(1, PICK, 1, 5), make_node(2, 'pick(source="a", target="b")', 1, 5),
                       make_node(3, "task_completion", 0, 0, [1, 2])])
    assert critical_path(two) == 5


def test_delay_counts_on_receiving_node():
    dag = build_graph([make_node(1, PICK, 1, 5), make_node(2, PLACE, 1, 7, [1], delay_after=3),
                       make_node(3, "task_completion", 0, 0, [2], delay_after=2)])
    assert critical_path(dag) == 17


def test_self_loop_is_cycle():
    with pytest.raises(CycleError):
        build_graph([make_node(1, PICK, 1, 5), make_node(2, PLACE, 1, 7, [2]),
                     make_node(3, "task_completion", 0, 0, [2])])


def test_two_cycle_reports_back_edge():
    with pytest.raises(CycleError) as exc:
        build_graph([make_node(1, PICK, 1, 5, [2]), make_node(2, PLACE, 1, 7, [1]),
                     make_node(3, "task_completion", 0, 0, [2])])
    assert set(exc.value.edge) == {1, 2}


@pytest.mark.parametrize("nodes", [
    [],
    [make_node(1, PICK, 1, 5)],
    [make_node(1, "task_completion", 0, 0), make_node(2, "task_completion", 0, 0)],
    [make_node(1, PICK, 1, 5, [7]), make_node(2, "task_completion", 0, 0, [1])],
    [make_node(1, PICK, 1, 5), make_node(1, PLACE, 1, 5), make_node(2, "task_completion", 0, 0, [1])],
    [make_node(1, PICK, 2, 5), make_node(2, "task_completion", 0, 0, [1])],
    [make_node(1, PICK, 1, 5), make_node(2, "task_completion", 0, 3, [1])],
    [make_node(1, "task_completion", 0, 0), make_node(2, PICK, 1, 5, [1])],
])
def test_structural_errors(nodes):
    with pytest.raises(DagError):
        build_graph(nodes)


@pytest.mark.parametrize("mutate", [
    lambda t: t.replace("take_time: 5\n", "take_time: five\n", 1),
    lambda t: t.replace("edge: []\n", "edge: [x]\n", 1),
    lambda t: t.replace("arm_num: 1\n", "", 1),
    lambda t: t.replace("type: pick\n", "type: place\n", 1),
    lambda t: t.replace("node_2:", "node_1:", 1),
])
def test_text_errors(mutate):
    with pytest.raises((ParseError, DagError)):
        parse_dag_text(mutate(fixture_text("kitchen_dag.txt")))


def test_delay_after_round_trip():
    dag = build_graph([make_node(1, PICK, 1, 5), make_node(2, PLACE, 1, 7, [1], delay_after=60),
                       make_node(3, "task_completion", 0, 0, [2])])
    text = serialize_dag(dag)
    assert "delay_after: 60" in text
    assert parse_dag_text(text) == dag


def test_json_mirror(kitchen_dag):
    data = json.loads(dag_to_json(kitchen_dag))
    assert data["nodes"][4]["edge"] == [2, 4]
    assert dag_from_json(data) == kitchen_dag


def test_remap_preserves_structure(kitchen_dag):
    n = len(kitchen_dag)
    mapping = {i: n + 1 - i for i in kitchen_dag.nodes}
    assert critical_path(kitchen_dag.remap(mapping)) == critical_path(kitchen_dag)
