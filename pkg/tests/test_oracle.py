from __future__ import annotations

import pytest

from parasched.dag import build_graph, critical_path, make_node
from parasched.fuzz import random_dag
from parasched.oracle import OracleError, optimal_makespan
from parasched.scheduler import Plan, schedule, validate_plan


def _chain():
    return build_graph([
        make_node(1, 'pick(source="table", target="knife")', 1, 5),
        make_node(2, 'place(source="knife", target="board")', 1, 7, [1]),
        make_node(3, 'pick(source="board", target="knife")', 1, 5, [2]),
        make_node(4, 'cut(source="knife", target="bread")', 2, 10, [3]),
        make_node(5, 'place(source="knife", target="table")', 1, 5, [4]),
        make_node(6, "task_completion", 0, 0, [5]),
    ])


def _witness_ok(res, dag):
    assert isinstance(res.witness, Plan)
    assert validate_plan(res.witness, dag) == []
    assert res.witness.makespan == res.optimal_makespan


def test_forced_chain():
    dag = _chain()
    res = optimal_makespan(dag)
    assert res.optimal_makespan == 32 == dag.sequential_sum()
    _witness_ok(res, dag)


def test_independent_nodes():
    dag = build_graph([
        make_node(1, 'wipe(source="cloth", target="table")', 1, 5),
        make_node(2, 'write(source="pen", target="paper")', 1, 5),
        make_node(3, "task_completion", 0, 0, [1, 2]),
    ])
    res = optimal_makespan(dag)
    assert res.optimal_makespan == 5
    _witness_ok(res, dag)


def test_deadlock_fixture(deadlock_dag):
    res = optimal_makespan(deadlock_dag)
    assert res.optimal_makespan <= schedule(deadlock_dag).makespan
    assert res.optimal_makespan == 25
    assert res.witness.rollbacks == 0
    _witness_ok(res, deadlock_dag)


def test_kitchen_optimum(kitchen_dag):
    res = optimal_makespan(kitchen_dag, node_limit=18)
    assert res.optimal_makespan == 69
    assert res.nodes_explored > 0
    _witness_ok(res, kitchen_dag)


def test_node_limit(kitchen_dag):
    with pytest.raises(OracleError, match="limit"):
        optimal_makespan(kitchen_dag)


@pytest.mark.parametrize("seed", range(40))
def test_dominance(seed):
    dag = random_dag(seed, 8)
    res = optimal_makespan(dag)
    plan = schedule(dag)
    assert critical_path(dag) <= res.optimal_makespan <= plan.makespan <= dag.sequential_bound()
    _witness_ok(res, dag)
