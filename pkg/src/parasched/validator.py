"""Structural checks on generated DAGs (problem classes P1-P3)."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .dag import Dag, NodeKind

PROBLEMS = {
    "P1": "Depends on another object's place node.",
    "P2": "Does not depend on the tool usage node but directly depends on the pick node.",
    "P3": "Depends on another object's tool usage node.",
}


@dataclass(frozen=True, order=True)
class Diagnostic:
    node_index: int
    predecessor: int
    problem_code: str

    @property
    def offending_edge(self) -> tuple[int, int]:
        return (self.predecessor, self.node_index)

    @property
    def message(self) -> str:
        return PROBLEMS[self.problem_code]

    def to_json(self) -> dict:
        return {
            "node": self.node_index,
            "code": self.problem_code,
            "edge": list(self.offending_edge),
            "message": self.message,
        }


def _differs(a: str | None, b: str | None) -> bool:
    # a node without a source object never triggers the source comparison
    return a is not None and a != b


def verify(dag: Dag) -> list[Diagnostic]:
    """Return one diagnostic per offending (node, predecessor) pair; empty means valid."""
    diags = []
    for i, n in dag.nodes.items():
        if n.kind is NodeKind.CONTAINER_SWITCH:
            continue
        for j in sorted(n.edges):
            p = dag[j]
            tool_follows = p.kind is NodeKind.PICK and any(
                dag[u].kind is NodeKind.TOOL_USE and dag[u].source == p.target for u in dag.successors[j]
            )
            if n.kind is not NodeKind.PICK and p.kind is NodeKind.PLACE and _differs(n.source, p.source):
                diags.append(Diagnostic(i, j, "P1"))
            elif tool_follows and n.kind is NodeKind.PLACE and n.source == p.target:
                diags.append(Diagnostic(i, j, "P2"))
            elif p.kind is NodeKind.TOOL_USE and _differs(n.source, p.source):
                diags.append(Diagnostic(i, j, "P3"))
    return diags


def is_valid(dag: Dag) -> bool:
    return not verify(dag)


def render_problems(diags: list[Diagnostic]) -> str:
    """Problem lines for the correction prompt."""
    return "\n".join(
        f"node_{d.node_index} (edge from node_{d.predecessor}): {d.problem_code} - {d.message}" for d in diags
    )


def diagnostics_json(diags: list[Diagnostic]) -> str:
    return json.dumps([d.to_json() for d in diags], indent=2)
