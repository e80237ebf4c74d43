"""Inject one P1/P2/P3 pattern into a valid DAG by adding or rewiring a single edge."""

from __future__ import annotations

import random
from dataclasses import replace

from parasched.dag import Dag, NodeKind, build_graph

SWITCH = NodeKind.CONTAINER_SWITCH


def _with_edges(dag: Dag, i: int, edges: tuple[int, ...]) -> Dag:
    nodes = [replace(n, edges=tuple(sorted(edges))) if n.index == i else n for n in dag]
    return build_graph(nodes)


def candidates(dag: Dag, code: str) -> list[tuple[int, int]]:
    """(node, new predecessor) pairs whose edge would form the pattern without a cycle."""
    out = []
    for i, ni in dag.nodes.items():
        if ni.is_completion or ni.kind is SWITCH:
            continue
        below = dag.descendants(i) | {i}
        for j, nj in dag.nodes.items():
            if j in below or j in ni.edges or nj.is_completion:
                continue
            if code == "P1":
                ok = (ni.kind is not NodeKind.PICK and nj.kind is NodeKind.PLACE
                      and ni.source is not None and ni.source != nj.source)
            elif code == "P2":
                ok = (nj.kind is NodeKind.PICK and ni.kind is NodeKind.PLACE and ni.source == nj.target
                      and any(dag[u].kind is NodeKind.TOOL_USE and dag[u].source == nj.target
                              for u in dag.successors[j]))
            else:
                ok = (nj.kind is NodeKind.TOOL_USE and ni.source is not None and ni.source != nj.source)
            if ok:
                out.append((i, j))
    return out


def mutate(dag: Dag, code: str, rng: random.Random) -> tuple[Dag, tuple[int, int]] | None:
    """P1/P3 add the edge; P2 rewires the place to hang directly off the pick."""
    pool = candidates(dag, code)
    if not pool:
        return None
    i, j = rng.choice(pool)
    edges = (j,) if code == "P2" else dag[i].edges + (j,)
    return _with_edges(dag, i, edges), (i, j)
