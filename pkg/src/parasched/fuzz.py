"""Seeded generator of random structurally valid DAGs for property tests and bench."""

from __future__ import annotations

import random

from .dag import Dag, DagNode, build_graph
from .skills import COMPLETION_SKILL, SKILLS, Category

_USES_1 = sorted(n for n, s in SKILLS.items() if s.category is Category.TOOL_USE and s.has_source
                 and s.default_arms == 1)
_USES_2 = sorted(n for n, s in SKILLS.items() if s.category is Category.TOOL_USE and s.has_source
                 and s.default_arms == 2)
_PLACES = ["table", "counter", "shelf", "tray", "bin", "rack"]
_TARGETS = ["board", "box", "panel", "bowl", "sheet", "pipe"]
_CONTAINERS = [("flap_open", "flap_close", "fridge"), ("slide_open", "slide_close", "drawer")]


def random_dag(rng: random.Random | int | None = None, max_nodes: int = 20) -> Dag:
    """Pick -> uses -> place chains over distinct objects, joined by place -> pick edges
    and optional container open/close pairs. Always passes ``verify``."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    if max_nodes < 3:
        raise ValueError("need room for a pick, a place and the completion node")
    budget = max_nodes - 1
    nodes: list[DagNode] = []
    places: list[int] = []

    def add(skill, source, target, edges, delay=0) -> int:
        idx = len(nodes) + 1
        arms = SKILLS[skill].default_arms
        nodes.append(DagNode(idx, skill, source, target, arms, rng.randint(1, 10), tuple(sorted(set(edges))), delay))
        return idx

    opener = closer = container = None
    if budget >= 5 and rng.random() < 0.3:
        op, closer, container = rng.choice(_CONTAINERS)
        opener = add(op, None, container, [])
        budget -= 2  # closer is added at the end

    k = 0
    while budget >= 2:
        obj = f"obj{k}"
        n_uses = rng.randint(0, min(3, budget - 2))
        src = container if container and rng.random() < 0.4 else rng.choice(_PLACES)
        deps = [p for p in places if rng.random() < 0.3]
        if src == container:
            deps.append(opener)
        delay = rng.choice([0, 0, 0, rng.randint(1, 5)])
        prev = add("pick", src, obj, deps, delay)
        for _ in range(n_uses):
            skill = rng.choice(_USES_2 if rng.random() < 0.3 else _USES_1)
            prev = add(skill, obj, rng.choice(_TARGETS), [prev], rng.choice([0, 0, rng.randint(1, 3)]))
        places.append(add("place", obj, rng.choice(_PLACES), [prev]))
        budget -= 2 + n_uses
        k += 1
    if opener is not None:
        add(closer, None, container, places)
    has_succ = {e for n in nodes for e in n.edges}
    sinks = [n.index for n in nodes if n.index not in has_succ]
    nodes.append(DagNode(len(nodes) + 1, COMPLETION_SKILL, None, None, 0, 0, tuple(sinks),
                         rng.choice([0, 0, 0, 2])))
    return build_graph(nodes)
