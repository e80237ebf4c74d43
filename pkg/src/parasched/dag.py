"""Dependency DAG over meta operations: node text format, graph checks, analytics."""

from __future__ import annotations

import enum
import json
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from types import MappingProxyType

from .packages import ParseError, parse_call
from .skills import COMPLETION_SKILL, SKILLS, Category


class NodeKind(enum.Enum):
    PICK = "pick"
    PLACE = "place"
    TOOL_USE = "tool_use"
    CONTAINER_SWITCH = "container_switch"
    COMPLETION = "task_completion"


_KIND_OF = {
    Category.PICK: NodeKind.PICK,
    Category.PLACE: NodeKind.PLACE,
    Category.TOOL_USE: NodeKind.TOOL_USE,
    Category.CONTAINER_SWITCH: NodeKind.CONTAINER_SWITCH,
}


class DagError(ValueError):
    """Structurally invalid DAG (cycle, dangling edge, bad sink, ...)."""


class CycleError(DagError):
    def __init__(self, edge: tuple[int, int]):
        super().__init__(f"cycle through edge node_{edge[0]} -> node_{edge[1]}")
        self.edge = edge


@dataclass(frozen=True)
class DagNode:
    index: int
    skill: str
    source: str | None = None
    target: str | None = None
    arm_num: int = 1
    take_time: int = 0
    edges: tuple[int, ...] = ()
    delay_after: int = 0

    @property
    def kind(self) -> NodeKind:
        if self.skill == COMPLETION_SKILL:
            return NodeKind.COMPLETION
        return _KIND_OF[SKILLS[self.skill].category]

    @property
    def name(self) -> str:
        if self.kind is NodeKind.COMPLETION:
            return COMPLETION_SKILL
        if self.source is None:
            return f'{self.skill}(target="{self.target}")'
        return f'{self.skill}(source="{self.source}", target="{self.target}")'

    @property
    def is_completion(self) -> bool:
        return self.skill == COMPLETION_SKILL

    @property
    def obj(self) -> str | None:
        """Object an arm must hold for this node: the target for picks, else the source."""
        return self.target if self.kind is NodeKind.PICK else self.source

    def to_json(self) -> dict:
        d = {
            "index": self.index,
            "type": self.skill,
            "name": self.name,
            "arm_num": self.arm_num,
            "take_time": self.take_time,
            "edge": list(self.edges),
        }
        if self.delay_after:
            d["delay_after"] = self.delay_after
        return d


def make_node(index: int, name: str, arm_num: int, take_time: int, edges: Iterable[int] = (),
              delay_after: int = 0) -> DagNode:
    """Build a node from its skill-call text, e.g. ``pick(source="a", target="b")``."""
    if name == COMPLETION_SKILL:
        return DagNode(index, COMPLETION_SKILL, None, None, arm_num, take_time, tuple(edges), delay_after)
    call = parse_call(name)
    return DagNode(index, call.skill.name, call.source, call.target, arm_num, take_time, tuple(edges), delay_after)


def _check_node(n: DagNode) -> None:
    if n.index <= 0:
        raise DagError(f"node index must be positive, got {n.index}")
    if n.is_completion:
        if n.arm_num != 0 or n.take_time != 0:
            raise DagError(f"node_{n.index}: task_completion needs arm_num 0 and take_time 0")
    else:
        if n.skill not in SKILLS or SKILLS[n.skill].category is Category.WAIT:
            raise DagError(f"node_{n.index}: {n.skill!r} is not a DAG node type")
        if n.arm_num not in (1, 2):
            raise DagError(f"node_{n.index}: arm_num must be 1 or 2 for {n.skill}")
        if n.arm_num != SKILLS[n.skill].default_arms:
            raise DagError(f"node_{n.index}: {n.skill} takes {SKILLS[n.skill].default_arms} arm(s), got {n.arm_num}")
        if n.take_time < 0:
            raise DagError(f"node_{n.index}: negative take_time")
    if n.delay_after < 0:
        raise DagError(f"node_{n.index}: negative delay_after")
    if len(set(n.edges)) != len(n.edges):
        raise DagError(f"node_{n.index}: duplicate edge entries")


@dataclass(frozen=True)
class Dag:
    nodes: Mapping[int, DagNode]
    successors: Mapping[int, tuple[int, ...]] = field(repr=False)
    indegree: Mapping[int, int] = field(repr=False)
    order: tuple[int, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes.values())

    def __getitem__(self, index: int) -> DagNode:
        return self.nodes[index]

    def __eq__(self, other) -> bool:
        return isinstance(other, Dag) and dict(self.nodes) == dict(other.nodes)

    def __hash__(self):
        return hash(tuple(self.nodes.values()))

    @property
    def completion(self) -> int:
        return next(i for i, n in self.nodes.items() if n.is_completion)

    def predecessors(self, index: int) -> tuple[int, ...]:
        return self.nodes[index].edges

    def descendants(self, index: int) -> set[int]:
        seen: set[int] = set()
        stack = list(self.successors[index])
        while stack:
            j = stack.pop()
            if j not in seen:
                seen.add(j)
                stack.extend(self.successors[j])
        return seen

    def sequential_sum(self) -> int:
        return sum(n.take_time for n in self.nodes.values())

    def sequential_bound(self) -> int:
        """Length of a one-node-at-a-time plan: every duration plus every delay.
        Equal to ``sequential_sum`` when the DAG has no delays."""
        return self.sequential_sum() + sum(n.delay_after for n in self.nodes.values())

    def operational_count(self) -> int:
        return sum(1 for n in self.nodes.values() if not n.is_completion)

    def dangling_sinks(self) -> list[int]:
        """Non-completion nodes with no path to the completion node."""
        reach = {self.completion}
        for i in reversed(self.order):
            if any(j in reach for j in self.successors[i]):
                reach.add(i)
        return [i for i in self.nodes if i not in reach]

    def to_json(self) -> dict:
        return {"nodes": [n.to_json() for n in self.nodes.values()]}

    def remap(self, mapping: Mapping[int, int]) -> "Dag":
        """Renumber nodes (used by permutation tests)."""
        return build_graph(
            replace(n, index=mapping[n.index], edges=tuple(mapping[e] for e in n.edges)) for n in self.nodes.values()
        )


def build_graph(nodes: Iterable[DagNode]) -> Dag:
    table: dict[int, DagNode] = {}
    for n in nodes:
        _check_node(n)
        if n.index in table:
            raise DagError(f"duplicate node index {n.index}")
        table[n.index] = n
    table = dict(sorted(table.items()))
    succ: dict[int, list[int]] = {i: [] for i in table}
    for n in table.values():
        for e in n.edges:
            if e == n.index:
                raise CycleError((e, e))
            if e not in table:
                raise DagError(f"node_{n.index}: edge to missing node_{e}")
            succ[e].append(n.index)
    completions = [i for i, n in table.items() if n.is_completion]
    if len(completions) != 1:
        raise DagError(f"expected exactly one task_completion node, found {len(completions)}")
    if succ[completions[0]]:
        raise DagError(f"task_completion node_{completions[0]} must be a sink")

    # iterative DFS; a gray->gray edge is reported as the offending back edge
    color = dict.fromkeys(table, 0)
    post: list[int] = []
    for root in table:
        if color[root]:
            continue
        color[root] = 1
        stack = [(root, iter(succ[root]))]
        while stack:
            v, it = stack[-1]
            for w in it:
                if color[w] == 1:
                    raise CycleError((v, w))
                if color[w] == 0:
                    color[w] = 1
                    stack.append((w, iter(succ[w])))
                    break
            else:
                color[v] = 2
                post.append(v)
                stack.pop()
    order = tuple(reversed(post))
    return Dag(
        MappingProxyType(table),
        MappingProxyType({i: tuple(sorted(v)) for i, v in succ.items()}),
        MappingProxyType({i: len(n.edges) for i, n in table.items()}),
        order,
    )


def critical_path(dag: Dag) -> int:
    """Longest path of take_time plus delay_after (delay counts on the receiving node)."""
    finish: dict[int, int] = {}
    for i in dag.order:
        n = dag[i]
        ready = max((finish[p] + n.delay_after for p in n.edges), default=0)
        finish[i] = ready + n.take_time
    return max(finish.values(), default=0)


# ---- text format ---------------------------------------------------------------

_NODE_HDR = re.compile(r"node_(\d+)\s*:\s*")
_FIELD = re.compile(r"([a-z_]+)\s*:\s*(.*)")
_REQUIRED = ("type", "name", "arm_num", "take_time", "edge")


def _parse_int(value: str, what: str, offset: int) -> int:
    if not re.fullmatch(r"\d+", value):
        raise ParseError(f"{what} must be a non-negative integer, got {value!r}", offset)
    return int(value)


def _parse_edges(value: str, offset: int) -> tuple[int, ...]:
    m = re.fullmatch(r"\[(.*)\]", value)
    if not m:
        raise ParseError(f"edge must be a bracketed list, got {value!r}", offset)
    body = m.group(1).strip()
    if not body:
        return ()
    out = []
    for tok in body.split(","):
        tok = tok.strip()
        if tok.startswith("node_"):
            tok = tok[5:]
        out.append(_parse_int(tok, "edge entry", offset))
    return tuple(out)


def parse_nodes(text: str) -> list[DagNode]:
    """Parse node blocks without graph checks."""
    blocks: list[tuple[int, int, dict[str, tuple[str, int]]]] = []
    off = 0
    for raw in text.splitlines(keepends=True):
        line = raw.strip()
        here = off
        off += len(raw.encode("utf-8"))
        if not line or line == "Nodes:":
            continue
        m = _NODE_HDR.fullmatch(line)
        if m:
            blocks.append((int(m.group(1)), here, {}))
            continue
        m = _FIELD.fullmatch(line)
        if not m or not blocks:
            raise ParseError(f"unexpected line {line[:40]!r}", here)
        key, value = m.group(1), m.group(2).strip()
        fields = blocks[-1][2]
        if key in fields:
            raise ParseError(f"duplicate field {key!r}", here)
        fields[key] = (value, here)
    nodes = []
    for index, at, fields in blocks:
        for key in _REQUIRED:
            if key not in fields:
                raise ParseError(f"node_{index}: missing field {key!r}", at)
        unknown = set(fields) - set(_REQUIRED) - {"delay_after"}
        if unknown:
            raise ParseError(f"node_{index}: unknown field {sorted(unknown)[0]!r}", at)
        typ, typ_at = fields["type"]
        name, name_at = fields["name"]
        arm_num = _parse_int(fields["arm_num"][0], "arm_num", fields["arm_num"][1])
        take = _parse_int(fields["take_time"][0], "take_time", fields["take_time"][1])
        edges = _parse_edges(*fields["edge"])
        delay = 0
        if "delay_after" in fields:
            delay = _parse_int(fields["delay_after"][0], "delay_after", fields["delay_after"][1])
        if name == COMPLETION_SKILL:
            node = DagNode(index, COMPLETION_SKILL, None, None, arm_num, take, edges, delay)
        else:
            call = parse_call(name, name_at)
            node = DagNode(index, call.skill.name, call.source, call.target, arm_num, take, edges, delay)
        if node.skill != typ:
            raise ParseError(f"node_{index}: type {typ!r} disagrees with name {name!r}", typ_at)
        nodes.append(node)
    return nodes


def parse_dag_text(text: str) -> Dag:
    return build_graph(parse_nodes(text))


def serialize_dag(dag: Dag) -> str:
    blocks = []
    for n in dag.nodes.values():
        lines = [
            f"node_{n.index}:",
            f"type: {n.skill}",
            f"name: {n.name}",
            f"arm_num: {n.arm_num}",
            f"take_time: {n.take_time}",
            f"edge: [{', '.join(str(e) for e in n.edges)}]",
        ]
        if n.delay_after:
            lines.append(f"delay_after: {n.delay_after}")
        blocks.append("\n".join(lines))
    return "Nodes:\n" + "\n\n".join(blocks) + "\n"


def dag_to_json(dag: Dag) -> str:
    return json.dumps(dag.to_json(), indent=2)


def dag_from_json(data: dict | str) -> Dag:
    if isinstance(data, str):
        data = json.loads(data)
    nodes = []
    for d in data["nodes"]:
        node = make_node(d["index"], d["name"], d["arm_num"], d["take_time"], d.get("edge", ()), d.get("delay_after", 0))
        if node.skill != d["type"]:
            raise DagError(f"node_{d['index']}: type {d['type']!r} disagrees with name")
        nodes.append(node)
    return build_graph(nodes)
