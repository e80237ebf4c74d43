"""Event-driven dual-arm scheduler with lock tracking and deadlock rollback,
plus an independent post-hoc plan checker."""

from __future__ import annotations

import enum
import heapq
import json
import logging
from collections.abc import Iterable
from dataclasses import dataclass, field

from .arms import Arm, ArmChoice, ArmState, select
from .dag import Dag, NodeKind

log = logging.getLogger(__name__)

COMPLETED, AVAILABLE = 0, 1  # completed events sort first on equal time


class LivelockError(RuntimeError):
    def __init__(self, message: str, queue: list):
        super().__init__(message)
        self.queue = queue


@dataclass(frozen=True, order=True)
class ScheduleEntry:
    start: int
    end: int
    node: int
    name: str

    def to_json(self) -> dict:
        return {"start": self.start, "end": self.end, "node": self.node, "name": self.name}


@dataclass
class Plan:
    left: list[ScheduleEntry] = field(default_factory=list)
    right: list[ScheduleEntry] = field(default_factory=list)
    rollbacks: int = 0
    assignment: dict[int, tuple[Arm, ...]] = field(default_factory=dict)
    completion_time: int = 0

    def trace(self, arm: Arm) -> list[ScheduleEntry]:
        return self.left if arm is Arm.LEFT else self.right

    @property
    def makespan(self) -> int:
        ends = [e.end for e in self.left + self.right]
        return max(ends + [self.completion_time], default=0)

    def start_times(self) -> dict[int, int]:
        out = {e.node: e.start for e in self.left + self.right}
        return out

    def to_json(self) -> dict:
        return {
            "makespan": self.makespan,
            "rollbacks": self.rollbacks,
            "left": [e.to_json() for e in self.left],
            "right": [e.to_json() for e in self.right],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict, dag: Dag | None = None) -> "Plan":
        plan = cls(
            [ScheduleEntry(**e) for e in data["left"]],
            [ScheduleEntry(**e) for e in data["right"]],
            data.get("rollbacks", 0),
        )
        for arm in Arm:
            for e in plan.trace(arm):
                plan.assignment[e.node] = plan.assignment.get(e.node, ()) + (arm,)
        if dag is not None:
            c = dag.completion
            plan.completion_time = max(
                (e.end + dag[c].delay_after for e in plan.left + plan.right if e.node in dag[c].edges), default=0
            )
        return plan


class _Run:
    def __init__(self, dag: Dag, time_cap: int | None):
        self.dag = dag
        self.plan = Plan()
        self.free = {Arm.LEFT: 0, Arm.RIGHT: 0}
        self.lock: dict[Arm, str | None] = {Arm.LEFT: None, Arm.RIGHT: None}
        self.dep = dict(dag.indegree)
        self.start = dict.fromkeys(dag.nodes, 0)
        self.end: dict[int, int] = {}
        self.completed: set[int] = set()
        self.queue: list[tuple[int, int, int]] = []
        total = dag.sequential_bound()
        self.cap = time_cap if time_cap is not None else 4 * max(total, 1)
        self.picks = sum(1 for n in dag if n.kind is NodeKind.PICK)

    def state(self, arm: Arm) -> ArmState:
        chain = self.lock[arm]
        return ArmState(arm, self.free[arm], chain is not None, chain)

    def push(self, t: int, kind: int, i: int) -> None:
        heapq.heappush(self.queue, (t, kind, i))

    def last_kind(self, arm: Arm) -> NodeKind | None:
        tr = self.plan.trace(arm)
        return self.dag[tr[-1].node].kind if tr else None

    def record(self, i: int, arms: tuple[Arm, ...], s: int) -> int:
        n = self.dag[i]
        e = s + n.take_time
        for a in arms:
            self.plan.trace(a).append(ScheduleEntry(s, e, i, n.name))
            self.free[a] = e
        self.plan.assignment[i] = arms
        self.end[i] = e
        self.push(e, COMPLETED, i)
        return e

    def run(self) -> Plan:
        for i, d in self.dep.items():
            if d == 0:
                self.push(0, AVAILABLE, i)
        while self.queue:
            t, kind, i = heapq.heappop(self.queue)
            if t > self.cap:
                raise LivelockError(f"no progress before t={self.cap}", sorted(self.queue + [(t, kind, i)]))
            if kind == AVAILABLE:
                self.available(t, i)
            else:
                self.completed_event(t, i)
        missing = [i for i in self.dag.nodes if i not in self.end]
        if missing:
            raise LivelockError(f"nodes never scheduled: {missing}", [])
        for arm in Arm:
            self.plan.trace(arm).sort()
        return self.plan

    def available(self, t: int, i: int) -> None:
        n = self.dag[i]
        if n.is_completion:
            self.end[i] = self.start[i]
            self.plan.completion_time = self.start[i]
            self.plan.assignment[i] = ()
            self.completed.add(i)
            return
        left, right = self.state(Arm.LEFT), self.state(Arm.RIGHT)
        owner = next((a for a in Arm if n.source is not None and self.lock[a] == n.source), None)
        if n.arm_num == 1 and n.kind is not NodeKind.PICK and owner is not None:
            # the holding arm is the only legal executor; waiting can never change that
            choice = ArmChoice.of(owner)
        else:
            choice, _ = select(n, self.start[i], left, right)
        if choice is ArmChoice.NONE:
            if n.arm_num == 2 and self.try_rollback(t, i):
                return
            self.push(t + 1, AVAILABLE, i)
            return
        if choice is not ArmChoice.BOTH:
            arm = choice.arms[0]
            if n.kind is NodeKind.PLACE and self.lock[arm] != n.source:
                self.push(t + 1, AVAILABLE, i)
                return
            if n.kind is NodeKind.PICK and self.lock[arm] is not None:
                self.push(t + 1, AVAILABLE, i)
                return
            if n.source is not None and n.kind is not NodeKind.PICK and owner is not None and owner is not arm:
                self.push(t + 1, AVAILABLE, i)
                return
        arms = choice.arms
        if n.kind is NodeKind.PICK:
            for a in arms:
                self.lock[a] = n.target
        s = max([self.free[a] for a in arms] + [self.start[i]])
        self.record(i, arms, s)

    def completed_event(self, t: int, i: int) -> None:
        n = self.dag[i]
        if n.kind is NodeKind.PLACE:
            for a in self.plan.assignment[i]:
                if self.lock[a] == n.source:
                    self.lock[a] = None
        self.completed.add(i)
        for j in self.dag.successors[i]:
            self.dep[j] -= 1
            self.start[j] = max(self.start[j], t + self.dag[j].delay_after)
            if self.dep[j] == 0:
                self.push(self.start[j], AVAILABLE, j)

    def try_rollback(self, t: int, i: int) -> bool:
        """Break a dual-arm deadlock: each arm holds a different object and the
        task needs both. The arm not holding the task's source gives up its latest
        pick (and anything dispatched downstream of it), which is replayed later."""
        n = self.dag[i]
        if self.lock[Arm.LEFT] is None or self.lock[Arm.RIGHT] is None:
            return False
        holder = next((a for a in Arm if self.lock[a] == n.source), None)
        if holder is None:
            return False
        other = holder.other
        chain = self.lock[other]
        picks = [e for e in self.plan.trace(other) if self.dag[e.node].kind is NodeKind.PICK
                 and self.dag[e.node].target == chain]
        if not picks or self.plan.rollbacks >= self.picks:
            return False
        pick = picks[-1].node
        undo = {pick} | {d for d in self.dag.descendants(pick) if d in self.end}
        log.debug("rollback at t=%d: undo %s for dual node %d", t, sorted(undo), i)
        for a in Arm:
            tr = self.plan.trace(a)
            tr[:] = [e for e in tr if e.node not in undo]
            self.free[a] = max((e.end for e in tr), default=0)
        for u in undo:
            self.end.pop(u, None)
            self.plan.assignment.pop(u, None)
            self.completed.discard(u)
        if self.dag.completion in undo:
            self.plan.completion_time = 0
        self.lock[other] = None
        affected = undo | self.dag.descendants(pick)
        for j in affected:
            if j in self.end:
                continue
            preds = self.dag[j].edges
            self.dep[j] = sum(1 for p in preds if p not in self.completed)
            self.start[j] = max((self.end[p] + self.dag[j].delay_after for p in preds if p in self.completed),
                                default=0)
        self.queue = [ev for ev in self.queue if ev[2] not in affected]
        heapq.heapify(self.queue)
        self.plan.rollbacks += 1
        s = max(self.free[holder], self.free[other], self.start[i])
        self.record(i, (Arm.LEFT, Arm.RIGHT), s)
        for j in sorted(affected):
            if j not in self.end and self.dep[j] == 0:
                self.push(max(t, self.start[j]) if j != pick else t, AVAILABLE, j)
        return True


def schedule(dag: Dag, time_cap: int | None = None) -> Plan:
    """Greedy dual-arm schedule of ``dag``. Raises LivelockError if simulated time
    passes ``time_cap`` (default: four times the sequential duration)."""
    return _Run(dag, time_cap).run()


# ---- independent checker ---------------------------------------------------------


class Constraint(enum.Enum):
    C1_DEPENDENCY = "C1_Dependency"
    C2_ARM_OVERLAP = "C2_ArmOverlap"
    C3_LOCK_CHAIN = "C3_LockChain"


@dataclass(frozen=True)
class Violation:
    constraint: Constraint
    nodes: tuple[int, ...]
    detail: str

    def to_json(self) -> dict:
        return {"constraint": self.constraint.value, "nodes": list(self.nodes), "detail": self.detail}


def object_chains(dag: Dag) -> list[list[int]]:
    """Pick -> uses -> place spines, one per pick node."""
    chains = []
    for p in dag:
        if p.kind is not NodeKind.PICK:
            continue
        chain, cur, obj = [p.index], p.index, p.target
        while True:
            nxt = [j for j in dag.successors[cur]
                   if dag[j].source == obj and dag[j].kind in (NodeKind.TOOL_USE, NodeKind.PLACE)]
            if not nxt:
                break
            cur = nxt[0]
            chain.append(cur)
            if dag[cur].kind is NodeKind.PLACE:
                break
        chains.append(chain)
    return chains


def validate_plan(plan: Plan, dag: Dag) -> list[Violation]:
    out: list[Violation] = []
    sigma: dict[int, int] = {}
    mu: dict[int, set[Arm]] = {}
    for arm in Arm:
        for e in plan.trace(arm):
            n = dag.nodes.get(e.node)
            if n is None:
                out.append(Violation(Constraint.C1_DEPENDENCY, (e.node,), "entry for unknown node"))
                continue
            if e.end - e.start != n.take_time:
                out.append(Violation(Constraint.C1_DEPENDENCY, (e.node,), "entry length differs from take_time"))
            if e.node in sigma and sigma[e.node] != e.start:
                out.append(Violation(Constraint.C2_ARM_OVERLAP, (e.node,), "dual-arm entries not synchronised"))
            sigma[e.node] = e.start
            mu.setdefault(e.node, set()).add(arm)

    finish = {i: sigma[i] + dag[i].take_time for i in sigma}
    for n in dag:
        if n.is_completion:
            continue
        if n.index not in sigma:
            out.append(Violation(Constraint.C1_DEPENDENCY, (n.index,), "node never scheduled"))
            continue
        if len(mu[n.index]) != n.arm_num:
            out.append(Violation(Constraint.C3_LOCK_CHAIN, (n.index,),
                                 f"uses {len(mu[n.index])} arm(s), needs {n.arm_num}"))
        for p in n.edges:
            if dag[p].is_completion or p not in finish:
                continue
            if sigma[n.index] < finish[p] + n.delay_after:
                out.append(Violation(Constraint.C1_DEPENDENCY, (p, n.index),
                                     f"starts at {sigma[n.index]} before predecessor ready at "
                                     f"{finish[p] + n.delay_after}"))

    for arm in Arm:
        tr = sorted((e for e in plan.trace(arm) if e.end > e.start), key=lambda e: (e.start, e.end))
        for a, b in zip(tr, tr[1:]):
            if b.start < a.end:
                out.append(Violation(Constraint.C2_ARM_OVERLAP, (a.node, b.node),
                                     f"{arm.value} arm busy [{a.start},{a.end}) and [{b.start},{b.end})"))

    for chain in object_chains(dag):
        if any(i not in mu for i in chain):
            continue
        owner = mu[chain[0]]
        for i in chain[1:]:
            if dag[i].arm_num == 1 and mu[i] != owner:
                out.append(Violation(Constraint.C3_LOCK_CHAIN, (chain[0], i),
                                     f"node_{i} runs on a different arm than the pick of {dag[chain[0]].target!r}"))
            elif not owner <= mu[i]:
                out.append(Violation(Constraint.C3_LOCK_CHAIN, (chain[0], i),
                                     f"node_{i} excludes the arm holding {dag[chain[0]].target!r}"))
        last = chain[-1]
        if len(owner) != 1 or dag[last].kind is not NodeKind.PLACE:
            continue
        (arm,) = owner
        held_from, held_to = finish[chain[0]], sigma[last]
        members = set(chain)
        for e in plan.trace(arm):
            if e.node in members or dag[e.node].arm_num == 2:
                continue
            if e.start < held_to and e.end > held_from:
                out.append(Violation(Constraint.C3_LOCK_CHAIN, (chain[0], e.node),
                                     f"node_{e.node} runs on the {arm.value} arm while it holds "
                                     f"{dag[chain[0]].target!r}"))
    return out


def both_busy_intervals(plan: Plan) -> list[tuple[int, int]]:
    """Maximal intervals during which both arms are executing something."""

    def merged(entries: Iterable[ScheduleEntry]) -> list[tuple[int, int]]:
        out: list[list[int]] = []
        for e in sorted(entries):
            if e.end <= e.start:
                continue
            if out and e.start <= out[-1][1]:
                out[-1][1] = max(out[-1][1], e.end)
            else:
                out.append([e.start, e.end])
        return [(a, b) for a, b in out]

    ls, rs = merged(plan.left), merged(plan.right)
    res: list[tuple[int, int]] = []
    i = j = 0
    while i < len(ls) and j < len(rs):
        lo, hi = max(ls[i][0], rs[j][0]), min(ls[i][1], rs[j][1])
        if lo < hi:
            if res and res[-1][1] == lo:
                res[-1] = (res[-1][0], hi)
            else:
                res.append((lo, hi))
        if ls[i][1] < rs[j][1]:
            i += 1
        else:
            j += 1
    return res


def parallel_segments(plan: Plan) -> list[tuple[int, int, int, int]]:
    """Disjoint spans during which both arms run a fixed pair of entries.

    Returns ``(start, end, left_node, right_node)``; a dual-arm node shows up as a
    span whose two nodes are equal. Counting these gives the number of parallel
    intervals of a plan: a strictly sequential plan scores one per dual-arm node.
    """
    out = []
    for a in plan.left:
        for b in plan.right:
            lo, hi = max(a.start, b.start), min(a.end, b.end)
            if lo < hi:
                out.append((lo, hi, a.node, b.node))
    return sorted(out)
