"""Exact minimum-makespan search for small DAGs.

Branches over (ready node, arm option) dispatch sequences with semi-active start
times. Any feasible schedule, listed by start time, is such a sequence with
no-later start times, so the search is exhaustive. States are memoised with times
rebased to the earlier arm's free time, and left/right mirror images are folded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arms import Arm
from .dag import Dag, NodeKind
from .scheduler import Plan, ScheduleEntry


class OracleError(RuntimeError):
    pass


@dataclass
class OracleResult:
    optimal_makespan: int
    witness: Plan
    nodes_explored: int

    @property
    def assignment(self) -> dict[int, tuple[Arm, ...]]:
        return self.witness.assignment


class _Search:
    def __init__(self, dag: Dag):
        self.dag = dag
        self.ops = [i for i in dag.order if not dag[i].is_completion]
        self.comp = dag.completion
        self.max_delay = max((n.delay_after for n in dag), default=0)
        self.seen: dict[tuple, int] = {}
        self.best = math.inf
        self.best_seq: list[tuple[int, tuple[Arm, ...], int]] = []
        self.explored = 0
        # longest take+delay path from each node to the end, own duration included
        self.tail = {}
        for i in reversed(dag.order):
            n = dag[i]
            self.tail[i] = n.take_time + max(
                (dag[j].delay_after + self.tail[j] for j in dag.successors[i]), default=0
            )

    def options(self, i: int, lock: dict[Arm, str | None]) -> list[tuple[Arm, ...]]:
        n = self.dag[i]
        if n.arm_num == 2:
            if lock[Arm.LEFT] is not None and lock[Arm.RIGHT] is not None:
                return []
            return [(Arm.LEFT, Arm.RIGHT)]
        if n.kind is not NodeKind.PICK and n.source is not None:
            owner = [a for a in Arm if lock[a] == n.source]
            if owner:
                return [(owner[0],)]
            if n.kind is NodeKind.PLACE:
                return []  # placing something nobody holds
        return [(a,) for a in Arm if lock[a] is None]

    def key(self, done: frozenset, free: dict, lock: dict, finish: dict) -> tuple[tuple, int]:
        m = min(free.values())
        floor = -self.max_delay - 1
        rel = tuple(sorted(
            (p, max(f - m, floor)) for p, f in finish.items()
            if any(s not in done for s in self.dag.successors[p])
        ))
        a = (free[Arm.LEFT] - m, lock[Arm.LEFT])
        b = (free[Arm.RIGHT] - m, lock[Arm.RIGHT])
        return (done, min(a, b, key=repr), max(a, b, key=repr), rel), m

    def bound(self, done: frozenset, free: dict, finish: dict) -> int:
        lo = min(free.values())
        es: dict[int, int] = {}
        lb = max(free.values())
        work = free[Arm.LEFT] + free[Arm.RIGHT]
        for i in self.dag.order:
            if i in done:
                continue
            n = self.dag[i]
            ready = max(
                ((finish[p] if p in done else es[p] + self.dag[p].take_time) + n.delay_after for p in n.edges),
                default=0,
            )
            if n.is_completion:
                lb = max(lb, ready)
                continue
            es[i] = max(ready, max(free.values()) if n.arm_num == 2 else lo)
            lb = max(lb, es[i] + self.tail[i])
            work += n.take_time * n.arm_num
        return max(lb, math.ceil(work / 2))

    def dfs(self, done: frozenset, free: dict, lock: dict, finish: dict, seq: list) -> None:
        self.explored += 1
        if len(done) == len(self.ops):
            c = self.dag[self.comp]
            end = max(max(free.values()), max((finish[p] + c.delay_after for p in c.edges), default=0))
            if end < self.best:
                self.best = end
                self.best_seq = list(seq)
            return
        if self.bound(done, free, finish) >= self.best:
            return
        k, off = self.key(done, free, lock, finish)
        if self.seen.get(k, math.inf) <= off:
            return
        self.seen[k] = off
        for i in self.ops:
            if i in done or any(p not in done and p != self.comp for p in self.dag[i].edges):
                continue
            n = self.dag[i]
            ready = max((finish[p] + n.delay_after for p in n.edges), default=0)
            for arms in self.options(i, lock):
                s = max([ready] + [free[a] for a in arms])
                e = s + n.take_time
                nfree = dict(free)
                for a in arms:
                    nfree[a] = e
                nlock = dict(lock)
                if n.kind is NodeKind.PICK:
                    nlock[arms[0]] = n.target
                elif n.kind is NodeKind.PLACE:
                    nlock[arms[0]] = None
                seq.append((i, arms, s))
                self.dfs(done | {i}, nfree, nlock, {**finish, i: e}, seq)
                seq.pop()

    def run(self) -> OracleResult:
        self.dfs(frozenset(), {Arm.LEFT: 0, Arm.RIGHT: 0}, {Arm.LEFT: None, Arm.RIGHT: None}, {}, [])
        if self.best is math.inf:
            raise OracleError("no feasible schedule under the lock rules")
        plan = Plan()
        for i, arms, s in self.best_seq:
            n = self.dag[i]
            for a in arms:
                plan.trace(a).append(ScheduleEntry(s, s + n.take_time, i, n.name))
            plan.assignment[i] = arms
        for a in Arm:
            plan.trace(a).sort()
        c = self.dag[self.comp]
        ends = {e.node: e.end for e in plan.left + plan.right}
        plan.completion_time = max((ends[p] + c.delay_after for p in c.edges), default=0)
        plan.assignment[self.comp] = ()
        return OracleResult(int(self.best), plan, self.explored)


def optimal_makespan(dag: Dag, node_limit: int = 10) -> OracleResult:
    if len(dag) > node_limit:
        raise OracleError(f"DAG has {len(dag)} nodes; the exact search is limited to {node_limit}")
    return _Search(dag).run()
