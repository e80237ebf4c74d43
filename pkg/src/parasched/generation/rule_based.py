"""Deterministic offline DAG construction from task packages.

Encodes the dependency criteria the DAG prompt asks the language model to follow:
per-object pick -> use chain -> place spines, tool uses linearised behind one pick,
targets placed before the acting tool is picked, containers opened before retrieval
and closed after the last one, waiting steps folded into ``delay_after``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from ..dag import CycleError, Dag, DagNode, build_graph
from ..packages import PackageStep, TaskPackage
from ..skills import COMPLETION_SKILL, CONTAINER_CLOSERS, CONTAINER_OPENERS, Category


class GenerationError(ValueError):
    pass


@dataclass
class _Op:
    key: int
    step: PackageStep
    pos: int
    edges: set[int] = field(default_factory=set)
    delay: int = 0


@dataclass
class _Session:
    """One pick ... uses ... place run of a single object inside one package."""

    obj: str
    package: str
    pick: _Op
    uses: list[_Op] = field(default_factory=list)
    place: _Op | None = None
    merged_into: "_Session | None" = None

    def root(self) -> "_Session":
        s = self
        while s.merged_into is not None:
            s = s.merged_into
        return s

    def signature(self) -> set[tuple[str, str]]:
        return {(u.step.skill, self.obj) for u in self.uses}


class _Builder:
    def __init__(self, pkgs: list[TaskPackage]):
        self.pkgs = sorted(pkgs, key=lambda p: p.package_id)
        self.ops: list[_Op] = []
        self.sessions: list[_Session] = []
        self.session_of: dict[int, _Session] = {}  # op key -> session (pick/use/place ops)
        self.free_ops: list[_Op] = []  # container switches and target-only uses
        self.waits: list[tuple[_Op | None, PackageStep, int]] = []  # (op before wait, wait step, pos)
        self.after_wait: dict[int, tuple[int, _Op | None]] = {}

    def _new(self, step: PackageStep, pos: int) -> _Op:
        op = _Op(len(self.ops), step, pos)
        self.ops.append(op)
        return op

    # ---- pass 1: sessions -------------------------------------------------------
    def collect(self) -> None:
        pos = 0
        for pkg in self.pkgs:
            holding: dict[str, _Session] = {}
            container_open: dict[str, _Op] = {}
            container_closed: set[str] = set()
            prev_op: _Op | None = None
            pending_wait = 0
            for step in pkg.steps:
                pos += 1
                cat = step.category
                if cat is Category.WAIT:
                    pending_wait += step.duration
                    continue
                op = self._new(step, pos)
                if pending_wait:
                    op.delay += pending_wait
                    self.after_wait[op.key] = (pending_wait, prev_op)
                    pending_wait = 0
                if cat is Category.PICK:
                    obj = step.target
                    if obj in holding:
                        raise GenerationError(f"{step.step_id}: {obj!r} picked again before being placed")
                    if step.source in container_closed:
                        raise GenerationError(f"{step.step_id}: picking from closed container {step.source!r}")
                    s = _Session(obj, pkg.package_id, op)
                    holding[obj] = s
                    self.sessions.append(s)
                    self.session_of[op.key] = s
                elif cat is Category.PLACE or (cat is Category.TOOL_USE and step.source is not None):
                    s = holding.get(step.source)
                    if s is None:
                        raise GenerationError(f"{step.step_id}: {step.source!r} is not held (no matching pick)")
                    self.session_of[op.key] = s
                    if cat is Category.PLACE:
                        s.place = op
                        del holding[step.source]
                    else:
                        s.uses.append(op)
                else:
                    self.free_ops.append(op)
                    if step.skill in CONTAINER_OPENERS:
                        if step.target in container_open:
                            raise GenerationError(f"{step.step_id}: {step.target!r} opened twice")
                        container_open[step.target] = op
                        container_closed.discard(step.target)
                    elif step.skill in CONTAINER_CLOSERS:
                        container_open.pop(step.target, None)
                        container_closed.add(step.target)
                prev_op = op
            if holding:
                obj = next(iter(holding))
                raise GenerationError(f"package {pkg.package_id}: {obj!r} picked but never placed")
            if pending_wait:
                self.trailing_wait = getattr(self, "trailing_wait", 0) + pending_wait

    # ---- pass 2: merge shared-tool sessions across packages ---------------------
    def merge_candidates(self) -> list[tuple[_Session, _Session]]:
        out = []
        for k, s in enumerate(self.sessions):
            if not s.uses:
                continue
            for earlier in self.sessions[:k]:
                r = earlier.root()
                if r is earlier and r.obj == s.obj and r.package != s.package and r.uses and (
                    (s.uses[0].step.skill, s.obj) in r.signature()
                ):
                    out.append((s, r))
                    break
        return out

    # ---- pass 3: edges ------------------------------------------------------------
    def node_of(self, op: _Op) -> _Op:
        """Surviving op that stands for ``op`` (merged picks map to the kept pick)."""
        s = self.session_of.get(op.key)
        if s is None or s.merged_into is None:
            return op
        r = s.root()
        if op is s.pick:
            return r.pick
        if op is s.place:
            return r.place
        return op

    def live_ops(self) -> list[_Op]:
        out = []
        for op in self.ops:
            s = self.session_of.get(op.key)
            if s is not None and s.merged_into is not None and (op is s.pick or op is s.place):
                continue
            out.append(op)
        return out

    def wire(self) -> None:
        for op in self.ops:
            op.edges = set()
            op.delay = 0
        for key, (delay, _) in self.after_wait.items():
            self.ops[key].delay = delay
        roots = [s for s in self.sessions if s.merged_into is None]
        members: dict[int, list[_Session]] = {id(r): [r] for r in roots}
        for s in self.sessions:
            if s.merged_into is not None:
                members[id(s.root())].append(s)

        def place_before(obj: str, pos: int) -> _Op | None:
            """Place op of the latest session of ``obj`` whose place precedes ``pos``."""
            best = None
            for s in self.sessions:
                if s.obj == obj and s.place is not None and s.place.pos < pos:
                    if best is None or s.place.pos > best.pos:
                        best = s.place
            return None if best is None else self.node_of(best)

        for r in roots:
            chain = [u for m in sorted(members[id(r)], key=lambda m: m.pick.pos) for u in m.uses]
            pick = r.pick
            prev = pick
            for u in chain:
                u.edges = {prev.key}
                prev = u
            if r.place is not None:
                r.place.edges = {prev.key}
            # pick waits for: earlier session of the same object, destination and
            # use targets already placed, the pick location if it was placed
            deps: set[int] = set()
            for m in members[id(r)]:
                earlier = place_before(r.obj, m.pick.pos)
                if earlier is not None:
                    deps.add(earlier.key)
                loc = place_before(m.pick.step.source, m.pick.pos)
                if loc is not None:
                    deps.add(loc.key)
                for u in m.uses:
                    t = place_before(u.step.target, u.pos)
                    if t is not None:
                        deps.add(t.key)
                if any(u.step.arm_count == 2 for u in m.uses):
                    # processing with both hands starts once the package's objects are set down
                    for other in self.sessions:
                        if (other.package == m.package and other.place is not None
                                and other.place.pos < m.pick.pos):
                            deps.add(self.node_of(other.place).key)
                if m.place is not None:
                    d = place_before(m.place.step.target, m.place.pos)
                    if d is not None:
                        deps.add(d.key)
            deps.discard(pick.key)
            if r.place is not None:
                deps.discard(r.place.key)
            pick.edges |= deps

        self._wire_free_ops()
        for key, (_, before) in self.after_wait.items():
            op = self.node_of(self.ops[key])
            if before is None:
                continue
            before = self.node_of(before)
            cat = op.step.category
            if cat in (Category.PICK, Category.CONTAINER_SWITCH) and before.key != op.key:
                op.edges.add(before.key)
            op.delay = max(op.delay, self.ops[key].delay)

    def _wire_free_ops(self) -> None:
        by_pkg: dict[str, list[_Op]] = {}
        for op in self.ops:
            by_pkg.setdefault(op.step.step_id[0], []).append(op)
        for ops in by_pkg.values():
            last_closer: dict[str, _Op] = {}
            opener: dict[str, _Op] = {}
            window: dict[str, list[_Op]] = {}
            for op in ops:
                st = op.step
                if st.skill in CONTAINER_OPENERS:
                    if st.target in last_closer:
                        op.edges.add(last_closer[st.target].key)
                    opener[st.target] = op
                    window[st.target] = []
                elif st.skill in CONTAINER_CLOSERS:
                    c = st.target
                    touched = [self.node_of(o) for o in window.get(c, [])]
                    if touched:
                        op.edges |= {o.key for o in touched}
                    elif c in opener:
                        op.edges.add(opener[c].key)
                    last_closer[c] = op
                    opener.pop(c, None)
                    window[c] = []
                elif st.category is Category.PICK:
                    if st.source in opener:
                        self.node_of(op).edges.add(opener[st.source].key)
                    window.setdefault(st.source, []).append(op)
                elif st.category is Category.PLACE:
                    window.setdefault(st.target, []).append(op)
                    if st.target in opener:
                        # returning into an open container: open before the pick
                        s = self.session_of[op.key].root()
                        s.pick.edges.add(opener[st.target].key)
                elif st.category is Category.TOOL_USE and st.source is None:
                    for o in reversed(ops[: ops.index(op)]):
                        if o.step.category is Category.PLACE and o.step.source == st.target:
                            op.edges.add(self.node_of(o).key)
                            break

    # ---- pass 4: emit ------------------------------------------------------------
    def emit(self) -> Dag:
        live = self.live_ops()
        keys = {op.key for op in live}
        succ: dict[int, list[int]] = {k: [] for k in keys}
        indeg = {op.key: 0 for op in live}
        for op in live:
            op.edges = {e for e in op.edges if e in keys}
            for e in op.edges:
                succ[e].append(op.key)
            indeg[op.key] = len(op.edges)
        pos = {op.key: op.pos for op in live}
        for s in self.sessions:
            r = s.root()
            if r is not s:
                pos[r.pick.key] = min(pos[r.pick.key], s.pick.pos)
        heap = [(pos[k], k) for k, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        index: dict[int, int] = {}
        while heap:
            _, k = heapq.heappop(heap)
            index[k] = len(index) + 1
            for j in succ[k]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(heap, (pos[j], j))
        if len(index) != len(live):
            stuck = next(k for k in keys if k not in index)
            raise CycleError((stuck, stuck))
        nodes = []
        for op in live:
            st = op.step
            nodes.append(
                DagNode(
                    index[op.key], st.skill, st.source, st.target, st.arm_count, st.duration,
                    tuple(sorted(index[e] for e in op.edges)), op.delay,
                )
            )
        sinks = sorted(index[k] for k in keys if not succ[k])
        nodes.append(DagNode(len(index) + 1, COMPLETION_SKILL, None, None, 0, 0, tuple(sinks),
                             getattr(self, "trailing_wait", 0)))
        return build_graph(nodes)


def rule_based_dag(pkgs: list[TaskPackage]) -> Dag:
    b = _Builder(list(pkgs))
    b.collect()
    # merge shared-tool sessions one at a time, backing out any merge that cycles
    for s, target in b.merge_candidates():
        if s.merged_into is not None or target.root() is not target:
            continue
        s.merged_into = target
        b.wire()
        try:
            b.emit()
        except CycleError:
            s.merged_into = None
    b.wire()
    try:
        return b.emit()
    except CycleError as exc:
        raise GenerationError(f"packages produce contradictory ordering: {exc}") from exc


def ideal_step_count(pkgs: list[TaskPackage]) -> int:
    """Package steps that would each be a node without merging (waits excluded)."""
    return sum(1 for p in pkgs for s in p.steps if s.category is not Category.WAIT)
