"""Command-line entry point: validate, schedule, plan, bench, explain-choice."""

from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
from dataclasses import replace
from pathlib import Path

from .arms import Arm, ArmState, select
from .dag import Dag, DagError, make_node, parse_dag_text
from .fuzz import random_dag
from .gantt import gantt
from .generation import (
    GenerationContext,
    GenerationError,
    GenerationFailed,
    RemoteLLMGenerator,
    RuleBasedGenerator,
    TransportError,
    generate_with_correction,
    ideal_step_count,
    retrieve,
    rule_based_dag,
)
from .generation.pipeline import adjust_steps
from .metrics import ExecutionReport, MetricSet, metric_set, parallel_interval_count, to_csv, to_text
from .oracle import OracleError, optimal_makespan
from .packages import ParseError, bundled_corpus_path, load_corpus, parse_package_text
from .scheduler import LivelockError, schedule
from .skills import SKILLS
from .validator import diagnostics_json, render_problems, verify

EXIT_OK, EXIT_FAIL, EXIT_LIVELOCK, EXIT_INPUT = 0, 1, 2, 3

log = logging.getLogger("parasched")


class InputError(Exception):
    pass


def _read_dag(path: str) -> Dag:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse_dag_text(text)
    except ParseError as exc:
        raise InputError(f"{path}: byte {exc.offset}: {exc.message}") from exc
    except DagError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _metrics(dag: Dag, plan, ideal: int) -> MetricSet:
    ops = [n.index for n in dag if not n.is_completion]
    return metric_set(plan, ExecutionReport.all_success(ops), len(ops), max(ideal, len(ops)))


# ---- subcommands ------------------------------------------------------------------


def cmd_validate(args) -> int:
    dag = _read_dag(args.dag)
    diags = verify(dag)
    if args.format == "json":
        print(diagnostics_json(diags))
    elif diags:
        print(render_problems(diags))
    else:
        print("OK")
    return EXIT_FAIL if diags else EXIT_OK


def cmd_schedule(args) -> int:
    dag = _read_dag(args.dag)
    diags = verify(dag)
    if diags:
        print("warning: DAG has dependency problems:\n" + render_problems(diags), file=sys.stderr)
    plan = schedule(dag)
    if args.format == "json":
        print(plan.dumps())
    elif args.format == "svg":
        sys.stdout.write(gantt(plan, "svg", {n.index: n.kind.value for n in dag}))
    else:
        sys.stdout.write(gantt(plan, "ascii"))
        if plan.rollbacks:
            print(f"\nRollbacks: {plan.rollbacks}")
    return EXIT_OK


def _corpus(args):
    corpus = load_corpus(args.corpus or bundled_corpus_path())
    for err in corpus.errors:
        print(f"warning: {err}", file=sys.stderr)
    return corpus


def cmd_plan(args) -> int:
    corpus = _corpus(args)
    found = retrieve(args.instruction, corpus)
    if not found.packages:
        print("no package found", file=sys.stderr)
        return EXIT_FAIL
    pkgs = found.packages
    if args.llm:
        gen = RemoteLLMGenerator.from_env()
        try:
            pkgs = parse_package_text(adjust_steps(gen, pkgs)) or pkgs
        except ParseError as exc:
            print(f"warning: step adjustment unreadable ({exc.message}); using retrieved steps", file=sys.stderr)
    else:
        gen = RuleBasedGenerator(pkgs)
    report = generate_with_correction(gen, GenerationContext(args.instruction, list(pkgs)))
    dag = report.final_dag
    plan = schedule(dag)
    m = _metrics(dag, plan, ideal_step_count(pkgs))
    intervals = parallel_interval_count(plan)
    if args.format == "json":
        out = {
            "instruction": args.instruction,
            "scene": found.scene,
            "packages": [p.package_id for p in pkgs],
            "retries": report.retries_used,
            "dag": dag.to_json(),
            "plan": plan.to_json(),
            "metrics": {**m.as_dict(), "parallel_intervals": intervals},
        }
        print(json.dumps(out, indent=2))
        return EXIT_OK
    print(f"Retrieved {found.message}")
    print(f"Generation retries: {report.retries_used}")
    print()
    sys.stdout.write(gantt(plan, "ascii"))
    print()
    if plan.rollbacks:
        print(f"Rollbacks: {plan.rollbacks}")
    print(f"Parallel intervals: {intervals}")
    print(" ".join(f"{k}={v:.3f}" for k, v in m.as_dict().items()))
    return EXIT_OK


def _bench_groups(args) -> list[tuple[str, str, str, MetricSet]]:
    corpus = _corpus(args)
    rows = []
    for scene in sorted(corpus.scenes):
        if args.scene and scene != args.scene:
            continue
        levels = sorted({corpus.difficulty[(scene, p.package_id)] for p in corpus.scenes[scene]},
                        key=["easy", "medium", "hard"].index)
        for level in levels:
            pkgs = corpus.by_difficulty(scene, level)
            for k in range(1, min(len(pkgs), args.max_group) + 1):
                group = pkgs[:k]
                dag = rule_based_dag(group)
                plan = schedule(dag)
                label = "+".join(p.package_id for p in group)
                rows.append((scene, level, label, _metrics(dag, plan, ideal_step_count(group))))
    return rows


def _bench_oracle(args) -> int:
    lines = ["seed  nodes  scheduler  optimal  ratio"]
    ratios = []
    for seed in range(args.seed, args.seed + args.count):
        dag = random_dag(seed, args.max_nodes)
        plan = schedule(dag)
        opt = optimal_makespan(dag, node_limit=max(args.max_nodes, 10)).optimal_makespan
        r = plan.makespan / opt if opt else 1.0
        ratios.append(r)
        lines.append(f"{seed:<5} {len(dag):<6} {plan.makespan:<10} {opt:<8} {r:.3f}")
    within = sum(1 for r in ratios if r <= 1.5)
    lines.append("")
    lines.append(f"within 1.5x: {within}/{len(ratios)}  min {min(ratios):.3f}  "
                 f"median {statistics.median(ratios):.3f}  max {max(ratios):.3f}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.oracle:
        return _bench_oracle(args)
    rows = _bench_groups(args)
    if args.format == "csv":
        sys.stdout.write(to_csv(rows))
    elif args.format == "json":
        print(json.dumps([{"scene": s, "difficulty": d, "group": g, **m.as_dict()} for s, d, g, m in rows], indent=2))
    else:
        sys.stdout.write(to_text(rows))
    return EXIT_OK


def _arm_state(arm: Arm, chain: str | None, free: int, locked: bool | None) -> ArmState:
    if chain == "-":
        chain = None
    return ArmState(arm, free, bool(chain) if locked is None else locked, chain)


def cmd_explain_choice(args) -> int:
    try:
        task = make_node(1, args.task, 1, args.take_time)
    except ParseError as exc:
        raise InputError(f"task: {exc.message}") from exc
    task = replace(task, arm_num=SKILLS[task.skill].default_arms)
    left = _arm_state(Arm.LEFT, args.left, args.left_free, args.left_locked)
    right = _arm_state(Arm.RIGHT, args.right, args.right_free, args.right_locked)
    choice, branch = select(task, args.start, left, right)
    print(f"{choice.value} ({branch})")
    return EXIT_OK


# ---- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parasched", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a DAG file for dependency problems")
    v.add_argument("dag")
    v.add_argument("--format", choices=["text", "json"], default="text")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("schedule", help="schedule a DAG file onto two arms")
    s.add_argument("dag")
    s.add_argument("--format", choices=["text", "json", "svg"], default="text")
    s.set_defaults(func=cmd_schedule)

    pl = sub.add_parser("plan", help="retrieve packages for an instruction, build a DAG and schedule it")
    pl.add_argument("instruction")
    pl.add_argument("--corpus", help="corpus root (default: bundled corpus)")
    pl.add_argument("--llm", action="store_true",
                    help="generate with the remote model (PARASCHED_LLM_URL/_MODEL/_KEY)")
    pl.add_argument("--format", choices=["text", "json"], default="text")
    pl.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="metrics over cumulative package groups, or scheduler vs oracle")
    b.add_argument("--corpus")
    b.add_argument("--scene")
    b.add_argument("--max-group", type=int, default=5)
    b.add_argument("--format", choices=["text", "csv", "json"], default="text")
    b.add_argument("--oracle", action="store_true", help="compare against the exact search on random DAGs")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--count", type=int, default=50)
    b.add_argument("--max-nodes", type=int, default=8)
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("explain-choice", help="show which arm-selection branch a task takes")
    e.add_argument("task", help='skill call, e.g. \'cut(source="knife", target="carrots")\'')
    e.add_argument("--start", type=int, default=0)
    e.add_argument("--take-time", type=int, default=1)
    for side in ("left", "right"):
        e.add_argument(f"--{side}", metavar="CHAIN", help="object held by the arm ('-' for none)")
        e.add_argument(f"--{side}-free", type=int, default=0, metavar="T")
        e.add_argument(f"--{side}-locked", action=argparse.BooleanOptionalAction, default=None)
    e.set_defaults(func=cmd_explain_choice)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LivelockError as exc:
        print(f"error: scheduler livelock: {exc}", file=sys.stderr)
        return EXIT_LIVELOCK
    except (GenerationFailed, GenerationError, TransportError, OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
