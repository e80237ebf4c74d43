"""Dual-arm task planning: package corpus, dependency DAGs, validation and scheduling."""

from .dag import Dag, DagNode, build_graph, critical_path, parse_dag_text, serialize_dag
from .scheduler import LivelockError, Plan, schedule, validate_plan
from .validator import verify

__version__ = "0.1.0"

__all__ = [
    "Dag", "DagNode", "LivelockError", "Plan", "build_graph", "critical_path", "parse_dag_text",
    "schedule", "serialize_dag", "validate_plan", "verify",
]
