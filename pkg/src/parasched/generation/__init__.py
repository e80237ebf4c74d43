"""Package retrieval, prompt rendering and DAG generation with bounded correction."""

from .pipeline import (
    GenerationContext,
    GenerationFailed,
    GenerationReport,
    PlanGenerator,
    RemoteLLMGenerator,
    RuleBasedGenerator,
    ScriptedGenerator,
    TransportError,
    generate_with_correction,
)
from .prompts import MissingPlaceholder, PromptKind, render_prompt
from .retrieval import retrieve, retrieve_packages
from .rule_based import GenerationError, ideal_step_count, rule_based_dag

__all__ = [
    "GenerationContext", "GenerationError", "GenerationFailed", "GenerationReport", "MissingPlaceholder",
    "PlanGenerator", "PromptKind", "RemoteLLMGenerator", "RuleBasedGenerator", "ScriptedGenerator",
    "TransportError", "generate_with_correction", "ideal_step_count", "render_prompt", "retrieve",
    "retrieve_packages", "rule_based_dag",
]
