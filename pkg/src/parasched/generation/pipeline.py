"""Plan generators and the bounded generate/verify/correct loop."""

from __future__ import annotations

import json
import logging
import os
import urllib.error
import urllib.request
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Protocol

from ..dag import Dag, DagError, parse_dag_text, serialize_dag
from ..packages import ParseError, TaskPackage, serialize_packages
from ..skills import skill_list_text
from ..validator import Diagnostic, render_problems, verify
from .prompts import PromptKind, render_prompt
from .rule_based import rule_based_dag

log = logging.getLogger(__name__)

MAX_RETRIES = 2
ENV_URL, ENV_MODEL, ENV_KEY = "PARASCHED_LLM_URL", "PARASCHED_LLM_MODEL", "PARASCHED_LLM_KEY"


class PlanGenerator(Protocol):
    def generate(self, prompt: str) -> str: ...


class TransportError(RuntimeError):
    pass


class RuleBasedGenerator:
    """Ignores the prompt; builds the DAG from structured packages."""

    def __init__(self, packages: Sequence[TaskPackage]):
        self.packages = list(packages)

    def generate(self, prompt: str) -> str:
        return serialize_dag(rule_based_dag(self.packages))


class ScriptedGenerator:
    """Replays canned responses in order; records the prompts it was given."""

    def __init__(self, responses: Iterable[str]):
        self.responses = list(responses)
        self.prompts: list[str] = []

    @property
    def calls(self) -> int:
        return len(self.prompts)

    def generate(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if len(self.prompts) > len(self.responses):
            raise TransportError("scripted generator ran out of responses")
        return self.responses[len(self.prompts) - 1]


class RemoteLLMGenerator:
    """Chat-completion style endpoint; the whole prompt is sent as one user message."""

    def __init__(self, url: str, model: str, key: str, timeout: float = 120.0):
        self.url, self.model, self.key, self.timeout = url, model, key, timeout

    @classmethod
    def from_env(cls, environ=os.environ) -> "RemoteLLMGenerator":
        missing = [v for v in (ENV_URL, ENV_MODEL, ENV_KEY) if not environ.get(v)]
        if missing:
            raise TransportError(f"remote mode needs {', '.join(missing)} set")
        return cls(environ[ENV_URL], environ[ENV_MODEL], environ[ENV_KEY])

    def generate(self, prompt: str) -> str:
        body = json.dumps({"model": self.model, "messages": [{"role": "user", "content": prompt}]}).encode()
        req = urllib.request.Request(
            self.url, data=body, method="POST",
            headers={"Content-Type": "application/json", "Authorization": f"Bearer {self.key}"},
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                data = json.load(resp)
        except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
            raise TransportError(f"LLM request failed: {exc}") from exc
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError("unexpected LLM response shape") from exc


@dataclass
class GenerationContext:
    instruction: str
    packages: list[TaskPackage]
    environment: str = ""

    def dag_prompt_fields(self) -> dict[str, str]:
        scene = next((p.scene for p in self.packages if p.scene), "")
        return {
            "target_env": self.environment or (f"{scene} scene" if scene else "tabletop"),
            "instruction": self.instruction,
            "rag_output": "\n" + serialize_packages(self.packages).rstrip("\n"),
            "List of skills": skill_list_text(),
        }


@dataclass
class Round:
    response: str
    diagnostics: list[Diagnostic] = field(default_factory=list)
    error: str | None = None  # parse or structure failure

    @property
    def ok(self) -> bool:
        return self.error is None and not self.diagnostics

    def problems(self) -> str:
        if self.error is not None:
            return f"The DAG could not be read: {self.error}"
        return render_problems(self.diagnostics)


@dataclass
class GenerationReport:
    final_dag: Dag | None
    retries_used: int
    rounds: list[Round]

    @property
    def diagnostics_per_round(self) -> list[list[Diagnostic]]:
        return [r.diagnostics for r in self.rounds]

    @property
    def calls(self) -> int:
        return len(self.rounds)


class GenerationFailed(RuntimeError):
    def __init__(self, report: GenerationReport):
        last = report.rounds[-1]
        super().__init__(f"no valid DAG after {report.retries_used} retries: {last.problems()}")
        self.report = report


def _assess(text: str) -> tuple[Round, Dag | None]:
    try:
        dag = parse_dag_text(text)
    except (ParseError, DagError) as exc:
        return Round(text, error=str(exc)), None
    return Round(text, verify(dag)), dag


def generate_with_correction(gen: PlanGenerator, context: GenerationContext) -> GenerationReport:
    """Generate, verify, and ask for corrections at most twice (three calls in total)."""
    prompt = render_prompt(PromptKind.DAG_FIRST, context.dag_prompt_fields())
    rounds: list[Round] = []
    while True:
        rnd, dag = _assess(gen.generate(prompt))
        rounds.append(rnd)
        retries = len(rounds) - 1
        if rnd.ok:
            return GenerationReport(dag, retries, rounds)
        if retries >= MAX_RETRIES:
            raise GenerationFailed(GenerationReport(dag, retries, rounds))
        log.info("round %d rejected: %s", len(rounds), rnd.problems())
        prompt = render_prompt(PromptKind.DAG_CORRECTION, {"response": rnd.response, "problems_section": rnd.problems()})


def adjust_steps(gen: PlanGenerator, packages: Sequence[TaskPackage]) -> str:
    """One step-repair call (remote mode only); returns the raw package text."""
    return gen.generate(render_prompt(PromptKind.STEPS, {"context": serialize_packages(packages)}))
