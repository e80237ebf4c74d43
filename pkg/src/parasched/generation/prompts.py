"""Prompt templates kept as text assets with ``{placeholder}`` markers."""

from __future__ import annotations

import enum
import re
from collections.abc import Mapping
from functools import cache
from importlib import resources


class PromptKind(enum.Enum):
    STEPS = "steps"
    DAG_FIRST = "dag_first"
    DAG_CORRECTION = "dag_correction"


class MissingPlaceholder(KeyError):
    pass


# a placeholder is a braced run of letters, spaces and underscores; the doubled-brace
# index hint in the response format never matches
_PLACEHOLDER = re.compile(r"(?<!\{)\{([A-Za-z_][A-Za-z_ ]*)\}(?!\})")


@cache
def template(kind: PromptKind) -> str:
    return (resources.files("parasched") / "data" / "templates" / f"{kind.value}.txt").read_text("utf-8")


def placeholders(kind: PromptKind) -> list[str]:
    return _PLACEHOLDER.findall(template(kind))


def render_prompt(kind: PromptKind | str, context: Mapping[str, str]) -> str:
    """Substitute every placeholder; empty or absent values are an error."""
    if isinstance(kind, str):
        kind = PromptKind(kind)

    def sub(m: re.Match) -> str:
        value = context.get(m.group(1))
        if value is None or value == "":
            raise MissingPlaceholder(m.group(1))
        return str(value)

    return _PLACEHOLDER.sub(sub, template(kind))
