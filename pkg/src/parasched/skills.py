"""Skill library shared by the package parser, the DAG model and the validator."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Category(enum.Enum):
    PICK = "pick"
    PLACE = "place"
    TOOL_USE = "tool_use"
    CONTAINER_SWITCH = "container_switch"
    COMPLETION = "completion"
    # package-only pseudo skill, folded into delay_after by the generator
    WAIT = "wait"


@dataclass(frozen=True)
class SkillSpec:
    name: str
    category: Category
    has_source: bool
    default_arms: int
    description: str = ""


def _s(name, category, has_source, arms, description):
    return SkillSpec(name, category, has_source, arms, description)


_C = Category
SKILLS: dict[str, SkillSpec] = {
    s.name: s
    for s in [
        _s("pick", _C.PICK, True, 1, 'Pick the "target" object from the "source" placement.'),
        _s("place", _C.PLACE, True, 1, 'Place the "source" object into/on the "target" area.'),
        _s("slide_open", _C.CONTAINER_SWITCH, False, 1, "Slide open a prismatic-joint object (e.g., drawer)."),
        _s("slide_close", _C.CONTAINER_SWITCH, False, 1, "Slide close a prismatic-joint object (e.g., drawer)."),
        _s("flap_open", _C.CONTAINER_SWITCH, False, 1, "Rotate open a revolute-joint object (e.g., microwave)."),
        _s("flap_close", _C.CONTAINER_SWITCH, False, 1, "Rotate close a revolute-joint object (e.g., oven)."),
        _s("push_to", _C.TOOL_USE, True, 1, 'Push the "target" object to a specified location.'),
        _s("lift_from", _C.TOOL_USE, True, 2, 'Lift the "source" object from the "target" surface.'),
        _s("open_cap", _C.CONTAINER_SWITCH, False, 2, 'Open the cap of the "target" object.'),
        _s("close_cap", _C.CONTAINER_SWITCH, False, 2, 'Close the cap of the "target" object.'),
        _s("wipe", _C.TOOL_USE, True, 1, 'Wipe the "target" using the "source" object.'),
        _s("stick_on", _C.TOOL_USE, True, 1, 'Stick the "source" object onto the "target".'),
        _s("pour_into", _C.TOOL_USE, True, 1, 'Pour the "source" substance into the "target" container.'),
        _s("cut", _C.TOOL_USE, True, 2, 'Use the "source" tool to cut the "target".'),
        _s("stir", _C.TOOL_USE, True, 2, 'Use the "source" tool to stir the "target".'),
        _s("press_open", _C.CONTAINER_SWITCH, False, 1, 'Press to open the "target" object.'),
        _s("press_close", _C.CONTAINER_SWITCH, False, 1, 'Press to close the "target" object.'),
        _s("write", _C.TOOL_USE, True, 1, 'Use the "source" to write on the "target".'),
        _s("inspect", _C.TOOL_USE, True, 1, 'Inspect the "target" area using the "source".'),
        _s("bind", _C.TOOL_USE, True, 2, 'Bind the "source" to the "target" support.'),
        _s("weld", _C.TOOL_USE, True, 2, 'Weld the "target" using the "source" welding tool.'),
        _s("scan", _C.TOOL_USE, True, 1, 'Scan the "target" object with the "source" scanner.'),
        _s("tighten", _C.TOOL_USE, True, 1, 'Tighten the "target" component using the "source".'),
        # target-only tool skill; treated as ToolUse without a source object
        _s("align", _C.TOOL_USE, False, 1, 'Align the "target" component to its correct pose.'),
        _s("assemble", _C.TOOL_USE, True, 2, 'Assemble the "target" part with the "source" tool.'),
        _s("drill", _C.TOOL_USE, True, 2, 'Drill holes into the "target" with the "source" drill.'),
        _s("mark", _C.TOOL_USE, True, 1, 'Mark the "target" object using the "source".'),
        _s("wait", _C.WAIT, False, 1, 'Wait for the "target" to finish (folded into delay_after).'),
    ]
}

COMPLETION_SKILL = "task_completion"

CONTAINER_OPENERS = {
    "slide_open": "slide_close",
    "flap_open": "flap_close",
    "open_cap": "close_cap",
    "press_open": "press_close",
}
CONTAINER_CLOSERS = {v: k for k, v in CONTAINER_OPENERS.items()}


def lookup(name: str) -> SkillSpec | None:
    return SKILLS.get(name)


def skills_of(category: Category) -> list[str]:
    return [s.name for s in SKILLS.values() if s.category is category]


def skill_list_text() -> str:
    """Render the skill table the way the DAG prompt embeds it."""
    lines = []
    for s in SKILLS.values():
        if s.category is Category.WAIT:
            continue
        params = "source, target" if s.has_source else "target"
        arms = "Dual" if s.default_arms == 2 else "Left/Right"
        lines.append(f"{s.name}({params}): {s.description} [{arms}]")
    return "\n".join(lines)
