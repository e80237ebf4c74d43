"""Arm selection for a ready node given both arms' free time and lock state."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .dag import DagNode, NodeKind


class Arm(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def other(self) -> "Arm":
        return Arm.RIGHT if self is Arm.LEFT else Arm.LEFT


class ArmChoice(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    BOTH = "Both"
    NONE = "None"

    @classmethod
    def of(cls, arm: Arm) -> "ArmChoice":
        return cls.LEFT if arm is Arm.LEFT else cls.RIGHT

    @property
    def arms(self) -> tuple[Arm, ...]:
        return {
            ArmChoice.LEFT: (Arm.LEFT,),
            ArmChoice.RIGHT: (Arm.RIGHT,),
            ArmChoice.BOTH: (Arm.LEFT, Arm.RIGHT),
            ArmChoice.NONE: (),
        }[self]


@dataclass(frozen=True)
class ArmState:
    arm: Arm
    free_time: int = 0
    locked: bool = False
    chain: str | None = None

    def owns(self, obj: str | None) -> bool:
        return self.chain == obj


def match_object(task: DagNode) -> str | None:
    """Object compared against lock chains: target for picks, source otherwise,
    target again when the skill has no source."""
    if task.kind is NodeKind.PICK or task.source is None:
        return task.target
    return task.source


def select(task: DagNode, start: int, left: ArmState, right: ArmState) -> tuple[ArmChoice, str]:
    """Return the choice plus a label naming the branch that produced it."""
    arms = (left, right)
    src = task.source if task.source is not None else task.target
    dual = task.arm_num == 2

    if task.kind is NodeKind.PLACE:
        for a in arms:
            if a.owns(src) and a.free_time <= start:
                return ArmChoice.of(a.arm), "place-override"
        return ArmChoice.NONE, "place-override"

    if left.locked and right.locked:
        obj = match_object(task)
        ml, mr = left.owns(obj), right.owns(obj)
        if dual:
            if ml and mr:
                return ArmChoice.BOTH, "case-I-dual"
            if (ml and right.chain is None) or (mr and left.chain is None):
                return ArmChoice.BOTH, "case-I-dual"
            return ArmChoice.NONE, "case-I-dual"
        if ml and not mr and left.free_time <= start:
            return ArmChoice.LEFT, "case-I-single"
        if mr and not ml and right.free_time <= start:
            return ArmChoice.RIGHT, "case-I-single"
        if ml and mr:
            return (ArmChoice.LEFT if left.free_time <= right.free_time else ArmChoice.RIGHT), "case-I-single"
        return ArmChoice.NONE, "case-I-single"

    if dual:
        return ArmChoice.BOTH, "case-II"

    if left.locked or right.locked:
        a, b = (left, right) if left.locked else (right, left)
        if a.owns(src) and a.free_time <= start:
            return ArmChoice.of(a.arm), "case-III"
        if b.free_time <= start:
            return ArmChoice.of(b.arm), "case-III"
        return ArmChoice.NONE, "case-III"

    return (ArmChoice.LEFT if left.free_time <= right.free_time else ArmChoice.RIGHT), "case-IV"


def choose_arm(task: DagNode, start: int, left: ArmState, right: ArmState) -> ArmChoice:
    return select(task, start, left, right)[0]
