"""Plan rendering: the two-table text layout and a simple SVG timeline."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .arms import Arm
from .scheduler import Plan

FORMATS = ("ascii", "svg")

_LANE_H = 28
_LABEL_W = 60
_SCALE = 8  # px per second
_COLORS = {"pick": "#8ecae6", "place": "#ffb703", "tool_use": "#90be6d", "container_switch": "#cdb4db"}


def _lane_text(plan: Plan, arm: Arm) -> list[str]:
    return [f"{f'{e.start}-{e.end}':<7} {e.name}" for e in plan.trace(arm)]


def render_ascii(plan: Plan) -> str:
    lines = [f"Total execution time: {plan.makespan} seconds", "", "Left arm schedule table:"]
    lines += _lane_text(plan, Arm.LEFT)
    lines += ["", "Right arm schedule table:"]
    lines += _lane_text(plan, Arm.RIGHT)
    return "\n".join(lines) + "\n"


def render_svg(plan: Plan, kinds: dict[int, str] | None = None) -> str:
    """Two lanes of rectangles; zero-length entries are omitted."""
    kinds = kinds or {}
    width = _LABEL_W + max(plan.makespan, 1) * _SCALE + 20
    height = 2 * _LANE_H + 40
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="4" y="{height - 8}" font-size="11">makespan {plan.makespan} s</text>',
    ]
    for row, arm in enumerate(Arm):
        y = 10 + row * _LANE_H
        out.append(f'<text x="4" y="{y + 17}" font-size="12">{arm.value}</text>')
        for e in plan.trace(arm):
            if e.end <= e.start:
                continue
            x = _LABEL_W + e.start * _SCALE
            w = (e.end - e.start) * _SCALE
            fill = _COLORS.get(kinds.get(e.node, ""), "#dddddd")
            out.append(
                f'<rect x="{x}" y="{y}" width="{w}" height="{_LANE_H - 4}" fill="{fill}" stroke="#333">'
                f"<title>{escape(f'node_{e.node} {e.start}-{e.end} {e.name}')}</title></rect>"
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def gantt(plan: Plan, fmt: str = "ascii", kinds: dict[int, str] | None = None) -> str:
    if fmt == "ascii":
        return render_ascii(plan)
    if fmt == "svg":
        return render_svg(plan, kinds)
    raise ValueError(f"unknown gantt format {fmt!r}; expected one of {', '.join(FORMATS)}")
