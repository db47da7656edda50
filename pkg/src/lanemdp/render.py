"""Text renderings of a policy: SVG arrows and ASCII grids/tables.

Arrows run from the beginning of a cell to the beginning of the target cell;
solid for the intended (success) target, dashed for the in-lane fallback of a
lane change.
"""

from __future__ import annotations

from .lane_graph import LaneGraph
from .mdp import ActionKind
from .router import Solution

CELL_PX = 40.0
ROW_PX = 40.0
MARGIN = 20.0

FORMATS = ("svg", "ascii")


def _layout(graph: LaneGraph) -> dict[str, tuple[float, float, float]]:
    """Cell id -> (x, y, width) in pixels; cells without hints go on one row in id order."""
    if graph.has_layout:
        lanes = [c.lane for c in graph]
        top = max(lanes)
        scale = CELL_PX / min(c.length for c in graph)
        return {
            c.id: (MARGIN + c.s * scale, MARGIN + (top - c.lane) * ROW_PX, c.length * scale)
            for c in graph
        }
    return {cid: (MARGIN + i * CELL_PX, MARGIN, CELL_PX) for i, cid in enumerate(graph.ids)}


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_svg(graph: LaneGraph, solution: Solution) -> bytes:
    pos = _layout(graph)
    width = max((x + w for x, _, w in pos.values()), default=0.0) + MARGIN
    height = max((y for _, y, _ in pos.values()), default=0.0) + ROW_PX + MARGIN
    half = ROW_PX / 2
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        "<defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" "
        "orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"#c00\"/></marker></defs>",
        '<g class="cells">',
    ]
    for cid in graph.ids:
        x, y, w = pos[cid]
        if cid == solution.goal:
            fill = "#f4a6a6"
        elif solution.g.get(cid) is None:
            fill = "#dddddd"
        else:
            fill = "#ffffff"
        out.append(
            f'<rect id="cell-{cid}" x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(ROW_PX)}" '
            f'fill="{fill}" stroke="#888" stroke-width="0.5"/>'
        )
    out.append("</g>")
    out.append('<g class="policy" stroke="#c00" stroke-width="1.5" fill="none">')
    for cid in graph.ids:
        a = solution.policy.get(cid)
        if a is None or solution.g.get(cid) is None:
            continue
        x0, y0, _ = pos[cid]
        for target, style in ((a.success, "solid"), (a.failure, "dashed")):
            if target is None:
                continue
            x1, y1, _ = pos[target]
            dash = ' stroke-dasharray="4 3"' if style == "dashed" else ""
            out.append(
                f'<line class="arrow {style}" data-from="{cid}" data-to="{target}" '
                f'x1="{_f(x0)}" y1="{_f(y0 + half)}" x2="{_f(x1)}" y2="{_f(y1 + half)}"'
                f'{dash} marker-end="url(#head)"/>'
            )
    out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _glyph(graph: LaneGraph, solution: Solution, cid: str) -> str:
    if cid == solution.goal:
        return "G"
    a = solution.policy.get(cid)
    if a is None or solution.g.get(cid) is None:
        return "."
    if a.kind == ActionKind.STAY:
        return "-"
    here, there = graph[cid].lane, graph[a.success].lane
    up = there is not None and here is not None and there > here
    if a.kind == ActionKind.LANE_CHANGE:
        return "/" if up else "\\"
    return "^" if up else "v"


ASCII_LEGEND = (
    "legend: - stay, / lane change left, \\ lane change right, "
    "^ forced left, v forced right, G goal, . unreachable"
)


def render_ascii(graph: LaneGraph, solution: Solution) -> bytes:
    """Lane grid when layout hints exist, else one table row per cell."""
    lines = []
    if graph.has_layout:
        columns = sorted({c.s for c in graph})
        col = {s: i for i, s in enumerate(columns)}
        rows: dict[int, list[str]] = {}
        for c in graph:
            row = rows.setdefault(c.lane, [" "] * len(columns))
            row[col[c.s]] = _glyph(graph, solution, c.id)
        for lane in sorted(rows, reverse=True):
            lines.append(f"{lane:>4} |" + "".join(rows[lane]).rstrip())
        lines.append(ASCII_LEGEND)
    else:
        lines.append(f"{'cell':<16} {'g':>14}  {'action':<18} {'success':<16} failure")
        for cid in graph.ids:
            g = solution.g.get(cid)
            a = solution.policy.get(cid)
            lines.append(
                f"{cid:<16} {'-' if g is None else f'{g:.9g}':>14}  "
                f"{'-' if a is None else a.kind.label:<18} "
                f"{'-' if a is None else a.success:<16} "
                f"{'-' if a is None or a.failure is None else a.failure}"
            )
    return ("\n".join(lines) + "\n").encode("utf-8")


def render_policy(graph: LaneGraph, solution: Solution, fmt: str) -> bytes:
    if fmt == "svg":
        return render_svg(graph, solution)
    if fmt == "ascii":
        return render_ascii(graph, solution)
    raise ValueError(f"unknown render format {fmt!r} (expected one of {', '.join(FORMATS)})")
