"""Report output: per-cell CSV table plus matplotlib figures of values and policy."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .lane_graph import LaneGraph  # noqa: E402
from .router import Solution  # noqa: E402

CSV_FIELDS = ("id", "lane", "s", "length", "cost", "g", "action", "success", "failure")


def write_cells_csv(graph: LaneGraph, solution: Solution, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for c in graph:
            g = solution.g.get(c.id)
            a = solution.policy.get(c.id)
            w.writerow([
                c.id,
                "" if c.lane is None else c.lane,
                "" if c.s is None else repr(c.s),
                repr(c.length),
                repr(c.cost),
                "" if g is None else f"{g:.9g}",
                "" if a is None else a.kind.label,
                "" if a is None else a.success,
                "" if a is None or a.failure is None else a.failure,
            ])


def _positions(graph: LaneGraph):
    if graph.has_layout:
        return {c.id: (c.s, c.lane) for c in graph}
    return {cid: (float(i), 0) for i, cid in enumerate(graph.ids)}


def plot_values(graph: LaneGraph, solution: Solution, path: Path) -> None:
    """Cost-to-go along each lane."""
    pos = _positions(graph)
    by_lane: dict[int, list[tuple[float, float]]] = {}
    for cid, (s, lane) in pos.items():
        g = solution.g.get(cid)
        if g is not None:
            by_lane.setdefault(lane, []).append((s, g))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for lane in sorted(by_lane):
        pts = sorted(by_lane[lane])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], ".-", ms=3, lw=1, label=f"lane {lane}")
    ax.set_xlabel("position s [m]" if graph.has_layout else "cell index")
    ax.set_ylabel("expected cost to goal")
    if by_lane and len(by_lane) <= 12:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_policy(graph: LaneGraph, solution: Solution, path: Path, window: tuple[float, float] | None = None) -> None:
    """Policy arrows: solid to the intended target, dashed to the lane-change fallback."""
    pos = _positions(graph)
    fig, ax = plt.subplots(figsize=(10, 3 + 0.25 * len({p[1] for p in pos.values()})))
    shown = {cid: sl for cid, sl in pos.items() if not window or window[0] <= sl[0] <= window[1]}
    if shown:
        ax.plot([sl[0] for sl in shown.values()], [sl[1] for sl in shown.values()],
                "s", color="0.8", ms=3, zorder=0)
    for cid, (s, lane) in shown.items():
        a = solution.policy.get(cid)
        if cid == solution.goal:
            ax.plot([s], [lane], "o", color="tab:red", ms=6)
        if a is None or solution.g.get(cid) is None:
            continue
        for target, ls in ((a.success, "-"), (a.failure, "--")):
            if target is None:
                continue
            ts, tl = pos[target]
            ax.annotate(
                "", xy=(ts, tl), xytext=(s, lane),
                arrowprops=dict(arrowstyle="->", color="tab:red", ls=ls, lw=0.8),
            )
    ax.margins(0.05)
    ax.set_xlabel("position s [m]" if graph.has_layout else "cell index")
    ax.set_ylabel("lane")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def write_report(graph: LaneGraph, solution: Solution, out_dir: Path | str,
                 window: tuple[float, float] | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "cells.csv", out / "values.png", out / "policy.png"]
    write_cells_csv(graph, solution, paths[0])
    plot_values(graph, solution, paths[1])
    plot_policy(graph, solution, paths[2], window)
    return paths
