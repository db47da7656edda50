"""Directed lane graph: cells, neighbor/successor topology, validation and JSON I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

GRAPH_FORMAT_VERSION = 1

_CELL_REQUIRED = ("id", "length", "cost", "left", "right", "successors")
_CELL_OPTIONAL = ("lane", "s")


@dataclass(frozen=True)
class Cell:
    """One drivable portion of a lane.

    ``lane`` and ``s`` are optional layout hints (lane index counted from the
    right, longitudinal position in meters) used only for rendering.
    """

    id: str
    length: float
    cost: float
    left: str | None = None
    right: str | None = None
    successors: tuple[str, ...] = ()
    lane: int | None = None
    s: float | None = None

    def __post_init__(self):
        if not isinstance(self.successors, tuple):
            object.__setattr__(self, "successors", tuple(self.successors))


@dataclass(frozen=True, order=True)
class Violation:
    cells: tuple[str, ...]
    rule: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"rule": v.rule, "cells": list(v.cells), "message": v.message}
                for v in self.violations
            ],
        }


class GraphValidationError(ValueError):
    """Raised by :func:`build` when the cell list breaks a graph invariant."""

    def __init__(self, report: ValidationReport):
        self.report = report
        lines = [f"{v.rule} {','.join(v.cells)}: {v.message}" for v in report.violations]
        super().__init__("invalid lane graph:\n  " + "\n  ".join(lines))


class GraphFormatError(ValueError):
    """Malformed graph file (bad JSON, wrong version, missing or unknown fields)."""


def _positive(value) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value) and value > 0


def validate(cells: Iterable[Cell]) -> ValidationReport:
    """Check every graph invariant and report all violations, sorted by cell id."""
    cells = list(cells)
    found: list[Violation] = []
    by_id: dict[str, Cell] = {}
    for c in cells:
        if not isinstance(c.id, str) or not c.id:
            found.append(Violation((str(c.id),), "empty-id", "cell id must be a nonempty string"))
            continue
        if c.id in by_id:
            found.append(Violation((c.id,), "duplicate-id", f"cell id {c.id!r} appears more than once"))
            continue
        by_id[c.id] = c

    for c in by_id.values():
        if not _positive(c.length):
            found.append(Violation((c.id,), "nonpositive-length", f"length must be > 0, got {c.length!r}"))
        if not _positive(c.cost):
            found.append(Violation((c.id,), "nonpositive-cost", f"cost must be > 0, got {c.cost!r}"))

        for side, other_side in (("left", "right"), ("right", "left")):
            nb = getattr(c, side)
            if nb is None:
                continue
            if nb == c.id:
                found.append(Violation((c.id,), "self-neighbor", f"cell is its own {side} neighbor"))
                continue
            if nb not in by_id:
                found.append(Violation((c.id, nb), "dangling-reference", f"{side} neighbor {nb!r} does not exist"))
                continue
            if getattr(by_id[nb], other_side) != c.id:
                found.append(
                    Violation(
                        (c.id, nb),
                        "neighbor-asymmetry",
                        f"{c.id}.{side} = {nb} but {nb}.{other_side} = {getattr(by_id[nb], other_side)}",
                    )
                )
        if c.left is not None and c.left == c.right:
            found.append(Violation((c.id, c.left), "neighbor-asymmetry", "left and right neighbor coincide"))

        seen: set[str] = set()
        for s in c.successors:
            if s == c.id:
                found.append(Violation((c.id,), "self-loop", "cell lists itself as a successor"))
            elif s not in by_id:
                found.append(Violation((c.id, s), "dangling-reference", f"successor {s!r} does not exist"))
            if s in seen:
                found.append(Violation((c.id, s), "duplicate-successor", f"successor {s!r} listed twice"))
            seen.add(s)

    return ValidationReport(tuple(sorted(set(found))))


class LaneGraph:
    """Immutable validated lane graph with a derived predecessor index.

    Besides the id-keyed view, the graph keeps dense integer arrays (cells
    numbered in sorted-id order) for the solvers; index order therefore equals
    id order, which the solvers rely on for tie-breaking.
    """

    __slots__ = (
        "cells", "predecessors", "ids", "index",
        "length", "cost", "succ", "pred", "nbrs",
    )

    def __init__(self, cells: Mapping[str, Cell]):
        ids = sorted(cells)
        index = {cid: i for i, cid in enumerate(ids)}
        preds: dict[str, list[str]] = {cid: [] for cid in ids}
        for cid in ids:
            for s in cells[cid].successors:
                preds[s].append(cid)

        self.cells = MappingProxyType({cid: cells[cid] for cid in ids})
        self.predecessors = MappingProxyType({cid: tuple(p) for cid, p in preds.items()})
        self.ids = tuple(ids)
        self.index = MappingProxyType(index)
        self.length = tuple(float(cells[cid].length) for cid in ids)
        self.cost = tuple(float(cells[cid].cost) for cid in ids)
        self.succ = tuple(tuple(index[s] for s in cells[cid].successors) for cid in ids)
        self.pred = tuple(tuple(index[p] for p in preds[cid]) for cid in ids)
        self.nbrs = tuple(
            tuple(index[n] for n in (cells[cid].left, cells[cid].right) if n is not None)
            for cid in ids
        )

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, cid) -> bool:
        return cid in self.index

    def __getitem__(self, cid: str) -> Cell:
        return self.cells[cid]

    def __iter__(self):
        return iter(self.cells.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaneGraph):
            return NotImplemented
        return dict(self.cells) == dict(other.cells)

    def __repr__(self) -> str:
        return f"LaneGraph({len(self)} cells)"

    def neighbors(self, cid: str) -> tuple[str, ...]:
        c = self.cells[cid]
        return tuple(n for n in (c.left, c.right) if n is not None)

    @property
    def has_layout(self) -> bool:
        return bool(self.cells) and all(c.lane is not None and c.s is not None for c in self.cells.values())


def build(cells: Iterable[Cell]) -> LaneGraph:
    """Validate ``cells`` and return the graph; raise :class:`GraphValidationError` otherwise."""
    cells = list(cells)
    report = validate(cells)
    if not report.ok:
        raise GraphValidationError(report)
    return LaneGraph({c.id: c for c in cells})


def _cell_from_dict(i: int, raw) -> Cell:
    if not isinstance(raw, dict):
        raise GraphFormatError(f"cells[{i}]: expected an object")
    missing = [k for k in _CELL_REQUIRED if k not in raw]
    if missing:
        raise GraphFormatError(f"cells[{i}]: missing required field(s) {', '.join(missing)}")
    unknown = sorted(set(raw) - set(_CELL_REQUIRED) - set(_CELL_OPTIONAL))
    if unknown:
        raise GraphFormatError(f"cells[{i}]: unknown field(s) {', '.join(unknown)}")

    cid = raw["id"]
    if not isinstance(cid, str):
        raise GraphFormatError(f"cells[{i}]: id must be a string")
    for key in ("length", "cost"):
        v = raw[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise GraphFormatError(f"cells[{i}] ({cid}): {key} must be a number")
    for key in ("left", "right"):
        if raw[key] is not None and not isinstance(raw[key], str):
            raise GraphFormatError(f"cells[{i}] ({cid}): {key} must be a string id or null")
    succ = raw["successors"]
    if not isinstance(succ, list) or not all(isinstance(s, str) for s in succ):
        raise GraphFormatError(f"cells[{i}] ({cid}): successors must be an array of string ids")
    lane = raw.get("lane")
    if lane is not None and (isinstance(lane, bool) or not isinstance(lane, int)):
        raise GraphFormatError(f"cells[{i}] ({cid}): lane must be an integer")
    s = raw.get("s")
    if s is not None and (isinstance(s, bool) or not isinstance(s, (int, float))):
        raise GraphFormatError(f"cells[{i}] ({cid}): s must be a number")

    return Cell(
        id=cid,
        length=float(raw["length"]),
        cost=float(raw["cost"]),
        left=raw["left"],
        right=raw["right"],
        successors=tuple(succ),
        lane=lane,
        s=None if s is None else float(s),
    )


def parse_cells(text: bytes | str) -> list[Cell]:
    """Decode a graph file into raw cells without checking graph invariants."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise GraphFormatError(f"graph file is not UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise GraphFormatError("top level must be an object")
    unknown = sorted(set(doc) - {"version", "cells"})
    if unknown:
        raise GraphFormatError(f"unknown top-level key(s) {', '.join(unknown)}")
    if "version" not in doc:
        raise GraphFormatError("missing required field version")
    if doc["version"] != GRAPH_FORMAT_VERSION:
        raise GraphFormatError(f"unknown graph format version {doc['version']!r}")
    if not isinstance(doc.get("cells"), list):
        raise GraphFormatError("missing required field cells (array)")
    return [_cell_from_dict(i, raw) for i, raw in enumerate(doc["cells"])]


def parse_graph(text: bytes | str) -> LaneGraph:
    """Parse a graph file and build the graph.

    Raises :class:`GraphFormatError` for structural problems and
    :class:`GraphValidationError` when the cells break graph invariants.
    """
    return build(parse_cells(text))


def graph_to_dict(graph: LaneGraph) -> dict:
    cells = []
    for c in graph:
        d = {
            "id": c.id,
            "length": c.length,
            "cost": c.cost,
            "left": c.left,
            "right": c.right,
            "successors": list(c.successors),
        }
        if c.lane is not None:
            d["lane"] = c.lane
        if c.s is not None:
            d["s"] = c.s
        cells.append(d)
    return {"version": GRAPH_FORMAT_VERSION, "cells": cells}


def serialize_graph(graph: LaneGraph) -> bytes:
    """Deterministic UTF-8 JSON; cells sorted by id, predecessors omitted."""
    doc = graph_to_dict(graph)
    lines = ['{"version": %d,' % doc["version"], ' "cells": [']
    body = [json.dumps(c, ensure_ascii=False) for c in doc["cells"]]
    lines.append(",\n".join("  " + b for b in body))
    lines.append(" ]}")
    return ("\n".join(lines) + "\n").encode("utf-8")
