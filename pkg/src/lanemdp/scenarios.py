"""Generators for the experiment road networks.

All generators are deterministic and attach layout hints (``lane``, ``s``)
to every cell so the policies can be rendered.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .lane_graph import Cell, LaneGraph, build


def _cells_count(length: float, cell_length: float, what: str) -> int:
    if not (length > 0 and cell_length > 0):
        raise ValueError(f"{what} and cell_length must be positive")
    n = round(length / cell_length)
    if n < 1 or abs(n * cell_length - length) > 1e-9 * max(1.0, length):
        raise ValueError(f"cell_length {cell_length} does not divide {what} {length}")
    return n


def lane_prefixes(n_lanes: int) -> list[str]:
    """Id prefixes from the rightmost lane leftward: r, m, l for three lanes."""
    if n_lanes < 1:
        raise ValueError("n_lanes must be >= 1")
    if n_lanes == 1:
        return ["r"]
    if n_lanes == 2:
        return ["r", "l"]
    if n_lanes == 3:
        return ["r", "m", "l"]
    return ["r"] + [f"m{k}" for k in range(1, n_lanes - 1)] + ["l"]


@dataclass(frozen=True)
class MergeScenarioParams:
    """Straight multi-lane highway with an on-ramp joining the rightmost lane.

    Lane ``m`` (0 = rightmost) costs ``cell_length * (1 + m * c_left)`` per
    cell; cells feeding into a cell with several predecessors pay an extra
    ``c_merge``. The goal is the last rightmost-lane cell.
    """

    n_lanes: int = 3
    cell_length: float = 10.0
    road_length: float = 5000.0
    merge_position: float = 500.0
    c_left: float = 0.1
    c_merge: float = 0.0
    ramp_length: float = 20.0

    def __post_init__(self):
        if self.n_lanes < 1:
            raise ValueError("n_lanes must be >= 1")
        for name in ("cell_length", "road_length", "merge_position", "ramp_length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.c_left < 0 or self.c_merge < 0:
            raise ValueError("c_left and c_merge must be >= 0")
        if not self.merge_position < self.road_length:
            raise ValueError("merge_position must lie before the end of the road")

    @property
    def cells_per_lane(self) -> int:
        return _cells_count(self.road_length, self.cell_length, "road_length")

    @property
    def merge_index(self) -> int:
        """Index of the rightmost-lane cell that the ramp feeds into."""
        return _cells_count(self.merge_position, self.cell_length, "merge_position")

    @property
    def goal(self) -> str:
        return f"r{self.cells_per_lane - 1}"


def _apply_merge_cost(cells: list[Cell], c_merge: float) -> list[Cell]:
    if c_merge == 0:
        return cells
    indegree = Counter(s for c in cells for s in c.successors)
    out = []
    for c in cells:
        if any(indegree[s] > 1 for s in c.successors):
            c = Cell(c.id, c.length, c.cost + c_merge, c.left, c.right, c.successors, c.lane, c.s)
        out.append(c)
    return out


def gen_highway_merge(p: MergeScenarioParams) -> LaneGraph:
    n = p.cells_per_lane
    k = p.merge_index
    n_ramp = _cells_count(p.ramp_length, p.cell_length, "ramp_length")
    if k < 1 or k >= n:
        raise ValueError("merge_position must fall on an interior cell boundary")
    prefixes = lane_prefixes(p.n_lanes)
    cl = p.cell_length

    cells = []
    for m, pre in enumerate(prefixes):
        cost = round(cl * (1.0 + m * p.c_left), 10)
        left = prefixes[m + 1] if m + 1 < p.n_lanes else None
        right = prefixes[m - 1] if m > 0 else None
        for i in range(n):
            cells.append(
                Cell(
                    id=f"{pre}{i}",
                    length=cl,
                    cost=cost,
                    left=None if left is None else f"{left}{i}",
                    right=None if right is None else f"{right}{i}",
                    successors=(f"{pre}{i + 1}",) if i + 1 < n else (),
                    lane=m,
                    s=i * cl,
                )
            )
    for j in range(n_ramp):
        succ = f"ramp{j + 1}" if j + 1 < n_ramp else f"r{k}"
        cells.append(
            Cell(f"ramp{j}", cl, cl, None, None, (succ,), lane=-1, s=(k - n_ramp + j) * cl)
        )
    return build(_apply_merge_cost(cells, p.c_merge))


@dataclass(frozen=True)
class TwoRouteScenarioParams:
    """Block network with a short interior route and a long perimeter route.

    Layout (goal in the top-right corner, all roads one-way):

    * approach: two southbound lanes ``ar*`` (right) / ``al*`` (left) from the
      top-left start region;
    * interior: the left approach lane turns left into a two-lane eastbound
      road ``il*`` (left) / ``ir*`` (right); ``il`` turns left into the exit
      ``u*`` that leads north to the goal ``g``, ``ir`` turns right into the
      inner ring lane;
    * perimeter: the right approach lane continues around the outer ring
      lane (``pw*`` south, ``pb*`` east, ``pe*`` north) into the exit;
    * inner ring lane: ``ld*`` south, ``lb*`` west, ``lu*`` north, back into
      the start of ``ir``. Missing the interior left turn therefore means a
      lap of the block.

    Counts are in cells; every cell costs its length.
    """

    cell_length: float = 10.0
    approach_cells: int = 8
    interior_cells: int = 6
    side_cells: int = 10
    bottom_cells: int = 12
    exit_cells: int = 4

    def __post_init__(self):
        if not self.cell_length > 0:
            raise ValueError("cell_length must be positive")
        for name in ("approach_cells", "interior_cells", "side_cells", "bottom_cells", "exit_cells"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    goal = "g"

    @property
    def start_region(self) -> tuple[str, ...]:
        """Right-lane approach cells where the route choice is made."""
        return tuple(f"ar{i}" for i in range(min(3, self.approach_cells)))


def gen_two_route(p: TwoRouteScenarioParams) -> LaneGraph:
    cl = p.cell_length
    cells: list[Cell] = []

    def chain(prefix, count, nxt, lane, s0=0.0, left=None, right=None):
        for i in range(count):
            succ = f"{prefix}{i + 1}" if i + 1 < count else nxt
            cells.append(
                Cell(
                    id=f"{prefix}{i}",
                    length=cl,
                    cost=cl,
                    left=None if left is None else f"{left}{i}",
                    right=None if right is None else f"{right}{i}",
                    successors=(succ,) if succ else (),
                    lane=lane,
                    s=s0 + i * cl,
                )
            )

    a, it, sd, bt, ex = p.approach_cells, p.interior_cells, p.side_cells, p.bottom_cells, p.exit_cells
    # rows for rendering, bottom to top
    chain("ar", a, "pw0", lane=10, left="al")
    chain("al", a, "il0", lane=11, right="ar")
    chain("pw", sd, "pb0", lane=9, s0=a * cl)
    chain("pb", bt, "pe0", lane=0, s0=(a + sd) * cl)
    chain("pe", sd, "u0", lane=1, s0=(a + sd + bt) * cl)
    chain("ir", it, "ld0", lane=5, s0=a * cl, left="il")
    chain("il", it, "u0", lane=6, s0=a * cl, right="ir")
    chain("ld", sd, "lb0", lane=4, s0=(a + it) * cl)
    chain("lb", bt, "lu0", lane=3, s0=(a + it + sd) * cl)
    chain("lu", sd, "ir0", lane=2, s0=(a + it + sd + bt) * cl)
    chain("u", ex, p.goal, lane=7, s0=(a + sd + bt + sd) * cl)
    cells.append(Cell(p.goal, cl, cl, lane=7, s=(a + sd + bt + sd + ex) * cl))
    return build(cells)


def gen_two_lane_straight(length: float, cell_length: float) -> LaneGraph:
    """Two parallel lanes ``r*`` (right) and ``l*`` (left); every cell costs its length.

    The goal is the last left-lane cell, see :func:`straight_goal`.
    """
    n = _cells_count(length, cell_length, "length")
    cells = []
    for i in range(n):
        s = i * cell_length
        nxt = i + 1 < n
        cells.append(Cell(f"r{i}", cell_length, cell_length, f"l{i}", None,
                          (f"r{i + 1}",) if nxt else (), lane=0, s=s))
        cells.append(Cell(f"l{i}", cell_length, cell_length, None, f"r{i}",
                          (f"l{i + 1}",) if nxt else (), lane=1, s=s))
    return build(cells)


def straight_goal(length: float, cell_length: float) -> str:
    return f"l{_cells_count(length, cell_length, 'length') - 1}"


def straight_closed_form(x: float, alpha: float, lane_change_cost: float) -> float:
    """Continuum cost-to-go of the right lane at distance ``x`` from the goal, c_flc = 1/alpha."""
    return x + lane_change_cost + math.exp(-alpha * x) / alpha
