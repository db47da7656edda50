"""Single-pass Dijkstra-like solver for the lane routing MDP.

Cells are finalized in order of increasing cost-to-go, starting from the goal.
When a cell is closed, every (cell, action) pair that can reach it with
positive probability and whose other targets are already closed is relaxed.
This is exact as long as the optimal policy strictly decreases the
cost-to-go along every transition, which :func:`check_monotonicity_condition`
guarantees a priori and the reopen check verifies at runtime.
"""

from __future__ import annotations

import enum
import gc
import heapq
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional

from .lane_graph import LaneGraph
from .mdp import Action, ActionKind, SolveParams

# Relative slack under which two q-values count as tied (policy then follows
# the fixed action order) and under which an "improvement" of a closed cell
# is treated as rounding noise rather than a reopen.
REL_TIE = 1e-12

# Relative slack for the a-priori condition so that c == l with c_flc = 1/alpha
# is not rejected over a last-bit rounding of alpha * (1/alpha).
PRECHECK_SLACK = 1e-12

_KINDS = (ActionKind.STAY, ActionKind.LANE_CHANGE, ActionKind.FORCED_LANE_CHANGE)


class SolveMode(str, enum.Enum):
    STRICT = "strict"
    FORCE = "force"
    FALLBACK_VI = "fallback-vi"


class UnknownGoalError(KeyError):
    pass


class MonotonicityPrecheckFailed(RuntimeError):
    def __init__(self, violators: list[str]):
        self.violators = violators
        shown = ", ".join(violators[:10]) + (" ..." if len(violators) > 10 else "")
        super().__init__(
            f"{len(violators)} cell(s) violate c(x)/l(x) >= alpha * c_flc: {shown}"
        )


class NonMonotoneError(RuntimeError):
    def __init__(self, cell: str):
        self.cell = cell
        super().__init__(f"cost formulation is not monotone: closed cell {cell!r} would be reopened")


@dataclass
class SolveStats:
    pops: int = 0
    children_evaluated: int = 0
    reopened_cells: tuple[str, ...] = ()
    iterations: int = 0
    residuals: tuple[float, ...] = ()

    @property
    def reopen_detected(self) -> bool:
        return bool(self.reopened_cells)


@dataclass(frozen=True)
class Solution:
    goal: str
    params: SolveParams
    g: Mapping[str, Optional[float]]
    policy: Mapping[str, Optional[Action]]
    stats: SolveStats = field(default_factory=SolveStats)
    solver: str = "dijkstra"

    def value(self, cid: str) -> float | None:
        return self.g[cid]

    def reachable(self) -> list[str]:
        return [c for c, v in self.g.items() if v is not None]


def check_monotonicity_condition(graph: LaneGraph, params: SolveParams) -> tuple[bool, list[str]]:
    """Return (ok, violators): cells with c(x)/l(x) < alpha * c_flc, in id order."""
    bound = params.alpha * params.forced_lane_change_cost
    bad = [
        cid
        for cid, c, l in zip(graph.ids, graph.cost, graph.length)
        if c / l < bound * (1.0 - PRECHECK_SLACK)
    ]
    return not bad, bad


def _action_key(a: Action, index: Mapping[str, int]) -> tuple[int, int, int]:
    return (int(a.kind), index[a.success], -1 if a.failure is None else index[a.failure])


def _key_to_action(key: tuple[int, int, int], ids) -> Action:
    kind, s, f = key
    return Action(_KINDS[kind], ids[s], None if f < 0 else ids[f])


class _Model:
    """Per-solve constants in dense-index form."""

    __slots__ = ("f", "flc", "clc")

    def __init__(self, graph: LaneGraph, params: SolveParams):
        a = params.alpha
        self.f = [-math.expm1(-a * l) for l in graph.length]
        self.clc = params.lane_change_cost
        cflc = params.forced_lane_change_cost
        self.flc = [self.clc + c + (1.0 - p) * cflc for c, p in zip(graph.cost, self.f)]


def _children(graph: LaneGraph, m: _Model, x: int, gx: float, g, closed) -> list:
    """(cell, q, action key) for every pair reaching the just-closed ``x``.

    Lane changes are emitted only once their other target is closed too; the
    same pair is produced later from that target otherwise.
    """
    cost, f, flc, clc = graph.cost, m.f, m.flc, m.clc
    nbrs, succ = graph.nbrs, graph.succ
    out = []
    for xp in graph.pred[x]:
        out.append((xp, cost[xp] + gx, (0, x, -1)))
        fp = f[xp]
        for xn in nbrs[xp]:
            out.append((xn, flc[xn] + gx, (2, x, -1)))
            fn = f[xn]
            for xs in succ[xn]:
                if closed[xs]:
                    gs = g[xs]
                    # lane change out of xp into xs, falling back to x
                    out.append((xp, cost[xp] + fp * (clc + gs) + (1.0 - fp) * gx, (1, xs, x)))
                    # lane change out of xn into x, falling back to xs
                    out.append((xn, cost[xn] + fn * (clc + gx) + (1.0 - fn) * gs, (1, x, xs)))
    return out


def find_children(
    graph: LaneGraph,
    params: SolveParams,
    x: str,
    g: Mapping[str, Optional[float]],
    closed: Callable[[str], bool],
) -> list[tuple[str, Action, float]]:
    """Children of the closed cell ``x``: the best (action, q) per child cell.

    Sorted by child id. ``g`` must be finite for ``x`` and for every cell
    ``closed`` accepts.
    """
    gx = g[x]
    if gx is None:
        raise ValueError(f"cell {x!r} has no finite value")
    ids, index = graph.ids, graph.index
    dense_g = [g.get(cid) for cid in ids]
    dense_closed = [cid == x or bool(closed(cid)) for cid in ids]
    best: dict[int, tuple[float, tuple]] = {}
    for y, q, key in _children(graph, _Model(graph, params), index[x], gx, dense_g, dense_closed):
        cur = best.get(y)
        if cur is None or (not _tied(q, cur[0]) and q < cur[0]):
            best[y] = (q, key)
        elif _tied(q, cur[0]):
            best[y] = (min(q, cur[0]), min(key, cur[1]))
    return [(ids[y], _key_to_action(k, ids), q) for y, (q, k) in sorted(best.items())]


def _tied(q: float, ref: float) -> bool:
    return abs(q - ref) <= REL_TIE * max(abs(q), abs(ref))


def solve(
    graph: LaneGraph,
    goal: str,
    params: SolveParams,
    mode: SolveMode | str = SolveMode.STRICT,
) -> Solution:
    """Optimal cost-to-go and policy for every cell, towards ``goal``."""
    mode = SolveMode(mode)
    if goal not in graph:
        raise UnknownGoalError(goal)
    if mode is SolveMode.STRICT:
        ok, bad = check_monotonicity_condition(graph, params)
        if not ok:
            raise MonotonicityPrecheckFailed(bad)

    # the pass allocates millions of short-lived acyclic tuples; collector
    # sweeps only add noise to its running time
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        return _solve(graph, goal, params, mode)
    finally:
        if gc_was_enabled:
            gc.enable()


def _solve(graph: LaneGraph, goal: str, params: SolveParams, mode: SolveMode) -> Solution:
    ids = graph.ids
    n = len(ids)
    m = _Model(graph, params)
    inf = math.inf
    g = [inf] * n
    pol: list = [None] * n
    closed = bytearray(n)
    goal_i = graph.index[goal]
    g[goal_i] = 0.0
    heap = [(0.0, goal_i)]
    pops = 0
    evaluated = 0
    reopened: list[int] = []
    lo, hi = 1.0 - REL_TIE, 1.0 + REL_TIE

    pop, push = heapq.heappop, heapq.heappush
    while heap:
        gx, x = pop(heap)
        if closed[x]:
            continue
        closed[x] = 1
        pops += 1
        kids = _children(graph, m, x, gx, g, closed)
        evaluated += len(kids)
        for y, q, key in kids:
            if y == goal_i:
                continue
            gy = g[y]
            if closed[y]:
                if q < gy * lo:
                    if mode is not SolveMode.FALLBACK_VI:
                        raise NonMonotoneError(ids[y])
                    reopened.append(y)
                continue
            if q < gy * lo:
                g[y] = q
                pol[y] = key
                push(heap, (q, y))
            elif q <= gy * hi:
                # near-tie: value is the exact minimum, action the smaller key
                if key < pol[y]:
                    pol[y] = key
                if q < gy:
                    g[y] = q
                    push(heap, (q, y))

    stats = SolveStats(
        pops=pops,
        children_evaluated=evaluated,
        reopened_cells=tuple(ids[i] for i in sorted(set(reopened))),
    )
    if reopened:
        from .vi import value_iterate

        sol = value_iterate(graph, goal, params)
        sol.stats.pops = pops
        sol.stats.children_evaluated = evaluated
        sol.stats.reopened_cells = stats.reopened_cells
        return sol

    values = {cid: (None if v == inf else v) for cid, v in zip(ids, g)}
    policy = {cid: (None if k is None else _key_to_action(k, ids)) for cid, k in zip(ids, pol)}
    return Solution(
        goal=goal,
        params=params,
        g=MappingProxyType(values),
        policy=MappingProxyType(policy),
        stats=stats,
    )
