"""Synchronous value iteration over the full action set.

Slow but assumption-free: it converges whether or not the cost formulation is
monotone, so it serves as ground truth for the router and as its fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .lane_graph import LaneGraph
from .mdp import SolveParams
from .router import REL_TIE, Solution, SolveStats, UnknownGoalError, _key_to_action


class NoConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class VIConfig:
    tolerance: float = 1e-10
    max_iterations: int = 1_000_000
    value_cap: float = 1e12

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.value_cap > 0:
            raise ValueError("value_cap must be > 0")


class ActionTable:
    """Every (cell, action) pair of the MDP as flat arrays, grouped by cell.

    Single-outcome actions use ``failure == success`` with ``p_success == 1``.
    """

    def __init__(self, graph: LaneGraph, params: SolveParams, goal_index: int | None = None):
        alpha = params.alpha
        clc = params.lane_change_cost
        cflc = params.forced_lane_change_cost
        cell, kind, succ, fail, p, cs, cf = [], [], [], [], [], [], []
        for x in range(len(graph)):
            if x == goal_index:
                continue
            keys = {(0, s, -1) for s in graph.succ[x]}
            for n in graph.nbrs[x]:
                for ns in graph.succ[n]:
                    keys.add((2, ns, -1))
                    keys.update((1, ns, s) for s in graph.succ[x])
            c = graph.cost[x]
            px = -np.expm1(-alpha * graph.length[x])
            for k, s, f in sorted(keys):
                cell.append(x)
                kind.append(k)
                succ.append(s)
                fail.append(s if f < 0 else f)
                if k == 0:
                    p.append(1.0); cs.append(c); cf.append(0.0)
                elif k == 1:
                    p.append(px); cs.append(clc + c); cf.append(c)
                else:
                    p.append(1.0); cs.append(clc + c + (1.0 - px) * cflc); cf.append(0.0)
        self.cell = np.asarray(cell, dtype=np.int64)
        self.kind = np.asarray(kind, dtype=np.int64)
        self.succ = np.asarray(succ, dtype=np.int64)
        self.fail = np.asarray(fail, dtype=np.int64)
        self.p = np.asarray(p, dtype=float)
        self.cost_success = np.asarray(cs, dtype=float)
        self.cost_failure = np.asarray(cf, dtype=float)
        if len(cell):
            starts = np.flatnonzero(np.r_[True, self.cell[1:] != self.cell[:-1]])
        else:
            starts = np.zeros(0, dtype=np.int64)
        self.starts = starts
        self.owners = self.cell[starts]

    def __len__(self) -> int:
        return len(self.cell)

    def q(self, values: np.ndarray) -> np.ndarray:
        return self.p * (self.cost_success + values[self.succ]) + (1.0 - self.p) * (
            self.cost_failure + values[self.fail]
        )

    def key(self, i: int) -> tuple[int, int, int]:
        k = int(self.kind[i])
        return (k, int(self.succ[i]), int(self.fail[i]) if k == 1 else -1)


def value_iterate(
    graph: LaneGraph,
    goal: str,
    params: SolveParams,
    cfg: VIConfig | None = None,
) -> Solution:
    """Jacobi Bellman backups from "everything unreachable" until the max-norm update <= tolerance."""
    cfg = cfg or VIConfig()
    if goal not in graph:
        raise UnknownGoalError(goal)
    n = len(graph)
    goal_i = graph.index[goal]
    table = ActionTable(graph, params, goal_i)
    cap = cfg.value_cap

    values = np.full(n, cap)
    values[goal_i] = 0.0
    residuals = []
    iterations = 0
    while True:
        new = np.full(n, cap)
        if len(table):
            best = np.minimum.reduceat(table.q(values), table.starts)
            new[table.owners] = np.minimum(best, cap)
        new[goal_i] = 0.0
        residual = float(np.max(np.abs(new - values))) if n else 0.0
        values = new
        if residual <= cfg.tolerance:
            break
        residuals.append(residual)
        iterations += 1
        if iterations >= cfg.max_iterations:
            raise NoConvergenceError(
                f"value iteration did not converge in {cfg.max_iterations} iterations "
                f"(residual {residual:.3g})"
            )

    policy_keys = _greedy_policy(table, values, cap)
    ids = graph.ids
    g = {cid: (float(v) if v < cap else None) for cid, v in zip(ids, values)}
    g[goal] = 0.0
    policy = {cid: None for cid in ids}
    for x, key in policy_keys.items():
        if g[ids[x]] is not None:
            policy[ids[x]] = _key_to_action(key, ids)
    return Solution(
        goal=goal,
        params=params,
        g=MappingProxyType(g),
        policy=MappingProxyType(policy),
        stats=SolveStats(iterations=iterations, residuals=tuple(residuals)),
        solver="value-iteration",
    )


def _greedy_policy(table: ActionTable, values: np.ndarray, cap: float) -> dict[int, tuple]:
    """Argmin action per cell; near-ties go to the earliest action in the fixed order."""
    if not len(table):
        return {}
    q = table.q(values)
    dead = (values[table.succ] >= cap) | ((table.p < 1.0) & (values[table.fail] >= cap))
    q = np.where(dead, np.inf, q)
    best = np.minimum.reduceat(q, table.starts)
    ends = np.r_[table.starts[1:], len(table)]
    out = {}
    for owner, lo, hi, b in zip(table.owners, table.starts, ends, best):
        if not np.isfinite(b):
            continue
        seg = q[lo:hi]
        j = int(np.flatnonzero(seg <= b + REL_TIE * abs(b))[0])
        out[int(owner)] = table.key(lo + j)
    return out
