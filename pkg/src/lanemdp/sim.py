"""Monte Carlo rollouts of a policy through the stochastic lane-change model.

Randomness comes from SplitMix64: draw ``k`` of a trial seeded with ``s`` is
``mix64(s + (k + 1) * 0x9E3779B97F4A7C15)`` mapped to [0, 1) via its top 53
bits. Being counter-based, the same stream can be evaluated one trial at a
time (:func:`rollout`) or for all trials at once (:func:`estimate_cost`), and
both give identical results. Trial ``i`` of a batch seeded with ``s`` uses
seed ``s ^ (TRIAL_STRIDE * (i + 1) mod 2**64)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lane_change import success_prob
from .lane_graph import LaneGraph
from .mdp import Action, ActionKind
from .router import Solution

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
TRIAL_STRIDE = 0xD1B54A32D192ED03
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def uniform(seed: int, k: int) -> float:
    """The ``k``-th uniform draw of the stream seeded with ``seed``."""
    return (_mix64((seed + (k + 1) * GOLDEN_GAMMA) & MASK64) >> 11) * 2.0**-53


def _uniform_vec(seeds: np.ndarray, k: np.ndarray) -> np.ndarray:
    z = seeds + (k + np.uint64(1)) * np.uint64(GOLDEN_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def trial_seed(seed: int, i: int) -> int:
    return (seed & MASK64) ^ ((TRIAL_STRIDE * (i + 1)) & MASK64)


class UnreachableStartError(ValueError):
    pass


class MissingActionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Step:
    cell: str
    action: Action
    success: bool
    cost: float
    target: str


@dataclass(frozen=True)
class RolloutTrace:
    steps: tuple[Step, ...]
    total_cost: float
    reached_goal: bool

    @property
    def steps_taken(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class SimSummary:
    trials: int
    mean_cost: float
    std_dev: float
    std_err: float
    failures: int

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "mean": self.mean_cost,
            "std_dev": self.std_dev,
            "std_err": self.std_err,
            "failures": self.failures,
        }


def _check_start(solution: Solution, start: str) -> None:
    if start not in solution.g:
        raise KeyError(f"unknown cell id {start!r}")
    if solution.g[start] is None:
        raise UnreachableStartError(f"goal is unreachable from {start!r}")


def rollout(
    graph: LaneGraph,
    solution: Solution,
    start: str,
    seed: int,
    step_limit: int | None = None,
) -> RolloutTrace:
    """Drive from ``start`` following the policy until the goal or ``step_limit`` steps.

    A forced lane change always moves; the uniform draw only decides whether
    the ``c_flc`` surcharge applies (when the lane change would have failed).
    """
    _check_start(solution, start)
    if step_limit is None:
        step_limit = 10 * len(graph)
    params = solution.params
    clc, cflc = params.lane_change_cost, params.forced_lane_change_cost
    seed &= MASK64
    draws = 0
    x = start
    total = 0.0
    steps = []
    while x != solution.goal and len(steps) < step_limit:
        a = solution.policy.get(x)
        if a is None:
            raise MissingActionError(f"no policy action at visited cell {x!r}")
        cell = graph[x]
        if a.kind == ActionKind.STAY:
            ok, cost, nxt = True, cell.cost, a.success
        else:
            ok = uniform(seed, draws) < success_prob(params.alpha, cell.length)
            draws += 1
            base = clc + cell.cost
            if a.kind == ActionKind.LANE_CHANGE:
                cost, nxt = (base, a.success) if ok else (cell.cost, a.failure)
            else:
                cost, nxt = (base if ok else base + cflc), a.success
        total += cost
        steps.append(Step(x, a, ok, cost, nxt))
        x = nxt
    return RolloutTrace(tuple(steps), total, x == solution.goal)


class _PolicyArrays:
    def __init__(self, graph: LaneGraph, solution: Solution):
        n = len(graph)
        params = solution.params
        clc, cflc = params.lane_change_cost, params.forced_lane_change_cost
        self.kind = np.full(n, -1, dtype=np.int64)
        self.succ = np.zeros(n, dtype=np.int64)
        self.fail = np.zeros(n, dtype=np.int64)
        self.p = np.ones(n)
        self.cost_ok = np.zeros(n)
        self.cost_bad = np.zeros(n)
        for i, cid in enumerate(graph.ids):
            a = solution.policy.get(cid)
            if a is None:
                continue
            c = graph.cost[i]
            self.kind[i] = int(a.kind)
            self.succ[i] = graph.index[a.success]
            self.fail[i] = graph.index[a.failure] if a.failure is not None else self.succ[i]
            if a.kind == ActionKind.STAY:
                self.cost_ok[i] = self.cost_bad[i] = c
            else:
                self.p[i] = success_prob(params.alpha, graph.length[i])
                base = clc + c
                self.cost_ok[i] = base
                self.cost_bad[i] = c if a.kind == ActionKind.LANE_CHANGE else base + cflc


def simulate_totals(
    graph: LaneGraph,
    solution: Solution,
    start: str,
    trials: int,
    seed: int,
    step_limit: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Total cost and reached-goal flag of every trial, all trials stepped together."""
    _check_start(solution, start)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if step_limit is None:
        step_limit = 10 * len(graph)
    pa = _PolicyArrays(graph, solution)
    goal = graph.index[solution.goal]
    seeds = np.array([trial_seed(seed, i) for i in range(trials)], dtype=np.uint64)
    draws = np.zeros(trials, dtype=np.uint64)
    cur = np.full(trials, graph.index[start], dtype=np.int64)
    total = np.zeros(trials)
    live = np.flatnonzero(cur != goal)
    for _ in range(step_limit):
        if not len(live):
            break
        x = cur[live]
        kind = pa.kind[x]
        if (kind < 0).any():
            bad = graph.ids[int(x[np.argmax(kind < 0)])]
            raise MissingActionError(f"no policy action at visited cell {bad!r}")
        ok = np.ones(len(live), dtype=bool)
        rnd = kind > 0
        if rnd.any():
            who = live[rnd]
            ok[rnd] = _uniform_vec(seeds[who], draws[who]) < pa.p[x[rnd]]
            draws[who] += np.uint64(1)
        nxt = np.where(ok | (kind != int(ActionKind.LANE_CHANGE)), pa.succ[x], pa.fail[x])
        total[live] += np.where(ok, pa.cost_ok[x], pa.cost_bad[x])
        cur[live] = nxt
        live = live[nxt != goal]
    return total, cur == goal


def estimate_cost(
    graph: LaneGraph,
    solution: Solution,
    start: str,
    trials: int,
    seed: int,
    step_limit: int | None = None,
) -> SimSummary:
    totals, reached = simulate_totals(graph, solution, start, trials, seed, step_limit)
    mean = float(np.mean(totals))
    std = float(np.std(totals, ddof=1)) if trials > 1 else 0.0
    return SimSummary(
        trials=trials,
        mean_cost=mean,
        std_dev=std,
        std_err=std / math.sqrt(trials),
        failures=int(np.count_nonzero(~reached)),
    )


def policy_cost_moments(graph: LaneGraph, solution: Solution) -> dict[str, tuple[float, float]]:
    """Exact mean and variance of the total rollout cost from every reachable cell.

    Uses the same cost attribution as :func:`rollout`. Requires every
    positive-probability transition of the policy to strictly decrease g, so
    cells can be processed in increasing order of g.
    """
    params = solution.params
    clc, cflc = params.lane_change_cost, params.forced_lane_change_cost
    order = sorted((v, cid) for cid, v in solution.g.items() if v is not None)
    out: dict[str, tuple[float, float]] = {}
    for _, x in order:
        if x == solution.goal:
            out[x] = (0.0, 0.0)
            continue
        a = solution.policy.get(x)
        if a is None:
            raise MissingActionError(f"no policy action at reachable cell {x!r}")
        cell = graph[x]
        if a.kind == ActionKind.STAY:
            branches = [(1.0, cell.cost, a.success)]
        else:
            p = success_prob(params.alpha, cell.length)
            base = clc + cell.cost
            if a.kind == ActionKind.LANE_CHANGE:
                branches = [(p, base, a.success), (1.0 - p, cell.cost, a.failure)]
            else:
                branches = [(p, base, a.success), (1.0 - p, base + cflc, a.success)]
        branches = [b for b in branches if b[0] > 0.0]
        for _, _, t in branches:
            if t not in out:
                raise ValueError(f"policy at {x!r} does not strictly decrease g towards {t!r}")
        mean = sum(prob * (cost + out[t][0]) for prob, cost, t in branches)
        # law of total variance, in central form to avoid cancellation
        var = sum(prob * ((cost + out[t][0] - mean) ** 2 + out[t][1]) for prob, cost, t in branches)
        out[x] = (mean, var)
    return out
