"""Action sets, outcome distributions and q-values of the lane routing MDP.

Values are plain floats; ``None`` stands for an unreachable cell and is never
fed into arithmetic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional

from .lane_change import success_prob
from .lane_graph import LaneGraph

ValueFunction = Mapping[str, Optional[float]]


@dataclass(frozen=True)
class SolveParams:
    alpha: float
    lane_change_cost: float
    forced_lane_change_cost: float | None = None

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be > 0, got {self.alpha!r}")
        if self.forced_lane_change_cost is None:
            object.__setattr__(self, "forced_lane_change_cost", 1.0 / self.alpha)
        if not (self.lane_change_cost >= 0 and math.isfinite(self.lane_change_cost)):
            raise ValueError(f"lane_change_cost must be >= 0, got {self.lane_change_cost!r}")
        if not (self.forced_lane_change_cost >= 0 and math.isfinite(self.forced_lane_change_cost)):
            raise ValueError(
                f"forced_lane_change_cost must be >= 0, got {self.forced_lane_change_cost!r}"
            )

    def scaled(self, factor: float) -> SolveParams:
        """Same rate, costs multiplied by ``factor``."""
        return SolveParams(
            self.alpha,
            self.lane_change_cost * factor,
            self.forced_lane_change_cost * factor,
        )

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "lane_change_cost": self.lane_change_cost,
            "forced_lane_change_cost": self.forced_lane_change_cost,
        }


class ActionKind(enum.IntEnum):
    STAY = 0
    LANE_CHANGE = 1
    FORCED_LANE_CHANGE = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> ActionKind:
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown action kind {label!r}") from None


@dataclass(frozen=True, order=True)
class Action:
    """An action; ordering is the fixed tie-break order (kind, success, failure).

    ``failure`` is set only for lane changes: the in-lane successor reached
    when the lane change does not happen.
    """

    kind: ActionKind
    success: str
    failure: str | None = None

    def __post_init__(self):
        if (self.kind == ActionKind.LANE_CHANGE) != (self.failure is not None):
            raise ValueError("failure target is present iff the action is a lane change")

    def targets(self) -> tuple[str, ...]:
        return (self.success,) if self.failure is None else (self.success, self.failure)


@dataclass(frozen=True)
class Outcome:
    target: str
    probability: float
    cost: float


class InvalidActionError(ValueError):
    pass


def _check_cell(graph: LaneGraph, x: str) -> None:
    if x not in graph:
        raise KeyError(f"unknown cell id {x!r}")


def enumerate_actions(graph: LaneGraph, x: str) -> list[Action]:
    """All actions available in cell ``x``, in tie-break order."""
    _check_cell(graph, x)
    cell = graph[x]
    stays = {Action(ActionKind.STAY, s) for s in cell.successors}
    changes = set()
    forced = set()
    for n in graph.neighbors(x):
        for ns in graph[n].successors:
            forced.add(Action(ActionKind.FORCED_LANE_CHANGE, ns))
            for s in cell.successors:
                changes.add(Action(ActionKind.LANE_CHANGE, ns, s))
    return sorted(stays) + sorted(changes) + sorted(forced)


def _is_valid(graph: LaneGraph, x: str, a: Action) -> bool:
    succ = graph[x].successors
    if a.kind == ActionKind.STAY:
        return a.success in succ
    reachable = any(a.success in graph[n].successors for n in graph.neighbors(x))
    if a.kind == ActionKind.FORCED_LANE_CHANGE:
        return reachable
    return reachable and a.failure in succ


def outcomes(graph: LaneGraph, params: SolveParams, x: str, a: Action) -> list[Outcome]:
    """Outcome distribution of taking ``a`` in ``x``."""
    _check_cell(graph, x)
    if not _is_valid(graph, x, a):
        raise InvalidActionError(f"{a} is not available in cell {x!r}")
    cell = graph[x]
    if a.kind == ActionKind.STAY:
        return [Outcome(a.success, 1.0, cell.cost)]
    p = success_prob(params.alpha, cell.length)
    if a.kind == ActionKind.LANE_CHANGE:
        return [
            Outcome(a.success, p, params.lane_change_cost + cell.cost),
            Outcome(a.failure, 1.0 - p, cell.cost),
        ]
    return [
        Outcome(
            a.success,
            1.0,
            params.lane_change_cost + cell.cost + (1.0 - p) * params.forced_lane_change_cost,
        )
    ]


def q_value(
    graph: LaneGraph, params: SolveParams, g: ValueFunction, x: str, a: Action
) -> float | None:
    """Expected cost of taking ``a`` in ``x`` and following ``g`` afterwards.

    ``None`` when any positive-probability target is unreachable.
    """
    total = 0.0
    for o in outcomes(graph, params, x, a):
        if o.probability == 0.0:
            continue
        gt = g.get(o.target)
        if gt is None:
            return None
        total += o.probability * (o.cost + gt)
    return total
