"""Policy file format: per-cell cost-to-go and action, JSON, cells sorted by id."""

from __future__ import annotations

import json
from types import MappingProxyType

from .lane_graph import LaneGraph
from .mdp import Action, ActionKind, SolveParams
from .router import Solution

POLICY_FORMAT_VERSION = 1


class PolicyFormatError(ValueError):
    pass


def fmt9(x: float) -> float:
    """Round to 9 significant digits; keeps written files stable across platforms."""
    return float(f"{x:.9g}")


def _action_to_dict(a: Action | None):
    if a is None:
        return None
    d = {"kind": a.kind.label, "success": a.success}
    if a.failure is not None:
        d["failure"] = a.failure
    return d


def solution_to_dict(sol: Solution) -> dict:
    return {
        "version": POLICY_FORMAT_VERSION,
        "goal": sol.goal,
        "params": {k: fmt9(v) for k, v in sol.params.to_dict().items()},
        "cells": [
            {
                "id": cid,
                "g": None if sol.g[cid] is None else fmt9(sol.g[cid]),
                "action": _action_to_dict(sol.policy.get(cid)),
            }
            for cid in sorted(sol.g)
        ],
    }


def serialize_policy(sol: Solution) -> bytes:
    doc = solution_to_dict(sol)
    head = json.dumps({k: doc[k] for k in ("version", "goal", "params")})[:-1]
    rows = ",\n".join("  " + json.dumps(c) for c in doc["cells"])
    return (head + ',\n "cells": [\n' + rows + "\n ]}\n").encode("utf-8")


def parse_policy(text: bytes | str, graph: LaneGraph | None = None) -> Solution:
    """Read a policy file back into a :class:`Solution` (stats are not stored)."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise PolicyFormatError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("version") != POLICY_FORMAT_VERSION:
        raise PolicyFormatError("not a version 1 policy file")
    try:
        raw = doc["params"]
        params = SolveParams(raw["alpha"], raw["lane_change_cost"], raw["forced_lane_change_cost"])
        goal = doc["goal"]
        g, policy = {}, {}
        for i, c in enumerate(doc["cells"]):
            cid = c["id"]
            g[cid] = None if c["g"] is None else float(c["g"])
            a = c["action"]
            policy[cid] = None if a is None else Action(
                ActionKind.from_label(a["kind"]), a["success"], a.get("failure")
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise PolicyFormatError(f"bad policy file: {exc}") from None
    if graph is not None:
        missing = sorted(set(graph.ids) ^ set(g))
        if missing:
            raise PolicyFormatError(f"policy and graph disagree on cells: {', '.join(missing[:5])}")
    return Solution(goal, params, MappingProxyType(g), MappingProxyType(policy), solver="file")
