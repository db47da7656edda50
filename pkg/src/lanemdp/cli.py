"""lanemdp command line: validate, gen, solve, vi, simulate, render, report.

Exit codes: 0 ok, 1 usage, 2 invalid graph or file, 3 monotonicity precheck
failed, 4 non-monotone reopen during solve, 5 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .lane_graph import GraphFormatError, GraphValidationError, parse_cells, parse_graph, serialize_graph, validate
from .mdp import SolveParams
from .policy_file import PolicyFormatError, parse_policy, serialize_policy
from .router import MonotonicityPrecheckFailed, NonMonotoneError, SolveMode, UnknownGoalError, solve
from .scenarios import (
    MergeScenarioParams,
    TwoRouteScenarioParams,
    gen_highway_merge,
    gen_two_lane_straight,
    gen_two_route,
)
from .sim import MissingActionError, UnreachableStartError, estimate_cost
from .vi import NoConvergenceError, value_iterate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_PRECHECK = 3
EXIT_NONMONOTONE = 4
EXIT_IO = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_dataclass_flags(p: argparse.ArgumentParser, cls) -> None:
    for f in dataclasses.fields(cls):
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=type(f.default), default=f.default)


def _build_parser() -> _Parser:
    top = _Parser(prog="lanemdp", description="Lane-level routing with stochastic lane changes.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a graph file and print the validation report")
    p.add_argument("graph")

    p = sub.add_parser("gen", help="generate a scenario graph")
    kinds = p.add_subparsers(dest="scenario", required=True, parser_class=_Parser)
    k = kinds.add_parser("merge", help="multi-lane highway with an on-ramp")
    _add_dataclass_flags(k, MergeScenarioParams)
    k.add_argument("--out", required=True)
    k = kinds.add_parser("tworoute", help="block with a short interior route and a long perimeter route")
    _add_dataclass_flags(k, TwoRouteScenarioParams)
    k.add_argument("--out", required=True)
    k = kinds.add_parser("straight", help="two-lane straight road, goal at the end of the left lane")
    k.add_argument("--length", type=float, default=2000.0)
    k.add_argument("--cell-length", type=float, default=0.5)
    k.add_argument("--out", required=True)

    for name, help_ in (("solve", "single-pass label-setting solve"), ("vi", "value iteration solve")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("graph")
        p.add_argument("--goal", required=True)
        p.add_argument("--alpha", type=float, required=True)
        p.add_argument("--clc", type=float, required=True, help="lane change cost")
        p.add_argument("--cflc", type=float, default=None, help="forced lane change cost (default 1/alpha)")
        if name == "solve":
            p.add_argument("--mode", choices=[m.value for m in SolveMode], default="strict")
        p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo rollouts of a policy")
    p.add_argument("graph")
    p.add_argument("policy")
    p.add_argument("--start", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--step-limit", type=int, default=None)

    p = sub.add_parser("render", help="draw a policy as SVG or ASCII")
    p.add_argument("graph")
    p.add_argument("policy")
    p.add_argument("--format", choices=["svg", "ascii"], required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="write cells.csv plus value and policy figures")
    p.add_argument("graph")
    p.add_argument("policy")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--window", type=float, nargs=2, metavar=("S0", "S1"), default=None,
                   help="restrict the policy figure to positions in [S0, S1]")
    return top


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc.strerror or exc}") from None


class _IOFailure(Exception):
    pass


def _load_graph(path: str):
    try:
        return parse_graph(_read(path))
    except (GraphFormatError, GraphValidationError) as exc:
        raise _Invalid(f"{path}: {exc}") from None


def _load_policy(path: str, graph):
    try:
        return parse_policy(_read(path), graph)
    except PolicyFormatError as exc:
        raise _Invalid(f"{path}: {exc}") from None


class _Invalid(Exception):
    pass


def _cmd_validate(args) -> int:
    try:
        cells = parse_cells(_read(args.graph))
    except GraphFormatError as exc:
        raise _Invalid(f"{args.graph}: {exc}") from None
    report = validate(cells)
    print(json.dumps(report.to_dict(), indent=1))
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_gen(args) -> int:
    if args.scenario == "straight":
        graph = gen_two_lane_straight(args.length, args.cell_length)
    else:
        cls, fn = {
            "merge": (MergeScenarioParams, gen_highway_merge),
            "tworoute": (TwoRouteScenarioParams, gen_two_route),
        }[args.scenario]
        params = cls(**{f.name: getattr(args, f.name) for f in dataclasses.fields(cls)})
        graph = fn(params)
    _write(args.out, serialize_graph(graph))
    return EXIT_OK


def _cmd_solve(args) -> int:
    graph = _load_graph(args.graph)
    params = SolveParams(args.alpha, args.clc, args.cflc)
    try:
        if args.command == "vi":
            sol = value_iterate(graph, args.goal, params)
        else:
            sol = solve(graph, args.goal, params, args.mode)
    except (UnknownGoalError, KeyError):
        raise _Invalid(f"{args.graph}: unknown goal cell {args.goal!r}") from None
    _write(args.out, serialize_policy(sol))
    if sol.stats.reopened_cells:
        print(
            f"reopen detected at {', '.join(sol.stats.reopened_cells[:5])}; solved by value iteration",
            file=sys.stderr,
        )
    return EXIT_OK


def _cmd_simulate(args) -> int:
    graph = _load_graph(args.graph)
    sol = _load_policy(args.policy, graph)
    if args.start not in graph:
        raise _Invalid(f"unknown start cell {args.start!r}")
    summary = estimate_cost(graph, sol, args.start, args.trials, args.seed, args.step_limit)
    print(json.dumps(summary.to_dict()))
    return EXIT_OK


def _cmd_render(args) -> int:
    from .render import render_policy

    graph = _load_graph(args.graph)
    sol = _load_policy(args.policy, graph)
    _write(args.out, render_policy(graph, sol, args.format))
    return EXIT_OK


def _cmd_report(args) -> int:
    from .report import write_report

    graph = _load_graph(args.graph)
    sol = _load_policy(args.policy, graph)
    try:
        paths = write_report(graph, sol, args.out_dir, tuple(args.window) if args.window else None)
    except OSError as exc:
        raise _IOFailure(f"cannot write report to {args.out_dir}: {exc}") from None
    for p in paths:
        print(p)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "vi": _cmd_solve,
    "simulate": _cmd_simulate,
    "render": _cmd_render,
    "report": _cmd_report,
}


def run(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _Invalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MonotonicityPrecheckFailed as exc:
        print(f"error: {args.graph}: {exc}", file=sys.stderr)
        return EXIT_PRECHECK
    except NonMonotoneError as exc:
        print(f"error: {args.graph}: {exc}", file=sys.stderr)
        return EXIT_NONMONOTONE
    except (UnreachableStartError, MissingActionError, NoConvergenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
