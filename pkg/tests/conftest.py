from __future__ import annotations

import random

import pytest

from lanemdp import Cell, SolveParams, build


def random_graph(rng: random.Random, max_cells: int = 300):
    """Random multi-lane road with spur roads forming forks, merges and loops.

    Returns (graph, goal, params) where params satisfy the monotonicity
    precheck (c_flc <= min c/l / alpha).
    """
    lanes = rng.randint(1, 4)
    cols = rng.randint(3, max(3, (max_cells - 40) // lanes))
    cells: dict[str, dict] = {}

    def add(cid, length, **kw):
        cells[cid] = dict(id=cid, length=length, cost=round(length * rng.uniform(1.0, 3.0), 6),
                          left=None, right=None, successors=[], **kw)

    for j in range(cols):
        for i in range(lanes):
            add(f"c{i}_{j}", round(rng.uniform(5.0, 20.0), 3))
    for j in range(cols):
        for i in range(lanes):
            cid = f"c{i}_{j}"
            if j + 1 < cols:
                cells[cid]["successors"].append(f"c{i}_{j + 1}")
            if i + 1 < lanes:
                cells[cid]["left"] = f"c{i + 1}_{j}"
                cells[f"c{i + 1}_{j}"]["right"] = cid

    # lane drops: a lane ends early, leaving dead ends
    for i in range(1, lanes):
        if rng.random() < 0.3:
            stop = rng.randint(1, cols - 1)
            cells[f"c{i}_{stop - 1}"]["successors"] = []

    budget = max_cells - len(cells)
    k = 0
    while budget >= 2 and rng.random() < 0.85:
        n = rng.randint(1, min(8, budget))
        a, b = rng.randrange(cols), rng.randrange(cols)
        src = f"c{rng.randrange(lanes)}_{a}"
        dst = f"c{rng.randrange(lanes)}_{b}"
        names = [f"s{k}_{t}" for t in range(n)]
        for t, nm in enumerate(names):
            add(nm, round(rng.uniform(5.0, 20.0), 3))
            if t + 1 < n:
                cells[nm]["successors"].append(names[t + 1])
        cells[names[-1]]["successors"].append(dst)
        cells[src]["successors"].append(names[0])
        k += 1
        budget -= n

    graph = build(
        Cell(d["id"], d["length"], d["cost"], d["left"], d["right"], tuple(d["successors"]))
        for d in cells.values()
    )
    alpha = rng.choice([0.005, 0.01, 0.02, 0.05])
    ratio = min(c / l for c, l in zip(graph.cost, graph.length))
    cflc = ratio / alpha * rng.choice([1.0, rng.uniform(0.2, 1.0)])
    params = SolveParams(alpha, rng.choice([0.0, 1.0, 5.0, rng.uniform(0.0, 50.0)]), cflc)
    goal = f"c{rng.randrange(lanes)}_{cols - 1}"
    return graph, goal, params


@pytest.fixture
def rng():
    return random.Random(20260401)


def chain_graph(n: int = 3, length: float = 10.0, cost: float | None = None):
    """Single lane a0 -> a1 -> ... -> a{n-1}."""
    return build(
        Cell(f"a{i}", length, length if cost is None else cost,
             successors=(f"a{i + 1}",) if i + 1 < n else ())
        for i in range(n)
    )


def two_lane_graph(n: int = 4, length: float = 10.0):
    """Right lane r*, left lane l*, neighbors at equal index."""
    cells = []
    for i in range(n):
        nxt = i + 1 < n
        cells.append(Cell(f"r{i}", length, length, f"l{i}", None, (f"r{i + 1}",) if nxt else ()))
        cells.append(Cell(f"l{i}", length, length, None, f"r{i}", (f"l{i + 1}",) if nxt else ()))
    return build(cells)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
