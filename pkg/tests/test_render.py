import re

import pytest

from lanemdp import Cell, Solution, SolveParams, build, solve
from lanemdp.render import render_ascii, render_policy, render_svg
from lanemdp.scenarios import MergeScenarioParams, gen_highway_merge
from conftest import chain_graph, two_lane_graph

P = SolveParams(0.01, 5.0)


def arrows(svg: bytes, style: str) -> int:
    return len(re.findall(rf'class="arrow {style}"', svg.decode()))


def test_single_stay_one_solid_arrow():
    g = chain_graph(2)
    svg = render_svg(g, solve(g, "a1", P))
    assert arrows(svg, "solid") == 1 and arrows(svg, "dashed") == 0


def test_lane_change_solid_plus_dashed():
    g = two_lane_graph(3)
    sol = solve(g, "l2", P)
    only_lc = {c: (a if c == "r0" else None) for c, a in sol.policy.items()}
    assert sol.policy["r0"].failure == "r1"
    svg = render_svg(g, Solution(sol.goal, P, sol.g, only_lc))
    assert arrows(svg, "solid") == 1 and arrows(svg, "dashed") == 1
    assert 'data-from="r0" data-to="r1"' in svg.decode()


def test_unreachable_unmarked():
    g = build([Cell("a", 1, 1, successors=("b",)), Cell("b", 1, 1), Cell("z", 1, 1)])
    svg = render_svg(g, solve(g, "b", P)).decode()
    assert 'data-from="z"' not in svg


def test_svg_deterministic():
    g = gen_highway_merge(MergeScenarioParams(road_length=600, merge_position=300, c_merge=50))
    sol = solve(g, "r59", P)
    assert render_svg(g, sol) == render_svg(g, sol)
    assert render_svg(g, sol).startswith(b"<?xml")


def test_ascii_grid_with_layout():
    g = gen_highway_merge(MergeScenarioParams(road_length=200, merge_position=100))
    text = render_ascii(g, solve(g, "r19", P)).decode()
    rows = text.splitlines()
    assert rows[0].startswith("   2 |")
    assert rows[2].startswith("   0 |") and rows[2].rstrip().endswith("G")
    # lane changes right, forced near the end, last cells cannot reach the goal
    assert re.fullmatch(r"\\+v+\.+", rows[0][6:])


def test_ascii_table_without_layout():
    g = chain_graph(3)
    text = render_ascii(g, solve(g, "a2", P)).decode().splitlines()
    assert text[0].split()[:2] == ["cell", "g"]
    assert text[1].split() == ["a0", "20", "stay", "a1", "-"]
    assert text[3].split() == ["a2", "0", "-", "-", "-"]


def test_unknown_format():
    g = chain_graph(2)
    with pytest.raises(ValueError):
        render_policy(g, solve(g, "a1", P), "png")
