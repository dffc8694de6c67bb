import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apf_mapf.apf import SIPPS_PRESET, APFField, FieldPool, build_path_apf
from apf_mapf.grid import GridMap
from apf_mapf.maps import load_benchmark
from apf_mapf.planners import (
    ConstraintTables,
    build_safe_intervals,
    path_violations,
    plan_sipps,
    plan_temporal_astar,
    soft_collisions,
)


def _cells(g, coords):
    return [g.index(r, c) for r, c in coords]


# -- constraint tables ---------------------------------------------------

def test_hard_path_blocks_vertices_edges_and_parking():
    tables = ConstraintTables.from_paths(hard=[[0, 1, 2]])
    assert tables.vertex_blocked(1, 1) and not tables.vertex_blocked(1, 2)
    assert tables.edge_blocked(1, 0, 1) and tables.edge_blocked(0, 1, 1)
    assert tables.vertex_blocked(2, 100)
    assert tables.last_hard_at(1) == 1
    assert tables.hard_terminal_from(2) == 2


def test_remove_path_restores_empty_tables():
    tables = ConstraintTables()
    tables.add_path([3, 4, 5], hard=False)
    tables.add_path([3, 4, 5], hard=True)
    tables.remove_path([3, 4, 5], hard=False)
    tables.remove_path([3, 4, 5], hard=True)
    assert not tables.vertex_blocked(4, 1) and not tables.soft_at(4, 1)
    assert tables.latest_time == ConstraintTables().latest_time


def test_safe_intervals_split_around_hard_visits():
    tables = ConstraintTables.from_paths(vertex=[(7, 2), (7, 5)])
    ivs = build_safe_intervals(tables, 7)
    spans = [(iv[0], iv[1]) for iv in ivs]
    assert spans == [(0, 2), (3, 5), (6, math.inf)]


# -- temporal A* ---------------------------------------------------------

def test_astar_matches_bfs_oracle(bfs_oracle):
    for name, cases in bfs_oracle.items():
        g = load_benchmark(name)
        for (s, t, d) in cases[:60]:
            res = plan_temporal_astar(g, g.index(*s), g.index(*t))
            assert res is not None and len(res.path) - 1 == d


def test_bfs_tables_match_oracle(bfs_oracle):
    for name, cases in bfs_oracle.items():
        g = load_benchmark(name)
        for (s, t, d) in cases:
            assert g.distance_table(g.index(*t))[g.index(*s)] == d


def test_astar_waits_for_vertex_constraint():
    g = GridMap(3, 1)
    tables = ConstraintTables.from_paths(vertex=[(1, 1)])
    res = plan_temporal_astar(g, 0, 2, tables)
    assert res.path == [0, 0, 1, 2]


def test_astar_respects_edge_constraint_and_goal_occupancy():
    g = GridMap(3, 2)
    tables = ConstraintTables.from_paths(edge=[(0, 1, 1)], vertex=[(2, 4)])
    res = plan_temporal_astar(g, 0, 2, tables)
    assert not path_violations(res.path, tables)
    assert res.path[1] != 1
    # the goal is only final once nobody visits it afterwards
    assert len(res.path) - 1 >= 5


def test_astar_fails_when_goal_is_parked_on():
    g = GridMap(3, 1)
    tables = ConstraintTables.from_paths(hard=[[2]])
    assert plan_temporal_astar(g, 0, 2, tables) is None


def test_astar_windowed_returns_exact_length():
    g = GridMap(8, 8)
    res = plan_temporal_astar(g, 0, 63, horizon=5)
    assert len(res.path) == 6
    assert g.distance_table(63)[res.path[-1]] == 14 - 5
    res = plan_temporal_astar(g, 0, 1, horizon=5)
    assert res.path[:2] == [0, 1] and res.path[-1] == 1


@pytest.mark.parametrize("x, expected", [
    (3.0, [(0, 0), (1, 0), (1, 1), (1, 2), (0, 2)]),
    (1.0, [(0, 0), (0, 1), (0, 2)]),
])
def test_astar_detours_around_strong_field(x, expected):
    g = GridMap(3, 2)
    gray = g.index(0, 1)
    pool = FieldPool([APFField(entries={}, tail={gray: x}, tail_from=0)])
    res = plan_temporal_astar(g, g.index(0, 0), g.index(0, 2), fields=pool)
    assert [g.coord(v) for v in res.path] == expected


def test_empty_pool_gives_vanilla_path():
    g = load_benchmark("random-32-32-10")
    cells = g.free_cells()
    rng = random.Random(5)
    for _ in range(20):
        s, t = rng.sample(cells, 2)
        a = plan_temporal_astar(g, s, t, rng=random.Random(1))
        b = plan_temporal_astar(g, s, t, fields=FieldPool(), rng=random.Random(1))
        assert a.path == b.path


# -- SIPPS ---------------------------------------------------------------

def _oracle_case(case):
    g = GridMap(4, 4, frozenset(map(tuple, case["blocked"])))
    tables = ConstraintTables()
    for p in case["soft"]:
        tables.add_path(_cells(g, p), hard=False)
    return g, g.index(*case["start"]), g.index(*case["goal"]), tables


def test_sipps_minimizes_soft_collisions(sipps_oracle):
    assert len(sipps_oracle) == 30
    for case in sipps_oracle:
        g, s, t, tables = _oracle_case(case)
        res = plan_sipps(g, s, t, tables)
        assert res is not None
        assert res.collisions == case["min_collisions"]
        assert soft_collisions(res.path, tables) == res.collisions
        assert res.path[0] == s and res.path[-1] == t


def test_sipps_respects_hard_constraints():
    g = GridMap(5, 5)
    rng = random.Random(3)
    for _ in range(40):
        s, t, o1, o2 = rng.sample(range(25), 4)
        other = plan_temporal_astar(g, o1, o2).path
        tables = ConstraintTables.from_paths(hard=[other])
        res = plan_sipps(g, s, t, tables)
        ref = plan_temporal_astar(g, s, t, tables)
        assert (res is None) == (ref is None)
        if res is not None:
            assert not path_violations(res.path, tables)
            assert len(res.path) == len(ref.path)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_sipps_with_fields_stays_complete(data):
    g = GridMap(5, 5, frozenset({(2, 1), (2, 2), (2, 3)}))
    free = g.free_cells()
    s, t = data.draw(st.lists(st.sampled_from(free), min_size=2, max_size=2, unique=True))
    others = [plan_temporal_astar(g, a, b).path
              for a, b in data.draw(st.lists(st.tuples(st.sampled_from(free), st.sampled_from(free)), max_size=3))]
    tables = ConstraintTables.from_paths(soft=others)
    pool = FieldPool(build_path_apf(g, p, SIPPS_PRESET) for p in others)
    vanilla = plan_sipps(g, s, t, tables)
    guided = plan_sipps(g, s, t, tables, pool)
    assert vanilla is not None and guided is not None
    assert soft_collisions(guided.path, tables) == guided.collisions
    assert guided.path[-1] == t
    assert all(b in g.neighbors(a) or a == b for a, b in zip(guided.path, guided.path[1:]))


def test_sipps_windowed_length():
    g = GridMap(8, 8)
    res = plan_sipps(g, 0, 63, horizon=4)
    assert len(res.path) == 5
