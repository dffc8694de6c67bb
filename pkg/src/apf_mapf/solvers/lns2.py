"""LNS2: plan everyone quickly with collisions allowed, then repair neighbourhoods.

With SIPPS the other agents' paths are soft constraints, so the low level
minimizes collisions with them. TA* has no notion of soft constraints: it
sees agents outside the neighbourhood only through their repulsive fields
(none when APF is off), while agents inside the neighbourhood are planned
one after another with hard constraints. A repair in which some agent finds
no path is rejected.
"""
from __future__ import annotations

import random
import time
from collections.abc import Sequence

from ..apf import APFParams, FieldPool
from ..grid import GridMap
from ..planners import ConstraintTables
from .common import (
    CollisionIndex,
    LowLevel,
    MapfInstance,
    Solution,
    conflict_graph,
    count_colliding_pairs,
    low_level_plan,
    path_fields,
    stream,
)


def select_neighborhood(graph: dict[int, set[int]], n_agents: int, size: int, rng: random.Random) -> list[int]:
    """A random colliding agent, its collision partners, then random fill."""
    colliding = sorted(graph)
    seed_agent = rng.choice(colliding)
    partners = sorted(graph[seed_agent])
    if len(partners) > size - 1:
        partners = rng.sample(partners, size - 1)
    chosen = [seed_agent, *partners]
    taken = set(chosen)
    want = min(size, n_agents)
    while len(chosen) < want:
        a = rng.randrange(n_agents)
        if a not in taken:
            taken.add(a)
            chosen.append(a)
    return chosen


class _State:
    """Current paths together with the constraint tables and fields they induce."""

    def __init__(self, grid, n, soft, apf, horizon):
        self.grid = grid
        self.soft = soft
        self.apf = apf
        self.horizon = horizon
        self.paths: list[list[int] | None] = [None] * n
        self.fields: list = [None] * n
        self.tables = ConstraintTables()
        self.pool = FieldPool()
        # equal-length windowed paths allow incremental collision counting
        self.index = CollisionIndex() if horizon is not None else None

    def attach(self, i: int, path: list[int]) -> None:
        self.paths[i] = path
        if self.index is not None:
            self.index.add(i, path)
        if self.soft:
            self.tables.add_path(path, hard=False)
        f = path_fields(self.grid, path, self.apf, self.horizon, owner=i)
        if f is not None:
            self.pool.add(f)
        self.fields[i] = f

    def detach(self, i: int) -> list[int]:
        path = self.paths[i]
        if self.index is not None:
            self.index.remove(i, path)
        if self.soft:
            self.tables.remove_path(path, hard=False)
        if self.fields[i] is not None:
            self.pool.remove(self.fields[i])
        self.paths[i] = None
        self.fields[i] = None
        return path

    def collisions(self) -> tuple[dict[int, set[int]], int]:
        if self.index is not None:
            return self.index.graph(), self.index.count()
        graph = conflict_graph(self.paths)
        return graph, count_colliding_pairs(graph)


def lns2_plan(
    grid: GridMap,
    starts: Sequence[int],
    goals: Sequence[int],
    low_level: LowLevel,
    apf: APFParams | None,
    rng: random.Random,
    *,
    neighborhood_size: int = 5,
    horizon: int | None = None,
    deadline: float | None = None,
    max_iterations: int | None = None,
) -> tuple[list[list[int] | None], dict[int, set[int]], dict]:
    """Returns ``(paths, conflict graph, log)``; unplanned agents are ``None``.

    ``log["colliding_pairs"]`` holds the colliding-pair count after the
    initial pass and after every accepted repair.
    """
    if neighborhood_size < 2:
        raise ValueError("neighborhood_size must be at least 2")
    n = len(starts)
    soft = low_level == "sipps"
    state = _State(grid, n, soft, apf, horizon)

    def plan(i: int, tables: ConstraintTables) -> list[int] | None:
        return low_level_plan(low_level, grid, starts[i], goals[i], tables, state.pool, horizon, deadline, rng)

    def expired() -> bool:
        return deadline is not None and time.perf_counter() > deadline

    order = list(range(n))
    rng.shuffle(order)
    for i in order:
        if expired():
            break
        path = plan(i, state.tables)
        if path is None:
            break
        state.attach(i, path)

    graph, cp = state.collisions()
    log = {"colliding_pairs": [cp], "iterations": 0, "accepted": 0}
    if any(p is None for p in state.paths):
        return state.paths, graph, log

    while cp > 0:
        if expired() or (max_iterations is not None and log["iterations"] >= max_iterations):
            break
        log["iterations"] += 1
        nb = select_neighborhood(graph, n, neighborhood_size, rng)
        old = {i: state.detach(i) for i in nb}
        rng.shuffle(nb)
        done = []
        ok = True
        inner = state.tables if soft else ConstraintTables()
        for i in nb:
            path = plan(i, inner)
            if path is None:
                ok = False
                break
            state.attach(i, path)
            if not soft:
                inner.add_path(path)
            done.append(i)
        if ok:
            new_graph, new_cp = state.collisions()
            if new_cp <= cp:
                graph, cp = new_graph, new_cp
                log["accepted"] += 1
                log["colliding_pairs"].append(cp)
                continue
        for i in done:
            state.detach(i)
        for i, path in old.items():
            state.attach(i, path)
    return state.paths, graph, log


def solve_lns2(
    instance: MapfInstance,
    low_level: LowLevel = "sipps",
    apf: APFParams | None = None,
    neighborhood_size: int = 5,
    time_limit: float | None = None,
    horizon: int | None = None,
    max_iterations: int | None = None,
) -> Solution:
    t0 = time.perf_counter()
    deadline = None if time_limit is None else t0 + time_limit
    rng = stream(instance.seed, "lns2")
    paths, graph, log = lns2_plan(
        instance.grid, instance.starts, instance.goals, low_level, apf, rng,
        neighborhood_size=neighborhood_size, horizon=horizon, deadline=deadline, max_iterations=max_iterations,
    )
    solved = all(p is not None for p in paths) and not graph
    out = [p if p is not None else [s] for p, s in zip(paths, instance.starts)]
    return Solution(out, solved, time.perf_counter() - t0, list(instance.goals), log)


class Lns2Planner:
    """Windowed LNS2. Agents still colliding at the deadline are reported failed."""

    name = "lns2"

    def __init__(self, grid: GridMap, low_level: LowLevel = "sipps", apf: APFParams | None = None, seed: int = 0,
                 neighborhood_size: int = 5, max_iterations: int | None = None) -> None:
        self.grid = grid
        self.low_level = low_level
        self.apf = apf
        self.neighborhood_size = neighborhood_size
        self.max_iterations = max_iterations
        self.rng = stream(seed, "lns2")
        self.last_log: dict = {}

    def plan(self, positions, goals, horizon, deadline=None, window=None):
        paths, graph, log = lns2_plan(
            self.grid, positions, goals, self.low_level, self.apf, self.rng,
            neighborhood_size=self.neighborhood_size, horizon=horizon, deadline=deadline,
            max_iterations=self.max_iterations,
        )
        self.last_log = log
        return [None if i in graph else p for i, p in enumerate(paths)]
