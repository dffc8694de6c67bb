"""Prioritized planning over a TA* or SIPPS low level."""
from __future__ import annotations

import random
import time
from collections.abc import Sequence

from ..apf import APFParams, FieldPool
from ..grid import GridMap
from ..planners import ConstraintTables
from .common import LowLevel, MapfInstance, Solution, low_level_plan, path_fields, stream


def prioritized_plan(
    grid: GridMap,
    starts: Sequence[int],
    goals: Sequence[int],
    low_level: LowLevel,
    apf: APFParams | None,
    rng: random.Random,
    *,
    horizon: int | None = None,
    deadline: float | None = None,
    stop_on_failure: bool = True,
) -> tuple[list[list[int] | None], list[int]]:
    """Plan agents one by one in a random order; returns ``(paths, order)``.

    Each agent treats the paths of all earlier agents as hard constraints
    and, with APF on, as repulsive fields. With ``stop_on_failure`` unset a
    failed agent is kept in place (its stay path becomes a constraint for the
    rest) and reported as ``None``.
    """
    n = len(starts)
    order = list(range(n))
    rng.shuffle(order)
    tables = ConstraintTables()
    pool = FieldPool()
    paths: list[list[int] | None] = [None] * n
    for i in order:
        path = None
        if deadline is None or time.perf_counter() <= deadline:
            path = low_level_plan(low_level, grid, starts[i], goals[i], tables, pool, horizon, deadline, rng)
        if path is None:
            if stop_on_failure:
                return paths, order
            stay = [starts[i]] * ((horizon or 0) + 1)
            tables.add_path(stay)
            f = path_fields(grid, stay, apf, horizon, owner=i)
            if f is not None:
                pool.add(f)
            continue
        paths[i] = path
        tables.add_path(path)
        f = path_fields(grid, path, apf, horizon, owner=i)
        if f is not None:
            pool.add(f)
    return paths, order


def solve_prp(
    instance: MapfInstance,
    low_level: LowLevel = "astar",
    apf: APFParams | None = None,
    horizon: int | None = None,
    time_limit: float | None = None,
) -> Solution:
    t0 = time.perf_counter()
    deadline = None if time_limit is None else t0 + time_limit
    rng = stream(instance.seed, "prp")
    paths, order = prioritized_plan(
        instance.grid, instance.starts, instance.goals, low_level, apf, rng, horizon=horizon, deadline=deadline
    )
    solved = all(p is not None for p in paths)
    out = [p if p is not None else [s] for p, s in zip(paths, instance.starts)]
    return Solution(out, solved, time.perf_counter() - t0, list(instance.goals), {"order": order})


class PrpPlanner:
    name = "prp"

    def __init__(self, grid: GridMap, low_level: LowLevel = "astar", apf: APFParams | None = None, seed: int = 0) -> None:
        self.grid = grid
        self.low_level = low_level
        self.apf = apf
        self.rng = stream(seed, "prp")

    def plan(self, positions, goals, horizon, deadline=None, window=None):
        paths, _ = prioritized_plan(
            self.grid, positions, goals, self.low_level, self.apf, self.rng,
            horizon=horizon, deadline=deadline, stop_on_failure=False,
        )
        return paths
