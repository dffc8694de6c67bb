"""Decentralized APF: every agent greedily descends attraction plus repulsion."""
from __future__ import annotations

import random
import time
from collections.abc import Sequence

from ..apf import APFParams, kernel_offsets
from ..grid import GridMap
from .common import MapfInstance, Solution, configs_to_paths, stream

DAPF_PRESET = APFParams(w=1.0, gamma=2.0, d_max=4, t_max=0)


def repulsion_map(grid: GridMap, config: Sequence[int], params: APFParams) -> dict[int, float]:
    """Summed point repulsion of all agents at their current cells."""
    out: dict[int, float] = {}
    if params.inactive:
        return out
    kernel = kernel_offsets(params)
    w, h = grid.width, grid.height
    for src in config:
        r0, c0 = divmod(src, w)
        for dr, dc, val in kernel:
            r, c = r0 + dr, c0 + dc
            if 0 <= r < h and 0 <= c < w:
                k = r * w + c
                out[k] = out.get(k, 0.0) + val
    return out


def _own(grid: GridMap, src: int, v: int, params: APFParams) -> float:
    if params.inactive:
        return 0.0
    (r0, c0), (r, c) = grid.coord(src), grid.coord(v)
    d = abs(r - r0) + abs(c - c0)
    return params.w * params.gamma ** (-d) if d < params.d_max else 0.0


def candidate_costs(grid: GridMap, config: Sequence[int], goals: Sequence[int], i: int, params: APFParams,
                    field: dict[int, float] | None = None) -> dict[int, float]:
    """Total potential of agent ``i``'s candidate cells (ignoring occupancy)."""
    if field is None:
        field = repulsion_map(grid, config, params)
    here = config[i]
    dist = grid.distance_table(goals[i]).dist
    return {
        v: field.get(v, 0.0) - _own(grid, here, v, params) + dist[v]
        for v in (here, *grid._nbrs[here])
    }


def dapf_step(grid: GridMap, config: Sequence[int], goals: Sequence[int], params: APFParams,
              rng: random.Random) -> list[int]:
    n = len(config)
    field = repulsion_map(grid, config, params)
    order = list(range(n))
    rng.shuffle(order)
    occ_now = {v: i for i, v in enumerate(config)}
    nxt: list[int | None] = [None] * n
    reserved: set[int] = set()
    for i in order:
        costs = candidate_costs(grid, config, goals, i, params, field)
        cands = list(costs)
        rng.shuffle(cands)
        best, best_cost = config[i], None
        for v in cands:
            if v in reserved:
                continue
            j = occ_now.get(v)
            if j is not None and j != i:
                if nxt[j] is None or nxt[j] == config[i]:
                    continue
            if best_cost is None or costs[v] < best_cost:
                best, best_cost = v, costs[v]
        nxt[i] = best
        reserved.add(best)
    return [int(v) for v in nxt]


def solve_dapf(
    instance: MapfInstance,
    params: APFParams = DAPF_PRESET,
    max_steps: int = 200,
    horizon: int | None = None,
) -> Solution:
    """Run DAPF until all agents sit on their goals or ``max_steps`` pass."""
    t0 = time.perf_counter()
    rng = stream(instance.seed, "dapf")
    goals = list(instance.goals)
    configs = [list(instance.starts)]
    limit = horizon if horizon is not None else max_steps
    solved = False
    while True:
        if horizon is None and configs[-1] == goals:
            solved = True
            break
        if len(configs) - 1 >= limit:
            solved = horizon is not None
            break
        configs.append(dapf_step(instance.grid, configs[-1], goals, params, rng))
    return Solution(configs_to_paths(configs), solved, time.perf_counter() - t0, goals, {"steps": len(configs) - 1})


class DapfPlanner:
    name = "dapf"

    def __init__(self, grid: GridMap, apf: APFParams | None = None, seed: int = 0) -> None:
        self.grid = grid
        self.params = apf if apf is not None else DAPF_PRESET
        self.rng = stream(seed, "dapf")

    def plan(self, positions, goals, horizon, deadline=None, window=None):
        configs = [list(positions)]
        for _ in range(horizon):
            configs.append(dapf_step(self.grid, configs[-1], goals, self.params, self.rng))
        return configs_to_paths(configs)
