"""PIBT (priority inheritance with backtracking), with APF candidate ordering."""
from __future__ import annotations

import random
import time
from collections.abc import Sequence

from ..apf import APFParams, kernel_offsets
from ..grid import GridMap
from .common import MapfInstance, Solution, configs_to_paths, is_valid_transition, stream


def lookahead(grid: GridMap, dist: Sequence[int], v: int, steps: int) -> list[int]:
    """``v`` followed by ``steps`` greedy h-optimal moves (first in neighbour order)."""
    out = [v]
    nbrs = grid._nbrs
    for _ in range(steps):
        d = dist[v]
        if d <= 0:
            out.append(v)
            continue
        for u in nbrs[v]:
            if dist[u] == d - 1:
                v = u
                break
        out.append(v)
    return out


def _spread_into(pool: dict[int, float], grid: GridMap, cells: Sequence[int], kernel) -> None:
    w, h = grid.width, grid.height
    for src in cells:
        r0, c0 = divmod(src, w)
        for dr, dc, val in kernel:
            r, c = r0 + dr, c0 + dc
            if 0 <= r < h and 0 <= c < w:
                k = r * w + c
                pool[k] = pool.get(k, 0.0) + val


def pibt_step(
    grid: GridMap,
    config: Sequence[int],
    goals: Sequence[int],
    priorities: Sequence[float],
    apf: APFParams | None = None,
    rng: random.Random | None = None,
    pinned: dict[int, int] | None = None,
) -> list[int] | None:
    """Next configuration from ``config``.

    Candidates of each agent are its cell and neighbours, shuffled and then
    sorted by ``h + pool[v]``. The APF pool only grows between top-level
    priority passes: after an agent and everyone it pushed are settled, their
    look-ahead fields are added for the remaining agents.

    ``pinned`` fixes some agents' next cells (LaCAM constraints); ``None`` is
    returned when the pinned moves cannot be completed to a valid transition.
    """
    if rng is None:
        rng = random.Random(0)
    n = len(config)
    nbrs = grid._nbrs
    dist = [grid.distance_table(g).dist for g in goals]
    use_apf = apf is not None and not apf.inactive
    kernel = kernel_offsets(apf) if use_apf else ()
    pool: dict[int, float] = {}

    occ_now = {v: i for i, v in enumerate(config)}
    occ_next: dict[int, int] = {}
    nxt: list[int | None] = [None] * n

    if pinned:
        for i, v in pinned.items():
            if v != config[i] and v not in nbrs[config[i]]:
                return None
            if v in occ_next:
                return None
            nxt[i] = v
            occ_next[v] = i
        for i, v in pinned.items():
            j = occ_now.get(v)
            if j is not None and j != i and nxt[j] == config[i]:
                return None
        if use_apf:
            cells = []
            for i in pinned:
                cells.extend(lookahead(grid, dist[i], pinned[i], apf.t_max))
            _spread_into(pool, grid, cells, kernel)

    settled: list[int] = []

    def func(i: int) -> bool:
        settled.append(i)
        here = config[i]
        di = dist[i]
        cands = [here, *nbrs[here]]
        rng.shuffle(cands)
        if use_apf:
            cands.sort(key=lambda u: di[u] + pool.get(u, 0.0))
        else:
            cands.sort(key=di.__getitem__)
        for v in cands:
            if v in occ_next:
                continue
            j = occ_now.get(v)
            if j is not None and nxt[j] == here:
                continue
            nxt[i] = v
            occ_next[v] = i
            if j is not None and j != i and nxt[j] is None and not func(j):
                continue
            return True
        nxt[i] = here
        occ_next[here] = i
        return False

    order = sorted(range(n), key=lambda i: priorities[i], reverse=True)
    for i in order:
        if nxt[i] is not None:
            continue
        settled.clear()
        ok = func(i)
        if pinned and not ok:
            return None
        if use_apf:
            cells = []
            for a in settled:
                cells.extend(lookahead(grid, dist[a], nxt[a], apf.t_max))
            _spread_into(pool, grid, cells, kernel)

    out = [int(v) for v in nxt]
    if pinned and not is_valid_transition(grid, config, out):
        return None
    return out


def initial_priorities(grid: GridMap, starts: Sequence[int], goals: Sequence[int], rng: random.Random) -> tuple[list[float], list[float]]:
    """Random fractional tie-breaks; they double as the starting priorities."""
    fracs = [rng.random() for _ in starts]
    return fracs, list(fracs)


def update_priorities(priorities: list[float], fracs: Sequence[float], config: Sequence[int], goals: Sequence[int]) -> None:
    for i, (v, g) in enumerate(zip(config, goals)):
        priorities[i] = fracs[i] if v == g else priorities[i] + 1


def solve_pibt(
    instance: MapfInstance,
    apf: APFParams | None = None,
    horizon: int | None = None,
    max_steps: int = 1000,
) -> Solution:
    """Iterate :func:`pibt_step` until every agent is at its goal.

    With ``horizon`` the run stops after exactly that many steps and counts as
    solved.
    """
    t0 = time.perf_counter()
    grid, goals = instance.grid, instance.goals
    rng = stream(instance.seed, "pibt")
    fracs, prio = initial_priorities(grid, instance.starts, goals, rng)
    configs = [list(instance.starts)]
    limit = horizon if horizon is not None else max_steps
    solved = False
    while True:
        cur = configs[-1]
        if horizon is None and cur == goals:
            solved = True
            break
        if len(configs) - 1 >= limit:
            solved = horizon is not None
            break
        nxt = pibt_step(grid, cur, goals, prio, apf, rng)
        update_priorities(prio, fracs, nxt, goals)
        configs.append(nxt)
    paths = configs_to_paths(configs)
    return Solution(paths, solved, time.perf_counter() - t0, list(goals), {"steps": len(configs) - 1})


class PibtPlanner:
    """Windowed PIBT for the lifelong loop; priorities persist across episodes."""

    name = "pibt"

    def __init__(self, grid: GridMap, apf: APFParams | None = None, seed: int = 0) -> None:
        self.grid = grid
        self.apf = apf
        self.rng = stream(seed, "pibt")
        self.fracs: list[float] | None = None
        self.priorities: list[float] | None = None

    def plan(self, positions, goals, horizon, deadline=None, window=None):
        """``horizon`` configurations ahead; priorities advance by ``window`` steps."""
        if self.fracs is None or len(self.fracs) != len(positions):
            self.fracs, self.priorities = initial_priorities(self.grid, positions, goals, self.rng)
        window = horizon if window is None else min(window, horizon)
        configs = [list(positions)]
        prio = list(self.priorities)
        for t in range(horizon):
            nxt = pibt_step(self.grid, configs[-1], goals, prio, self.apf, self.rng)
            update_priorities(prio, self.fracs, nxt, goals)
            configs.append(nxt)
            if t + 1 == window:
                self.priorities = list(prio)
        return configs_to_paths(configs)
