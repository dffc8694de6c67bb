"""LaCAM: depth-first search over configurations with lazy constraint generation.

Successors of a configuration are produced one at a time by PIBT under a
growing set of agent -> vertex pinnings, so only the configurations actually
visited are ever generated.
"""
from __future__ import annotations

import random
import time
from collections import deque
from collections.abc import Sequence

from ..apf import APFParams
from ..grid import GridMap
from .common import MapfInstance, Solution, configs_to_paths, stream
from .pibt import initial_priorities, pibt_step

_DEADLINE_EVERY = 16


class _Constraint:
    __slots__ = ("parent", "who", "where", "depth")

    def __init__(self, parent, who, where, depth):
        self.parent = parent
        self.who = who
        self.where = where
        self.depth = depth

    def pins(self) -> dict[int, int]:
        out = {}
        c = self
        while c is not None and c.who is not None:
            out[c.who] = c.where
            c = c.parent
        return out


class _Node:
    __slots__ = ("config", "parent", "priorities", "order", "tree", "depth")

    def __init__(self, config, parent, priorities, depth):
        self.config = config
        self.parent = parent
        self.priorities = priorities
        self.order = sorted(range(len(config)), key=lambda i: priorities[i], reverse=True)
        self.tree = deque([_Constraint(None, None, None, 0)])
        self.depth = depth


def _child_priorities(parent: Sequence[float], fracs: Sequence[float], config, goals) -> list[float]:
    return [fracs[i] if v == g else parent[i] + 1 for i, (v, g) in enumerate(zip(config, goals))]


def lacam_search(
    grid: GridMap,
    starts: Sequence[int],
    goals: Sequence[int],
    rng: random.Random,
    apf: APFParams | None = None,
    *,
    fracs: Sequence[float] | None = None,
    priorities: Sequence[float] | None = None,
    depth_goal: int | None = None,
    deadline: float | None = None,
    max_nodes: int | None = None,
) -> tuple[list[list[int]], bool, dict]:
    """Configurations from ``starts`` to the goal configuration.

    With ``depth_goal`` any configuration that many steps ahead ends the
    search. Returns ``(configs, found, stats)``; when nothing is found the
    configurations lead to the deepest node reached.
    """
    if fracs is None:
        fracs, priorities = initial_priorities(grid, starts, goals, rng)
    elif priorities is None:
        priorities = list(fracs)
    goal_key = tuple(goals)
    nbrs = grid._nbrs
    root = _Node(tuple(starts), None, list(priorities), 0)
    explored = {root.config: root}
    stack = [root]
    deepest = root
    stats = {"nodes": 1, "generated": 0, "rejected": 0}
    found = None
    iters = 0
    while stack:
        node = stack[-1]
        if (depth_goal is None and node.config == goal_key) or (depth_goal is not None and node.depth >= depth_goal):
            found = node
            break
        iters += 1
        if deadline is not None and iters % _DEADLINE_EVERY == 0 and time.perf_counter() > deadline:
            break
        if max_nodes is not None and stats["nodes"] >= max_nodes:
            break
        if not node.tree:
            stack.pop()
            continue
        c = node.tree.popleft()
        if c.depth < len(node.config):
            i = node.order[c.depth]
            here = node.config[i]
            cands = [here, *nbrs[here]]
            rng.shuffle(cands)
            for u in cands:
                node.tree.append(_Constraint(c, i, u, c.depth + 1))
        stats["generated"] += 1
        nxt = pibt_step(grid, node.config, goals, node.priorities, apf, rng, pinned=c.pins())
        if nxt is None:
            stats["rejected"] += 1
            continue
        key = tuple(nxt)
        if key in explored:
            stats["rejected"] += 1
            continue
        child = _Node(key, node, _child_priorities(node.priorities, fracs, key, goals), node.depth + 1)
        explored[key] = child
        stats["nodes"] += 1
        stack.append(child)
        if child.depth > deepest.depth:
            deepest = child
    end = found if found is not None else deepest
    chain = []
    while end is not None:
        chain.append(list(end.config))
        end = end.parent
    chain.reverse()
    return chain, found is not None, stats


def solve_lacam(
    instance: MapfInstance,
    apf: APFParams | None = None,
    time_limit: float | None = None,
    max_nodes: int | None = None,
) -> Solution:
    t0 = time.perf_counter()
    deadline = None if time_limit is None else t0 + time_limit
    rng = stream(instance.seed, "lacam")
    configs, found, stats = lacam_search(
        instance.grid, instance.starts, instance.goals, rng, apf, deadline=deadline, max_nodes=max_nodes
    )
    paths = configs_to_paths(configs) if found else [[s] for s in instance.starts]
    return Solution(paths, found, time.perf_counter() - t0, list(instance.goals), stats)


class LacamPlanner:
    """Windowed LaCAM: any configuration ``horizon`` steps ahead ends a search.

    Priorities carry over between episodes as in :class:`PibtPlanner`.
    """

    name = "lacam"

    def __init__(self, grid: GridMap, apf: APFParams | None = None, seed: int = 0, max_nodes: int | None = None) -> None:
        self.grid = grid
        self.apf = apf
        self.max_nodes = max_nodes
        self.rng = stream(seed, "lacam")
        self.fracs: list[float] | None = None
        self.priorities: list[float] | None = None

    def plan(self, positions, goals, horizon, deadline=None, window=None):
        if self.fracs is None or len(self.fracs) != len(positions):
            self.fracs, self.priorities = initial_priorities(self.grid, positions, goals, self.rng)
        configs, _, _ = lacam_search(
            self.grid, positions, goals, self.rng, self.apf,
            fracs=self.fracs, priorities=self.priorities, depth_goal=horizon,
            deadline=deadline, max_nodes=self.max_nodes,
        )
        while len(configs) < horizon + 1:
            configs.append(list(configs[-1]))
        window = horizon if window is None else min(window, horizon)
        prio = list(self.priorities)
        for cfg in configs[1 : window + 1]:
            prio = _child_priorities(prio, self.fracs, cfg, goals)
        self.priorities = prio
        return configs_to_paths(configs)
