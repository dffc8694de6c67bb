"""Rolling-horizon lifelong execution: plan, repair failures, execute, repeat.

Every episode plans ``horizon`` steps for all agents, executes the first
``window`` of them and hands out new goals to agents that reached theirs.
Planning failures never stop the run: failed agents wait in place, and any
plan that would collide with them is demoted to waiting as well.
"""
from __future__ import annotations

import random
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .apf import APFParams
from .grid import GridMap
from .solvers import conflict_graph, is_valid_transition, make_planner, stream

FAILURE_POLICY = "AllAgents+iStay+Persist"


@dataclass(frozen=True)
class LifelongConfig:
    window: int = 5
    horizon: int = 5
    step_limit: int = 100
    planning_deadline: float = 10.0
    seed: int = 0
    failure_policy: str = FAILURE_POLICY

    def __post_init__(self) -> None:
        if self.window <= 0 or self.horizon <= 0:
            raise ValueError("window and horizon must be positive")
        if self.window > self.horizon:
            raise ValueError("window must not exceed horizon")
        if self.step_limit < 0 or self.step_limit % self.window:
            raise ValueError("step_limit must be a non-negative multiple of window")
        if self.planning_deadline <= 0:
            raise ValueError("planning_deadline must be positive")
        if self.failure_policy != FAILURE_POLICY:
            raise ValueError(f"only {FAILURE_POLICY} is supported")


def assign_goal(agent: int, current: int, rng: random.Random, free_cells: Sequence[int]) -> int:
    """Uniform free cell other than ``current``."""
    if len(free_cells) < 2:
        raise ValueError("need at least two free cells")
    while True:
        v = free_cells[rng.randrange(len(free_cells))]
        if v != current:
            return v


class TaskAssigner:
    """Independent, seeded goal stream per agent."""

    def __init__(self, grid: GridMap, seed: int = 0) -> None:
        self.free = grid.free_cells()
        self.seed = seed
        self._rngs: dict[int, random.Random] = {}

    def next_goal(self, agent: int, current: int) -> int:
        rng = self._rngs.get(agent)
        if rng is None:
            rng = self._rngs[agent] = stream(self.seed, f"tasks/{agent}")
        return assign_goal(agent, current, rng, self.free)


def _usable(grid: GridMap, plan, start: int, length: int) -> list[int] | None:
    """``plan`` cut or padded to ``length`` cells, or ``None`` if it is not executable."""
    if plan is None:
        return None
    try:
        cells = [int(v) for v in plan]
    except (TypeError, ValueError):
        return None
    if not cells or cells[0] != start:
        return None
    cells = cells[:length]
    cells.extend([cells[-1]] * (length - len(cells)))
    for a, b in zip(cells, cells[1:]):
        if not grid.is_free(b) or (a != b and not grid.adjacent(a, b)):
            return None
    return cells


def apply_failure_policy(
    grid: GridMap,
    plans: Sequence[Sequence[int] | None],
    current: Sequence[int],
    window: int,
) -> tuple[list[list[int]], list[int]]:
    """Executable ``window``-step moves for every agent, and the agents told to stay.

    Missing or malformed plans become stay paths. Then, until nothing changes,
    every moving agent involved in a collision is demoted to staying. The
    all-stay assignment is conflict-free, so this always terminates with a
    valid set of moves.
    """
    if len(plans) != len(current):
        raise ValueError("one plan per agent is required")
    length = window + 1
    out: list[list[int]] = []
    staying: set[int] = set()
    for i, (plan, v) in enumerate(zip(plans, current)):
        cells = _usable(grid, plan, v, length)
        if cells is None:
            cells = [v] * length
            staying.add(i)
        out.append(cells)
    while True:
        graph = conflict_graph(out)
        demote = [i for i in graph if i not in staying]
        if not demote:
            break
        for i in demote:
            out[i] = [current[i]] * length
            staying.add(i)
    return out, sorted(staying)


@dataclass
class EpisodeRecord:
    start: int
    failed: list[int]
    demoted: list[int]
    wall_time: float


@dataclass
class LifelongLog:
    executed: list[list[int]] = field(default_factory=list)
    completions: list[tuple[int, int]] = field(default_factory=list)
    episodes: list[EpisodeRecord] = field(default_factory=list)
    goals: list[list[int]] = field(default_factory=list)

    def event_lines(self, grid: GridMap) -> list[str]:
        done: dict[int, list[int]] = {}
        for agent, t in self.completions:
            done.setdefault(t, []).append(agent)
        lines = []
        for t, config in enumerate(self.executed):
            cells = ";".join(f"{i}:{r},{c}" for i, (r, c) in enumerate(grid.coord(v) for v in config))
            ids = ",".join(str(a) for a in sorted(done.get(t, [])))
            lines.append(f"{t};{cells};completed:[{ids}]")
        return lines

    def deterministic_digest(self) -> tuple:
        """Everything except wall-clock times."""
        return (
            tuple(tuple(c) for c in self.executed),
            tuple(self.completions),
            tuple((e.start, tuple(e.failed), tuple(e.demoted)) for e in self.episodes),
        )


def write_event_log(log: LifelongLog, grid: GridMap, path: str | Path) -> None:
    Path(path).write_text("\n".join(log.event_lines(grid)) + "\n")


def parse_event_log(text: str) -> list[tuple[int, list[tuple[int, int]], list[int]]]:
    """``(t, positions, completed ids)`` per line of an event log."""
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        parts = line.split(";")
        t = int(parts[0])
        positions = []
        for item in parts[1:-1]:
            _, rc = item.split(":")
            r, c = rc.split(",")
            positions.append((int(r), int(c)))
        tail = parts[-1]
        if not tail.startswith("completed:[") or not tail.endswith("]"):
            raise ValueError(f"malformed event line: {line!r}")
        inner = tail[len("completed:[") : -1]
        out.append((t, positions, [int(x) for x in inner.split(",")] if inner else []))
    return out


@dataclass
class Metrics:
    throughput: int
    avg_runtime_per_episode: float
    failure_count: int
    episodes: int


def run_lifelong(
    grid: GridMap,
    k_agents: int,
    solver: str = "pibt",
    low_level: str = "astar",
    apf: APFParams | None = None,
    cfg: LifelongConfig = LifelongConfig(),
    *,
    planner=None,
    starts: Sequence[int] | None = None,
    assigner=None,
    planner_options: dict | None = None,
    on_episode: Callable[[int, list[int]], None] | None = None,
) -> tuple[Metrics, LifelongLog]:
    """Run ``cfg.step_limit`` steps of lifelong MAPF and collect metrics.

    ``planner`` overrides the solver selection; it must provide
    ``plan(positions, goals, horizon, deadline, window)`` returning one path
    (``horizon + 1`` cells) or ``None`` per agent.
    """
    free = grid.free_cells()
    if k_agents < 1 or k_agents > len(free):
        raise ValueError("k_agents must be between 1 and the number of free cells")
    if starts is None:
        positions = stream(cfg.seed, "starts").sample(free, k_agents)
    else:
        positions = [int(v) for v in starts]
        if len(positions) != k_agents or len(set(positions)) != k_agents:
            raise ValueError("need k_agents distinct start cells")
    if planner is None:
        planner = make_planner(solver, grid, low_level, apf, cfg.seed, **(planner_options or {}))
    if assigner is None:
        assigner = TaskAssigner(grid, cfg.seed)

    log = LifelongLog(executed=[list(positions)])
    goals: list[int | None] = [None] * k_agents
    t = 0
    walls = []
    failures = 0
    while t < cfg.step_limit:
        for i in range(k_agents):
            if goals[i] is None:
                goals[i] = assigner.next_goal(i, positions[i])
        log.goals.append(list(goals))
        began = time.perf_counter()
        plans = planner.plan(list(positions), list(goals), cfg.horizon, began + cfg.planning_deadline, window=cfg.window)
        wall = time.perf_counter() - began
        walls.append(wall)
        failed = [i for i, p in enumerate(plans) if p is None]
        moves, staying = apply_failure_policy(grid, plans, positions, cfg.window)
        demoted = [i for i in staying if plans[i] is not None]
        failures += len(staying)
        log.episodes.append(EpisodeRecord(t, failed, demoted, wall))
        if on_episode is not None:
            on_episode(t, staying)
        steps = min(cfg.window, cfg.step_limit - t)
        for s in range(1, steps + 1):
            nxt = [m[s] for m in moves]
            if not is_valid_transition(grid, positions, nxt):
                raise RuntimeError(f"invalid executed transition at t={t}")
            positions = nxt
            t += 1
            log.executed.append(list(positions))
            for i, v in enumerate(positions):
                if goals[i] is not None and v == goals[i]:
                    log.completions.append((i, t))
                    goals[i] = None
    metrics = Metrics(
        throughput=len(log.completions),
        avg_runtime_per_episode=sum(walls) / len(walls) if walls else 0.0,
        failure_count=failures,
        episodes=len(walls),
    )
    return metrics, log
