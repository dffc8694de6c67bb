from __future__ import annotations

import random
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

from ..apf import APFParams, FieldPool, build_path_apf
from ..grid import GridMap, Vertex
from ..planners import ConstraintTables, plan_sipps, plan_temporal_astar

LowLevel = Literal["astar", "sipps"]
LOW_LEVELS = ("astar", "sipps")


def stream(seed: int, name: str) -> random.Random:
    """Independent, reproducible RNG stream for one solver component."""
    return random.Random(f"{seed}:{name}")


@dataclass
class MapfInstance:
    grid: GridMap
    starts: list[int]
    goals: list[int]
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.starts or len(self.starts) != len(self.goals):
            raise ValueError("need one start and one goal per agent, at least one agent")
        if len(set(self.starts)) != len(self.starts):
            raise ValueError("start cells must be pairwise distinct")
        for v in (*self.starts, *self.goals):
            if not self.grid.is_free(v):
                raise ValueError(f"cell {self.grid.coord(v)} is not free")

    @classmethod
    def from_coords(cls, grid: GridMap, starts: Sequence[Vertex], goals: Sequence[Vertex], seed: int = 0):
        return cls(grid, [grid.index(*s) for s in starts], [grid.index(*g) for g in goals], seed)

    @property
    def num_agents(self) -> int:
        return len(self.starts)


@dataclass
class Solution:
    paths: list[list[int]]
    solved: bool
    elapsed: float = 0.0
    goals: list[int] | None = None
    log: dict = field(default_factory=dict)

    @property
    def soc(self) -> int:
        if self.goals is None:
            return sum(len(p) - 1 for p in self.paths)
        return sum(path_cost(p, g) for p, g in zip(self.paths, self.goals))


def path_cost(path: Sequence[int], goal: int) -> int:
    """Time-step after which the agent never leaves ``goal`` again."""
    t = len(path) - 1
    while t > 0 and path[t] == goal and path[t - 1] == goal:
        t -= 1
    return t if path[t] == goal else len(path) - 1


def configs_to_paths(configs: Sequence[Sequence[int]]) -> list[list[int]]:
    if not configs:
        return []
    return [[c[i] for c in configs] for i in range(len(configs[0]))]


@dataclass(frozen=True)
class Conflict:
    kind: Literal["vertex", "swap"]
    agents: tuple[int, int]
    time: int
    where: tuple[int, ...]


def validate(paths: Sequence[Sequence[int]]) -> list[Conflict]:
    """All vertex and swap conflicts; finished paths stay on their last cell.

    A swap is reported at the time-step the two agents start traversing the
    edge.
    """
    out: list[Conflict] = []
    live = [i for i, p in enumerate(paths) if p]
    if not live:
        return out
    horizon = max(len(paths[i]) for i in live)

    def at(i, t):
        p = paths[i]
        return p[t] if t < len(p) else p[-1]

    for t in range(horizon):
        occupied: dict[int, list[int]] = {}
        for i in live:
            occupied.setdefault(at(i, t), []).append(i)
        for v, agents in occupied.items():
            if len(agents) > 1:
                for a in range(len(agents)):
                    for b in range(a + 1, len(agents)):
                        out.append(Conflict("vertex", (agents[a], agents[b]), t, (v,)))
        if t + 1 >= horizon:
            continue
        moves = {}
        for i in live:
            u, v = at(i, t), at(i, t + 1)
            if u != v:
                moves[(u, v)] = i
        for (u, v), i in moves.items():
            j = moves.get((v, u))
            if j is not None and i < j:
                out.append(Conflict("swap", (i, j), t, (u, v)))
    return out


def conflict_graph(paths: Sequence[Sequence[int] | None]) -> dict[int, set[int]]:
    """Agent -> set of agents it collides with (``None`` paths ignored)."""
    graph: dict[int, set[int]] = {}
    live = [i for i, p in enumerate(paths) if p]
    if not live:
        return graph
    horizon = max(len(paths[i]) for i in live)
    prev: dict[int, int] = {}
    for t in range(horizon):
        occupied: dict[int, int] = {}
        cur: dict[int, int] = {}
        for i in live:
            p = paths[i]
            v = p[t] if t < len(p) else p[-1]
            cur[i] = v
            j = occupied.get(v)
            if j is None:
                occupied[v] = i
            else:
                _link(graph, i, j)
                for k in list(graph.get(j, ())):
                    if cur.get(k) == v and k != i:
                        _link(graph, i, k)
        if t:
            moves = {}
            for i in live:
                u, v = prev[i], cur[i]
                if u != v:
                    moves[(u, v)] = i
            for (u, v), i in moves.items():
                j = moves.get((v, u))
                if j is not None:
                    _link(graph, i, j)
        prev = cur
    return graph


def _link(graph, i, j) -> None:
    graph.setdefault(i, set()).add(j)
    graph.setdefault(j, set()).add(i)


def count_colliding_pairs(graph: dict[int, set[int]]) -> int:
    return sum(len(s) for s in graph.values()) // 2


def is_valid_transition(grid: GridMap, a: Sequence[int], b: Sequence[int]) -> bool:
    """One-step move from configuration ``a`` to ``b`` is legal and conflict-free."""
    if len(set(b)) != len(b):
        return False
    for u, v in zip(a, b):
        if u != v and not grid.adjacent(u, v):
            return False
    moved = {(u, v) for u, v in zip(a, b) if u != v}
    return not any((v, u) in moved for (u, v) in moved)


def path_fields(grid: GridMap, path: Sequence[int], params: APFParams | None, horizon: int | None, owner: int = -1):
    if params is None or params.inactive:
        return None
    return build_path_apf(grid, path, params, 0, horizon, owner=owner)


def low_level_plan(
    kind: LowLevel,
    grid: GridMap,
    start: int,
    goal: int,
    tables: ConstraintTables,
    pool: FieldPool | None,
    horizon: int | None,
    deadline: float | None,
    rng: random.Random,
) -> list[int] | None:
    if kind == "astar":
        res = plan_temporal_astar(grid, start, goal, tables, pool, horizon=horizon, deadline=deadline, rng=rng)
    elif kind == "sipps":
        res = plan_sipps(grid, start, goal, tables, pool, horizon=horizon, deadline=deadline, rng=rng)
    else:
        raise ValueError(f"unknown low-level planner {kind!r}")
    return None if res is None else res.path


class CollisionIndex:
    """Incremental colliding-pair bookkeeping for paths of equal length.

    Agrees with :func:`conflict_graph` whenever all indexed paths have the
    same length (windowed planning).
    """

    def __init__(self) -> None:
        self._at: dict[tuple[int, int], set[int]] = {}
        self._moves: dict[tuple[int, int, int], set[int]] = {}
        self._pairs: dict[int, dict[int, int]] = {}

    def _bump(self, i: int, j: int, sign: int) -> None:
        for a, b in ((i, j), (j, i)):
            c = self._pairs.setdefault(a, {})
            n = c.get(b, 0) + sign
            if n:
                c[b] = n
            else:
                del c[b]
                if not c:
                    del self._pairs[a]

    def add(self, i: int, path: Sequence[int]) -> None:
        prev = None
        for t, v in enumerate(path):
            occ = self._at.setdefault((v, t), set())
            for j in occ:
                self._bump(i, j, 1)
            occ.add(i)
            if prev is not None and prev != v:
                for j in self._moves.get((v, prev, t), ()):
                    self._bump(i, j, 1)
                self._moves.setdefault((prev, v, t), set()).add(i)
            prev = v

    def remove(self, i: int, path: Sequence[int]) -> None:
        prev = None
        for t, v in enumerate(path):
            occ = self._at[(v, t)]
            occ.discard(i)
            for j in occ:
                self._bump(i, j, -1)
            if not occ:
                del self._at[(v, t)]
            if prev is not None and prev != v:
                mv = self._moves[(prev, v, t)]
                mv.discard(i)
                if not mv:
                    del self._moves[(prev, v, t)]
                for j in self._moves.get((v, prev, t), ()):
                    self._bump(i, j, -1)
            prev = v

    def graph(self) -> dict[int, set[int]]:
        return {i: set(c) for i, c in self._pairs.items()}

    def count(self) -> int:
        return sum(len(c) for c in self._pairs.values()) // 2
