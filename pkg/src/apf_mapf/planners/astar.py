"""Temporal A* over (cell, time) states, optionally with APF edge costs."""
from __future__ import annotations

import heapq
import math
import random
import time
from dataclasses import dataclass

from ..apf import FieldPool
from ..grid import UNREACHABLE, DistanceTable, GridMap
from .constraints import ConstraintTables

INF = math.inf
_DEADLINE_EVERY = 256


@dataclass
class SearchResult:
    path: list[int]
    cost: float
    expanded: int


def plan_temporal_astar(
    grid: GridMap,
    start: int,
    goal: int,
    tables: ConstraintTables | None = None,
    fields: FieldPool | None = None,
    h: DistanceTable | None = None,
    *,
    horizon: int | None = None,
    deadline: float | None = None,
    rng: random.Random | None = None,
) -> SearchResult | None:
    """Shortest path under hard constraints; ``None`` on failure.

    Each move or wait into ``(v, t)`` costs ``1 + fields.at(v, t)``; APF costs
    only enter the g-value, never the heuristic. Duplicates are keyed on the
    physical ``(v, t)``, so the reachable search space does not depend on
    the fields.

    With ``horizon`` set the search returns a path of exactly ``horizon``
    steps, chosen by smallest ``g + h`` at the frontier; the goal need not be
    reached.
    """
    if tables is None:
        tables = ConstraintTables()
    if h is None:
        h = grid.distance_table(goal)
    hd = h.dist
    if not grid.is_free(start) or tables.vertex_blocked(start, 0):
        return None
    if horizon is None:
        if hd[start] == UNREACHABLE:
            return None
        goal_after = tables.last_hard_at(goal)
        if goal_after == INF:
            return None
        t_limit = max(tables.latest_hard_time, 0) + grid.num_free + 1
    else:
        goal_after = INF
        t_limit = horizon

    pool = fields if fields else None
    rand = rng.random if rng is not None else None
    nbrs = grid._nbrs
    vertex_blocked = tables.vertex_blocked
    edge_blocked = tables.edge_blocked

    root = (start, 0)
    best = {root: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()
    h0 = hd[start] if hd[start] >= 0 else 0
    heap = [(float(h0), h0, rand() if rand else 0.0, 0.0, start, 0)]
    expanded = 0

    while heap:
        f, hv, _, g, v, t = heapq.heappop(heap)
        key = (v, t)
        if key in closed:
            continue
        closed.add(key)
        expanded += 1
        if deadline is not None and expanded % _DEADLINE_EVERY == 0 and time.perf_counter() > deadline:
            return None
        if horizon is None:
            if v == goal and t > goal_after:
                return SearchResult(_unwind(parent, key), g, expanded)
        elif t == horizon:
            return SearchResult(_unwind(parent, key), g, expanded)
        if t >= t_limit:
            continue
        nt = t + 1
        for u in (v, *nbrs[v]):
            hu = hd[u]
            if hu < 0:
                continue
            if vertex_blocked(u, nt):
                continue
            if u != v and edge_blocked(v, u, nt):
                continue
            nk = (u, nt)
            if nk in closed:
                continue
            ng = g + 1.0
            if pool is not None:
                ng += pool.at(u, nt)
            old = best.get(nk)
            if old is not None and old <= ng:
                continue
            best[nk] = ng
            parent[nk] = key
            heapq.heappush(heap, (ng + hu, hu, rand() if rand else 0.0, ng, u, nt))
    return None


def _unwind(parent, key) -> list[int]:
    out = [key[0]]
    while key in parent:
        key = parent[key]
        out.append(key[0])
    out.reverse()
    return out
