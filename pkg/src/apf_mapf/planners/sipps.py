"""Safe-interval path planning with soft constraints (SIPPS), with APF variant.

Safe intervals are cut at hard-blocked time-steps. Time-steps with soft
occupancy become unit intervals, so a node's soft-collision count ``c`` is
exact for the path it represents: one collision per soft time-step entered,
plus one per soft edge (swap) traversal. Past the latest constraint time the
world is static, and the remaining open-ended interval may be soft as well;
waiting inside it is charged per step.
"""
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
_DEADLINE_EVERY = 128

Interval = tuple[int, float, bool]  # (lo, hi, soft): time-steps lo..hi-1


def build_safe_intervals(tables: ConstraintTables, v: int, t_cap: int | None = None) -> list[Interval]:
    """Ordered safe intervals at ``v``; list position is the interval id."""
    if t_cap is None:
        t_cap = tables.latest_time + 1
    hard_times, hard_from = tables.hard_events(v)
    soft_times, soft_from = tables.soft_events(v)
    if not hard_times and not soft_times and hard_from == INF and soft_from == INF:
        return [(0, INF, False)]
    out: list[Interval] = []
    run_start = None
    for t in range(t_cap):
        if t in hard_times or t >= hard_from:
            if run_start is not None:
                out.append((run_start, t, False))
                run_start = None
        elif t in soft_times or t >= soft_from:
            if run_start is not None:
                out.append((run_start, t, False))
                run_start = None
            out.append((t, t + 1, True))
        elif run_start is None:
            run_start = t
    if hard_from < INF:
        if run_start is not None:
            out.append((run_start, t_cap, False))
    elif soft_from < INF:
        if run_start is not None:
            out.append((run_start, t_cap, False))
        out.append((t_cap, INF, True))
    else:
        out.append((t_cap if run_start is None else run_start, INF, False))
    return out


class SippsNode:
    __slots__ = ("v", "idx", "lo", "hi", "soft", "c", "g", "is_goal", "parent", "c_apf", "g_apf", "dead", "done")

    def __init__(self, v, idx, lo, hi, soft, c, g, is_goal, parent, c_apf, g_apf):
        self.v = v
        self.g = g
        self.idx = idx
        self.lo = lo
        self.hi = hi
        self.soft = soft
        self.c = c
        self.is_goal = is_goal
        self.parent = parent
        self.c_apf = c_apf
        self.g_apf = g_apf
        self.dead = False
        self.done = False


@dataclass
class SippsResult:
    path: list[int]
    collisions: int
    c_apf: float
    g_apf: float
    expanded: int


def plan_sipps(
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
) -> SippsResult | None:
    """Path violating no hard constraint with the fewest soft collisions.

    The open list is ordered by ``(c, g + h)``; with non-empty ``fields`` by
    ``(c_apf, g_apf + h)`` where every node adds the maximum summed field over
    its interval to both terms. Duplicate detection is keyed on
    ``(cell, interval id, is_goal)`` and uses only ``(arrival, c)``.
    """
    if tables is None:
        tables = ConstraintTables()
    if h is None:
        h = grid.distance_table(goal)
    hd = h.dist
    if not grid.is_free(start):
        return None
    if horizon is None and hd[start] == UNREACHABLE:
        return None

    t_cap = tables.latest_time + 1
    pool = fields if fields else None
    rand = rng.random if rng is not None else None
    nbrs = grid._nbrs
    edge_blocked = tables.edge_blocked
    soft_edge_hit = tables.soft_edge_hit

    interval_cache: dict[int, list[Interval]] = {}

    def intervals(v: int) -> list[Interval]:
        ivs = interval_cache.get(v)
        if ivs is None:
            ivs = interval_cache[v] = build_safe_intervals(tables, v, t_cap)
        return ivs

    if horizon is None:
        goal_after = tables.last_hard_at(goal)
        if goal_after == INF:
            return None
    else:
        goal_after = INF

    seen: dict[tuple, list[SippsNode]] = {}
    heap: list = []
    counter = 0

    def push(node: SippsNode, hv: int) -> None:
        nonlocal counter
        counter += 1
        if pool is None:
            key = (node.c, node.g + hv)
        else:
            key = (node.c_apf, node.g_apf + hv)
        heapq.heappush(heap, (*key, hv, rand() if rand else 0.0, counter, node))

    def admit(v, idx, lo, hi, soft, c, is_goal, parent, g_time=None) -> SippsNode | None:
        """Dominance filter, then create the node. ``g_time`` overrides g for frontier copies."""
        k = (v, idx, is_goal)
        bucket = seen.get(k)
        if bucket is not None:
            for other in bucket:
                if not other.dead and other.lo <= lo and other.c <= c:
                    return None
            for other in bucket:
                if not other.done and lo <= other.lo and c <= other.c:
                    other.dead = True
        else:
            bucket = seen[k] = []
        g = lo if g_time is None else g_time
        if pool is not None:
            if is_goal:
                # copy of ``parent``: same interval, its APF cost is already counted
                cost = parent.g_apf - parent.g
                c_apf = parent.c_apf + (c - parent.c)
            else:
                cost = pool.max_over(v, lo, hi)
                base = parent.c_apf - parent.c if parent is not None else 0.0
                c_apf = base + c + cost
            g_apf = g + cost
        else:
            c_apf, g_apf = float(c), float(g)
        node = SippsNode(v, idx, lo, hi, soft, c, g, is_goal, parent, c_apf, g_apf)
        bucket.append(node)
        return node

    root_ivs = intervals(start)
    if root_ivs[0][0] != 0:
        return None
    lo0, hi0, soft0 = root_ivs[0]
    root = admit(start, 0, 0, hi0, soft0, int(soft0), False, None)
    push(root, hd[start] if hd[start] >= 0 else 0)
    expanded = 0

    while heap:
        *_, node = heapq.heappop(heap)
        if node.dead or node.done:
            continue
        node.done = True
        expanded += 1
        if deadline is not None and expanded % _DEADLINE_EVERY == 0 and time.perf_counter() > deadline:
            return None
        if node.is_goal:
            return _result(node, horizon, expanded)
        v, lo, hi = node.v, node.lo, node.hi
        hv = hd[v] if hd[v] >= 0 else 0

        if horizon is None:
            if v == goal and lo > goal_after:
                future = tables.soft_explicit_after(goal, lo)
                if future == 0:
                    return _result(node, horizon, expanded)
                g_node = admit(v, node.idx, lo, hi, node.soft, node.c + future, True, node)
                if g_node is not None:
                    push(g_node, hv)
        elif lo <= horizon < hi:
            extra = horizon - lo if node.soft else 0
            t_node = admit(v, node.idx, lo, hi, node.soft, node.c + extra, True, node, g_time=horizon)
            if t_node is not None:
                push(t_node, hv)

        ivs = intervals(v)
        # wait into the adjacent interval at the same cell
        if node.idx + 1 < len(ivs) and ivs[node.idx + 1][0] == hi and (horizon is None or hi <= horizon):
            nlo, nhi, nsoft = ivs[node.idx + 1]
            extra = hi - 1 - lo if node.soft else 0
            child = admit(v, node.idx + 1, nlo, nhi, nsoft, node.c + extra + nsoft, False, node)
            if child is not None:
                push(child, hv)

        for u in nbrs[v]:
            hu = hd[u]
            if hu < 0:
                if horizon is None:
                    continue
                hu = 0
            for j, (ulo, uhi, usoft) in enumerate(intervals(u)):
                if ulo > hi:
                    break
                a_min = max(lo + 1, ulo)
                a_max = min(hi, uhi - 1)
                if horizon is not None:
                    a_max = min(a_max, horizon)
                if a_min > a_max:
                    continue
                a = a_min
                while a <= a_max and edge_blocked(v, u, a):
                    a += 1
                if a > a_max:
                    continue
                options = [a]
                if soft_edge_hit(v, u, a):
                    b = a + 1
                    while b <= a_max and (edge_blocked(v, u, b) or soft_edge_hit(v, u, b)):
                        b += 1
                    if b <= a_max:
                        options.append(b)
                for arr in options:
                    extra = arr - 1 - lo if node.soft else 0
                    hit = 1 if soft_edge_hit(v, u, arr) else 0
                    child = admit(u, j, arr, uhi, usoft, node.c + extra + usoft + hit, False, node)
                    if child is not None:
                        push(child, hu)
    return None


def _result(node: SippsNode, horizon: int | None, expanded: int) -> SippsResult:
    chain = []
    n = node
    while n is not None:
        chain.append(n)
        n = n.parent
    chain.reverse()
    if chain[-1].is_goal and len(chain) > 1:
        chain.pop()
    path: list[int] = []
    for prev, nxt in zip(chain, chain[1:]):
        path.extend([prev.v] * (nxt.lo - prev.lo))
    path.append(chain[-1].v)
    if horizon is not None:
        path.extend([path[-1]] * (horizon + 1 - len(path)))
    return SippsResult(path, node.c, node.c_apf, node.g_apf, expanded)
