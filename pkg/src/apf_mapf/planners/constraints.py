"""Hard and soft constraint tables derived from other agents' paths.

Times are absolute time-steps of the planning episode. An edge constraint
``(u, v, t)`` forbids traversing ``{u, v}`` in either direction while arriving
at time ``t``. A path keeps occupying its final cell after it ends.
"""
from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Sequence

INF = math.inf

Path = list[int]


class ConstraintTables:
    def __init__(self) -> None:
        self.hard_vertex: dict[int, Counter] = {}
        self.hard_edge: Counter = Counter()
        self.hard_terminal: dict[int, Counter] = {}
        self.soft_vertex: dict[int, Counter] = {}
        self.soft_edge: Counter = Counter()
        self.soft_terminal: dict[int, Counter] = {}
        self._times: Counter = Counter()

    @classmethod
    def from_paths(
        cls,
        hard: Iterable[Sequence[int]] = (),
        soft: Iterable[Sequence[int]] = (),
        vertex: Iterable[tuple[int, int]] = (),
        edge: Iterable[tuple[int, int, int]] = (),
    ) -> "ConstraintTables":
        tables = cls()
        for p in hard:
            tables.add_path(p, hard=True)
        for p in soft:
            tables.add_path(p, hard=False)
        for v, t in vertex:
            tables.add_vertex(v, t)
        for u, v, t in edge:
            tables.add_edge(u, v, t)
        return tables

    # -- mutation -------------------------------------------------------

    def add_vertex(self, v: int, t: int) -> None:
        self.hard_vertex.setdefault(v, Counter())[t] += 1
        self._times[t] += 1

    def add_edge(self, u: int, v: int, t: int) -> None:
        self.hard_edge[(u, v, t)] += 1
        self.hard_edge[(v, u, t)] += 1
        self._times[t] += 1

    def add_path(self, path: Sequence[int], hard: bool = True, terminal: bool = True) -> None:
        self._apply(path, hard, terminal, 1)

    def remove_path(self, path: Sequence[int], hard: bool = True, terminal: bool = True) -> None:
        self._apply(path, hard, terminal, -1)

    def _apply(self, path, hard, terminal, sign) -> None:
        vertex = self.hard_vertex if hard else self.soft_vertex
        edge = self.hard_edge if hard else self.soft_edge
        term = self.hard_terminal if hard else self.soft_terminal
        times = self._times
        prev = None
        for t, v in enumerate(path):
            c = vertex.get(v)
            if c is None:
                c = vertex[v] = Counter()
            c[t] += sign
            if c[t] == 0:
                del c[t]
                if not c:
                    del vertex[v]
            if prev is not None and prev != v:
                if hard:
                    _bump(edge, (prev, v, t), sign)
                    _bump(edge, (v, prev, t), sign)
                else:
                    _bump(edge, (prev, v, t), sign)
            _bump(times, t, sign)
            prev = v
        if terminal and path:
            last = len(path) - 1
            c = term.get(path[-1])
            if c is None:
                c = term[path[-1]] = Counter()
            _bump(c, last, sign)
            if not c:
                del term[path[-1]]

    # -- queries ---------------------------------------------------------

    @property
    def latest_hard_time(self) -> int:
        latest = -1
        for c in self.hard_vertex.values():
            latest = max(latest, max(c))
        for u, v, t in self.hard_edge:
            latest = max(latest, t)
        for c in self.hard_terminal.values():
            latest = max(latest, max(c))
        return latest

    @property
    def latest_time(self) -> int:
        """Latest time-step at which any constraint changes."""
        return max(self._times) if self._times else -1

    def vertex_blocked(self, v: int, t: int) -> bool:
        c = self.hard_vertex.get(v)
        if c is not None and c.get(t):
            return True
        c = self.hard_terminal.get(v)
        return c is not None and t >= min(c)

    def edge_blocked(self, u: int, v: int, t: int) -> bool:
        return self.hard_edge.get((u, v, t), 0) > 0

    def hard_terminal_from(self, v: int) -> float:
        c = self.hard_terminal.get(v)
        return min(c) if c else INF

    def last_hard_at(self, v: int) -> float:
        """Latest blocked time at ``v`` (``inf`` if blocked forever, -1 if never)."""
        if v in self.hard_terminal:
            return INF
        c = self.hard_vertex.get(v)
        return max(c) if c else -1

    def soft_at(self, v: int, t: int) -> bool:
        c = self.soft_vertex.get(v)
        if c is not None and c.get(t):
            return True
        c = self.soft_terminal.get(v)
        return c is not None and t >= min(c)

    def soft_explicit_after(self, v: int, t: int) -> int:
        """Time-steps ``> t`` at which a soft path explicitly visits ``v``."""
        c = self.soft_vertex.get(v)
        if not c:
            return 0
        return sum(1 for s in c if s > t)

    def soft_edge_hit(self, u: int, v: int, t: int) -> bool:
        """Moving ``u -> v`` arriving at ``t`` swaps with a soft path."""
        return self.soft_edge.get((v, u, t), 0) > 0

    def soft_events(self, v: int) -> tuple[set[int], float]:
        c = self.soft_vertex.get(v)
        term = self.soft_terminal.get(v)
        return (set(c) if c else set()), (min(term) if term else INF)

    def hard_events(self, v: int) -> tuple[set[int], float]:
        c = self.hard_vertex.get(v)
        return (set(c) if c else set()), self.hard_terminal_from(v)


def _bump(counter, key, sign) -> None:
    n = counter.get(key, 0) + sign
    if n:
        counter[key] = n
    else:
        counter.pop(key, None)


def path_violations(path: Sequence[int], tables: ConstraintTables) -> list[tuple]:
    """Hard constraints violated by ``path`` (terminal padding not applied)."""
    out = []
    for t, v in enumerate(path):
        if tables.vertex_blocked(v, t):
            out.append(("vertex", v, t))
        if t and path[t - 1] != v and tables.edge_blocked(path[t - 1], v, t):
            out.append(("edge", path[t - 1], v, t))
    return out


def soft_collisions(path: Sequence[int], tables: ConstraintTables) -> int:
    """Soft collisions of ``path`` (vertex and edge, each counted once).

    While the path is moving, soft paths' parked final cells count; once the
    path has ended only explicit visits to its final cell count.
    """
    n = 0
    for t, v in enumerate(path):
        if tables.soft_at(v, t):
            n += 1
        if t and path[t - 1] != v and tables.soft_edge_hit(path[t - 1], v, t):
            n += 1
    if path:
        n += tables.soft_explicit_after(path[-1], len(path) - 1)
    return n
