"""Repulsive potential fields around agents and their planned paths.

All distances inside the kernel are Manhattan distances; the BFS tables in
:mod:`apf_mapf.grid` are only used as the goal-attraction heuristic.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from functools import lru_cache

from .grid import GridMap

INF = math.inf


@dataclass(frozen=True)
class APFParams:
    w: float = 1.0
    gamma: float = 2.0
    d_max: int = 4
    t_max: int = 2

    def __post_init__(self) -> None:
        if self.w < 0:
            raise ValueError("w must be non-negative")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.d_max < 0 or self.t_max < 0:
            raise ValueError("d_max and t_max must be non-negative")

    @property
    def inactive(self) -> bool:
        """True when every field built from these parameters is identically zero."""
        return self.w == 0 or self.d_max == 0

    def with_(self, **changes) -> "APFParams":
        return replace(self, **changes)


# Best-found settings per low-level search.
ASTAR_PRESET = APFParams(w=1.0, gamma=2.0, d_max=4, t_max=0)
SIPPS_PRESET = APFParams(w=0.1, gamma=3.0, d_max=3, t_max=0)
PIBT_PRESET = APFParams(w=0.1, gamma=3.0, d_max=2, t_max=2)


def point_repulsion(d: int, params: APFParams) -> float:
    if d >= params.d_max:
        return 0.0
    return params.w * params.gamma ** (-d)


@lru_cache(maxsize=64)
def kernel_offsets(params: APFParams) -> tuple[tuple[int, int, float], ...]:
    """(drow, dcol, value) offsets with a non-zero kernel value."""
    out = []
    r = params.d_max - 1
    for dr in range(-r, r + 1):
        span = r - abs(dr)
        for dc in range(-span, span + 1):
            val = point_repulsion(abs(dr) + abs(dc), params)
            if val > 0:
                out.append((dr, dc, val))
    return tuple(out)


def _kernel(grid: GridMap, params: APFParams):
    return kernel_offsets(params)


def _spread(grid: GridMap, src: int, kernel) -> Iterable[tuple[int, float]]:
    w, h = grid.width, grid.height
    r0, c0 = divmod(src, w)
    for dr, dc, val in kernel:
        r, c = r0 + dr, c0 + dc
        if 0 <= r < h and 0 <= c < w:
            yield r * w + c, val


@dataclass
class APFField:
    """Sparse repulsion of one agent's path, keyed by (cell, time).

    ``tail`` (when set) is the field around the path's final cell and applies
    to every time-step ``>= tail_from``.
    """

    owner: int = -1
    entries: dict[tuple[int, int], float] = field(default_factory=dict)
    tail: dict[int, float] = field(default_factory=dict)
    tail_from: float = INF

    def value(self, v: int, t: int) -> float:
        val = self.entries.get((v, t), 0.0)
        if t >= self.tail_from:
            val += self.tail.get(v, 0.0)
        return val

    def __bool__(self) -> bool:
        return bool(self.entries) or bool(self.tail)


@dataclass
class SpatialAPFField:
    owner: int = -1
    entries: dict[int, float] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.entries)


def build_path_apf(
    grid: GridMap,
    path: Sequence[int],
    params: APFParams,
    t_from: int = 0,
    t_to: int | None = None,
    owner: int = -1,
) -> APFField:
    """Field of ``path`` over ``[t_from, t_to]``.

    Positions past the end of the path are the final cell. With ``t_to=None``
    the field covers the path and keeps repelling from its final cell forever.
    """
    if not path:
        raise ValueError("path must be non-empty")
    out = APFField(owner=owner)
    if params.inactive:
        return out
    kernel = _kernel(grid, params)
    open_ended = t_to is None
    last = len(path) - 1
    if open_ended:
        t_to = last
    if t_from > t_to:
        raise ValueError("t_from must not exceed t_to")
    entries = out.entries
    for t in range(t_from, t_to + 1):
        src = path[t] if t <= last else path[last]
        for v, val in _spread(grid, src, kernel):
            entries[(v, t)] = val
    if open_ended:
        out.tail = dict(_spread(grid, path[last], kernel))
        out.tail_from = t_to + 1
    return out


def sum_fields_at(fields: Iterable[APFField], v: int, t: int) -> float:
    return sum(f.value(v, t) for f in fields)


def max_over_interval(fields: Sequence[APFField], v: int, t_start: int, t_end: float) -> float:
    """Max of the summed field at ``v`` over ``[t_start, t_end)``."""
    if not t_start < t_end:
        raise ValueError("empty interval")
    candidates = {t_start}
    for f in fields:
        for (u, t) in f.entries:
            if u == v and t_start <= t < t_end:
                candidates.add(t)
        if v in f.tail and t_start < f.tail_from < t_end:
            candidates.add(int(f.tail_from))
    return max(sum_fields_at(fields, v, t) for t in candidates)


def build_pibt_apf(
    grid: GridMap,
    lookahead: Sequence[int],
    params: APFParams,
    owner: int = -1,
) -> SpatialAPFField:
    """Time-collapsed field around ``t_max + 1`` look-ahead positions.

    A short look-ahead is padded with its last cell.
    """
    out = SpatialAPFField(owner=owner)
    if params.inactive or not lookahead:
        return out
    kernel = _kernel(grid, params)
    entries = out.entries
    last = len(lookahead) - 1
    for j in range(params.t_max + 1):
        src = lookahead[min(j, last)]
        for v, val in _spread(grid, src, kernel):
            entries[v] = entries.get(v, 0.0) + val
    return out


class FieldPool:
    """Running sum of many :class:`APFField` objects.

    Equivalent to :func:`sum_fields_at` over the added fields, but answers
    queries in O(1). Fields can be removed again (LNS2 neighbourhoods);
    a key is dropped once no field contributes to it, so removal leaves no
    floating-point residue behind.
    """

    def __init__(self, fields: Iterable[APFField] = ()) -> None:
        self._by_vertex: dict[int, dict[int, list]] = {}
        self._tails: dict[int, dict[float, list]] = {}
        for f in fields:
            self.add(f)

    def __bool__(self) -> bool:
        return bool(self._by_vertex) or bool(self._tails)

    def add(self, f: APFField) -> None:
        self._update(f, 1)

    def remove(self, f: APFField) -> None:
        self._update(f, -1)

    def _update(self, f: APFField, sign: int) -> None:
        by_v = self._by_vertex
        for (v, t), val in f.entries.items():
            slot = by_v.setdefault(v, {})
            cell = slot.get(t)
            if cell is None:
                slot[t] = [val, 1]
                continue
            cell[1] += sign
            if cell[1] == 0:
                del slot[t]
                if not slot:
                    del by_v[v]
            else:
                cell[0] += sign * val
        for v, val in f.tail.items():
            slot = self._tails.setdefault(v, {})
            cell = slot.get(f.tail_from)
            if cell is None:
                slot[f.tail_from] = [val, 1]
                continue
            cell[1] += sign
            if cell[1] == 0:
                del slot[f.tail_from]
                if not slot:
                    del self._tails[v]
            else:
                cell[0] += sign * val

    def at(self, v: int, t: int) -> float:
        val = 0.0
        slot = self._by_vertex.get(v)
        if slot is not None:
            cell = slot.get(t)
            if cell is not None:
                val = cell[0]
        tails = self._tails.get(v)
        if tails is not None:
            for start, cell in tails.items():
                if t >= start:
                    val += cell[0]
        return val

    def max_over(self, v: int, t_start: int, t_end: float) -> float:
        slot = self._by_vertex.get(v)
        tails = self._tails.get(v)
        if slot is None and tails is None:
            return 0.0
        candidates = [t_start]
        if slot is not None:
            candidates.extend(t for t in slot if t_start < t < t_end)
        if tails is not None:
            candidates.extend(int(s) for s in tails if t_start < s < t_end)
        return max(self.at(v, t) for t in candidates)
