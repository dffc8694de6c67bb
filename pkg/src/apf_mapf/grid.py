"""Grid maps, MovingAI file formats and BFS distance tables.

Cells are addressed internally by an integer id ``row * width + col``;
``GridMap.index`` / ``GridMap.coord`` convert between the two forms.
"""
from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field

Vertex = tuple[int, int]

FREE_CHARS = frozenset(".G")
BLOCKED_CHARS = frozenset("@TO")

UNREACHABLE = -1


class MapFormatError(ValueError):
    """Raised for malformed ``.map`` / ``.scen`` input."""


@dataclass(frozen=True, eq=False)
class GridMap:
    """Static 4-connected grid. ``blocked`` holds (row, col) pairs."""

    width: int
    height: int
    blocked: frozenset[Vertex] = frozenset()
    name: str = ""
    _free: tuple[bool, ...] = field(init=False, repr=False)
    _nbrs: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    _n_free: int = field(init=False, repr=False)
    _dist_cache: dict = field(init=False, repr=False)
    _lock: threading.Lock = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")
        blocked = frozenset(self.blocked)
        for r, c in blocked:
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise ValueError(f"blocked cell {(r, c)} out of bounds")
        object.__setattr__(self, "blocked", blocked)
        w, h = self.width, self.height
        free = [True] * (w * h)
        for r, c in blocked:
            free[r * w + c] = False
        nbrs = []
        for idx in range(w * h):
            if not free[idx]:
                nbrs.append(())
                continue
            r, c = divmod(idx, w)
            out = []
            # fixed order: up, left, right, down
            if r > 0 and free[idx - w]:
                out.append(idx - w)
            if c > 0 and free[idx - 1]:
                out.append(idx - 1)
            if c < w - 1 and free[idx + 1]:
                out.append(idx + 1)
            if r < h - 1 and free[idx + w]:
                out.append(idx + w)
            nbrs.append(tuple(out))
        object.__setattr__(self, "_free", tuple(free))
        object.__setattr__(self, "_n_free", sum(free))
        object.__setattr__(self, "_nbrs", tuple(nbrs))
        object.__setattr__(self, "_dist_cache", {})
        object.__setattr__(self, "_lock", threading.Lock())

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def num_free(self) -> int:
        return self._n_free

    def index(self, row: int, col: int) -> int:
        return row * self.width + col

    def coord(self, idx: int) -> Vertex:
        return divmod(idx, self.width)

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def is_free(self, idx: int) -> bool:
        return 0 <= idx < self.size and self._free[idx]

    def is_free_cell(self, row: int, col: int) -> bool:
        return self.in_bounds(row, col) and self._free[row * self.width + col]

    def neighbors(self, idx: int) -> tuple[int, ...]:
        return self._nbrs[idx]

    def free_cells(self) -> list[int]:
        return [i for i, f in enumerate(self._free) if f]

    def adjacent(self, a: int, b: int) -> bool:
        return b in self._nbrs[a]

    def distance_table(self, goal: int) -> "DistanceTable":
        """Cached BFS table towards ``goal``; safe under concurrent use."""
        table = self._dist_cache.get(goal)
        if table is None:
            table = bfs_distance_table(self, goal)
            with self._lock:
                table = self._dist_cache.setdefault(goal, table)
        return table


@dataclass(frozen=True)
class DistanceTable:
    goal: int
    dist: tuple[int, ...]

    def __getitem__(self, idx: int) -> int:
        return self.dist[idx]

    def get(self, idx: int) -> int:
        return self.dist[idx]

    def reachable(self, idx: int) -> bool:
        return self.dist[idx] != UNREACHABLE


@dataclass(frozen=True)
class ScenEntry:
    start: Vertex
    goal: Vertex
    bucket: int
    recorded_optimal: str
    map_name: str = ""

    @property
    def optimal_length(self) -> float:
        return float(self.recorded_optimal)


def manhattan(a: Vertex, b: Vertex) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def bfs_distance_table(grid: GridMap, goal: int) -> DistanceTable:
    if not grid.is_free(goal):
        raise ValueError(f"goal {grid.coord(goal) if 0 <= goal < grid.size else goal} is not a free cell")
    dist = [UNREACHABLE] * grid.size
    dist[goal] = 0
    queue = deque([goal])
    nbrs = grid._nbrs
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in nbrs[u]:
            if dist[v] == UNREACHABLE:
                dist[v] = du
                queue.append(v)
    return DistanceTable(goal, tuple(dist))


def parse_map(text: str, name: str = "") -> GridMap:
    lines = text.splitlines()
    header: dict[str, str] = {}
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        if line == "map":
            break
        parts = line.split()
        if len(parts) != 2:
            raise MapFormatError(f"malformed header line: {line!r}")
        header[parts[0]] = parts[1]
    else:
        raise MapFormatError("missing 'map' line")
    if header.get("type") is None:
        raise MapFormatError("missing 'type' header")
    try:
        height = int(header["height"])
        width = int(header["width"])
    except (KeyError, ValueError) as exc:
        raise MapFormatError("header must define integer height and width") from exc

    rows = [ln.rstrip("\r\n") for ln in lines[i:]]
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) != height:
        raise MapFormatError(f"expected {height} rows, found {len(rows)}")
    blocked = set()
    for r, row in enumerate(rows):
        if len(row) != width:
            raise MapFormatError(f"row {r} has length {len(row)}, expected {width}")
        for c, ch in enumerate(row):
            if ch in BLOCKED_CHARS:
                blocked.add((r, c))
            elif ch not in FREE_CHARS:
                raise MapFormatError(f"unknown cell character {ch!r} at {(r, c)}")
    return GridMap(width, height, frozenset(blocked), name)


def serialize_map(grid: GridMap) -> str:
    out = ["type octile", f"height {grid.height}", f"width {grid.width}", "map"]
    for r in range(grid.height):
        out.append("".join("@" if (r, c) in grid.blocked else "." for c in range(grid.width)))
    return "\n".join(out) + "\n"


def parse_scen(text: str, grid: GridMap) -> list[ScenEntry]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].strip().startswith("version"):
        raise MapFormatError("scenario must start with a 'version' line")
    entries = []
    for n, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 9:
            raise MapFormatError(f"line {n}: expected 9 tab-separated fields")
        try:
            bucket = int(parts[0])
            width, height = int(parts[2]), int(parts[3])
            sc, sr, gc, gr = (int(p) for p in parts[4:8])
        except ValueError as exc:
            raise MapFormatError(f"line {n}: non-integer field") from exc
        if (width, height) != (grid.width, grid.height):
            raise MapFormatError(f"line {n}: size {width}x{height} does not match map")
        for what, (r, c) in (("start", (sr, sc)), ("goal", (gr, gc))):
            if not grid.is_free_cell(r, c):
                raise MapFormatError(f"line {n}: {what} {(r, c)} is blocked or out of bounds")
        entries.append(ScenEntry((sr, sc), (gr, gc), bucket, parts[8].strip(), parts[1]))
    return entries


def load_map(path) -> GridMap:
    from pathlib import Path

    p = Path(path)
    return parse_map(p.read_text(), name=p.stem)
