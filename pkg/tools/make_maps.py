"""Regenerate the bundled 32x32 benchmark map replicas.

The original MovingAI files are not redistributed here. These replicas keep
the size, obstacle density and structure of each map:

* empty-32-32      no obstacles (identical to the original)
* random-32-32-10  102 random obstacles, free space connected
* random-32-32-20  205 random obstacles, free space connected
* room-32-32-4     8x8 grid of 3x3 rooms, doors in 106 of the 112 inner walls

Run ``python tools/make_maps.py`` from the repository root.
"""
from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from apf_mapf.grid import GridMap, bfs_distance_table, serialize_map  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "apf_mapf" / "maps"
SIZE = 32


def connected(blocked: set) -> bool:
    g = GridMap(SIZE, SIZE, frozenset(blocked))
    free = g.free_cells()
    table = bfs_distance_table(g, free[0])
    return all(table.reachable(v) for v in free)


def random_map(n_obstacles: int, seed: int) -> set:
    rng = random.Random(seed)
    cells = [(r, c) for r in range(SIZE) for c in range(SIZE)]
    while True:
        blocked = set(rng.sample(cells, n_obstacles))
        if connected(blocked):
            return blocked


def room_map(seed: int, n_doors: int = 106) -> set:
    """8x8 lattice of 3x3 rooms; walls on rows/cols 3, 7, ..., 31.

    A random spanning tree of doors keeps the map connected, then further
    random doors are opened until ``n_doors`` of the 112 inner walls have one
    (576 room cells + 106 doors = 682 free cells).
    """
    rng = random.Random(seed)
    walls = [4 * i + 3 for i in range(8)]
    blocked = {(r, c) for r in range(SIZE) for c in walls} | {(r, c) for r in walls for c in range(SIZE)}
    n_rooms = 8
    parent = {(i, j): (i, j) for i in range(n_rooms) for j in range(n_rooms)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def open_door(a, b):
        (i1, j1), (i2, _) = a, b
        if i1 != i2:  # vertical neighbours share a horizontal wall row
            blocked.discard((4 * i1 + 3, 4 * j1 + rng.randrange(3)))
        else:
            blocked.discard((4 * i1 + rng.randrange(3), 4 * j1 + 3))

    edges = [((i, j), (i + 1, j)) for i in range(n_rooms - 1) for j in range(n_rooms)]
    edges += [((i, j), (i, j + 1)) for i in range(n_rooms) for j in range(n_rooms - 1)]
    rng.shuffle(edges)
    rest = []
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            rest.append((a, b))
            continue
        parent[ra] = rb
        open_door(a, b)
    for a, b in rest[: n_doors - (n_rooms * n_rooms - 1)]:
        open_door(a, b)
    assert connected(blocked)
    return blocked


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    maps = {
        "empty-32-32": set(),
        "random-32-32-10": random_map(102, seed=10),
        "random-32-32-20": random_map(205, seed=20),
        "room-32-32-4": room_map(seed=4),
    }
    for name, blocked in maps.items():
        g = GridMap(SIZE, SIZE, frozenset(blocked), name)
        (OUT / f"{name}.map").write_text(serialize_map(g))
        print(name, len(g.free_cells()), "free cells")


if __name__ == "__main__":
    main()
