"""Regenerate the frozen oracle outputs in this directory.

The oracles here are deliberately independent of the package's search code:
they work on raw map text and raw paths with brute force. Run from the
repository root with ``python3 tests/oracles/generate.py``; the JSON files
are committed so the tests never depend on this script at run time.
"""
from __future__ import annotations

import json
import random
from collections import deque
from pathlib import Path

HERE = Path(__file__).resolve().parent
MAPS = Path(__file__).resolve().parents[2] / "src" / "apf_mapf" / "maps"


def read_map(name):
    lines = (MAPS / f"{name}.map").read_text().splitlines()
    rows = lines[lines.index("map") + 1 :]
    return [[ch == "." for ch in row] for row in rows]


def nbrs(free, r, c):
    h, w = len(free), len(free[0])
    for dr, dc in ((-1, 0), (0, -1), (0, 1), (1, 0)):
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and free[rr][cc]:
            yield rr, cc


def bfs(free, src):
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in nbrs(free, *u):
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def bfs_oracle():
    out = {}
    for name in ("empty-32-32", "random-32-32-10", "random-32-32-20", "room-32-32-4"):
        free = read_map(name)
        cells = [(r, c) for r, row in enumerate(free) for c, f in enumerate(row) if f]
        rng = random.Random(name)
        rows = []
        while len(rows) < 200:
            s, g = rng.sample(cells, 2)
            d = bfs(free, g).get(s)
            if d is not None:
                rows.append([list(s), list(g), d])
        out[name] = rows
    return out


# -- soft-collision brute force ---------------------------------------------

def at(path, t):
    return path[t] if t < len(path) else path[-1]


def soft_cost(path, soft):
    """Vertex presence + swaps while moving, explicit visits after arrival."""
    n = 0
    for t, v in enumerate(path):
        if any(at(p, t) == v for p in soft):
            n += 1
        if t and path[t - 1] != v:
            u = path[t - 1]
            if any(t < len(p) and p[t - 1] == v and p[t] == u for p in soft):
                n += 1
    end = len(path) - 1
    goal = path[-1]
    n += len({s for p in soft for s in range(end + 1, len(p)) if p[s] == goal})
    return n


def all_paths(free, start, goal, max_len):
    """Every path from start ending at goal with at most max_len moves."""
    out = []
    stack = [[start]]
    while stack:
        p = stack.pop()
        if p[-1] == goal:
            out.append(p)
        if len(p) - 1 < max_len:
            for v in [p[-1], *nbrs(free, *p[-1])]:
                stack.append(p + [v])
    return out


def sipps_oracle():
    rng = random.Random(2024)
    cases = []
    while len(cases) < 30:
        cells = [(r, c) for r in range(4) for c in range(4)]
        blocked = rng.sample(cells, rng.randint(0, 5))
        free = [[(r, c) not in blocked for c in range(4)] for r in range(4)]
        fc = [c for c in cells if c not in blocked]
        start, goal = rng.sample(fc, 2)
        if start not in bfs(free, goal):
            continue
        soft = []
        for _ in range(rng.randint(1, 2)):
            # bias towards the agent's route so collisions are common
            first = rng.choice([goal, *nbrs(free, *start), *fc])
            if first == start:
                first = goal
            p = [first]
            for _ in range(rng.randint(0, 6)):
                p.append(rng.choice([p[-1], *nbrs(free, *p[-1])]))
            soft.append(p)
        best = min(soft_cost(p, soft) for p in all_paths(free, start, goal, 8))
        if best == 0 and sum(c["min_collisions"] == 0 for c in cases) >= 10:
            continue  # keep most cases non-trivial
        cases.append({
            "blocked": [list(b) for b in blocked],
            "start": list(start),
            "goal": list(goal),
            "soft": [[list(v) for v in p] for p in soft],
            "min_collisions": best,
        })
    return cases


def walk_oracle(steps=100, window=5, dist=3):
    """Single agent, goals always ``dist`` away, new goal each episode."""
    t = 0
    done = 0
    while t < steps:
        remaining = min(window, steps - t)
        if dist <= remaining:
            done += 1
        t += remaining
    return done


def main():
    (HERE / "bfs_distances.json").write_text(json.dumps(bfs_oracle()))
    (HERE / "sipps_bruteforce.json").write_text(json.dumps(sipps_oracle(), indent=1))
    (HERE / "single_agent_walk.json").write_text(json.dumps({"steps": 100, "window": 5, "dist": 3,
                                                             "throughput": walk_oracle()}))


if __name__ == "__main__":
    main()
