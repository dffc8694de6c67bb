"""Bundled 32x32 benchmark maps (see tools/make_maps.py)."""
from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..grid import GridMap, parse_map

BENCHMARK_MAPS = ("empty-32-32", "random-32-32-10", "random-32-32-20", "room-32-32-4")


def benchmark_map_text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.map").read_text()


@lru_cache(maxsize=None)
def load_benchmark(name: str) -> GridMap:
    """Load a bundled map by name, e.g. ``"room-32-32-4"``."""
    if name not in BENCHMARK_MAPS:
        raise KeyError(f"unknown benchmark map {name!r}; choose from {BENCHMARK_MAPS}")
    return parse_map(benchmark_map_text(name), name=name)


def resolve_map(name_or_path: str) -> GridMap:
    """Bundled map name or a path to a ``.map`` file."""
    if name_or_path in BENCHMARK_MAPS:
        return load_benchmark(name_or_path)
    p = Path(name_or_path)
    return parse_map(p.read_text(), name=p.stem)
