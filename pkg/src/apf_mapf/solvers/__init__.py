"""Multi-agent solvers and the solution validator."""
from __future__ import annotations

from ..apf import APFParams
from ..grid import GridMap
from .common import (
    LOW_LEVELS,
    Conflict,
    MapfInstance,
    Solution,
    configs_to_paths,
    conflict_graph,
    count_colliding_pairs,
    is_valid_transition,
    path_cost,
    stream,
    validate,
)
from .dapf import DAPF_PRESET, DapfPlanner, dapf_step, solve_dapf
from .lacam import LacamPlanner, lacam_search, solve_lacam
from .lns2 import Lns2Planner, lns2_plan, select_neighborhood, solve_lns2
from .pibt import PibtPlanner, pibt_step, solve_pibt
from .prp import PrpPlanner, prioritized_plan, solve_prp

SOLVERS = ("dapf", "prp", "lns2", "pibt", "lacam")
SEARCH_BASED = ("prp", "lns2")


def make_planner(solver: str, grid: GridMap, low_level: str = "astar", apf: APFParams | None = None,
                 seed: int = 0, **options):
    """Windowed planner with ``plan(positions, goals, horizon, deadline, window)``."""
    if solver == "prp":
        return PrpPlanner(grid, low_level, apf, seed)
    if solver == "lns2":
        return Lns2Planner(grid, low_level, apf, seed, **options)
    if solver == "pibt":
        return PibtPlanner(grid, apf, seed)
    if solver == "lacam":
        return LacamPlanner(grid, apf, seed, **options)
    if solver == "dapf":
        return DapfPlanner(grid, apf, seed)
    raise ValueError(f"unknown solver {solver!r}")


def solve(instance: MapfInstance, solver: str, low_level: str = "astar", apf: APFParams | None = None,
          time_limit: float | None = None, max_steps: int = 1000) -> Solution:
    """One-shot dispatch used by the CLI and the benchmark harness."""
    if solver == "prp":
        return solve_prp(instance, low_level, apf, time_limit=time_limit)
    if solver == "lns2":
        return solve_lns2(instance, low_level, apf, time_limit=time_limit)
    if solver == "pibt":
        return solve_pibt(instance, apf, max_steps=max_steps)
    if solver == "lacam":
        return solve_lacam(instance, apf, time_limit=time_limit)
    if solver == "dapf":
        return solve_dapf(instance, apf if apf is not None else DAPF_PRESET, max_steps=max_steps)
    raise ValueError(f"unknown solver {solver!r}")


__all__ = [
    "Conflict", "DAPF_PRESET", "DapfPlanner", "LOW_LEVELS", "LacamPlanner", "Lns2Planner", "MapfInstance",
    "PibtPlanner", "PrpPlanner", "SEARCH_BASED", "SOLVERS", "Solution", "configs_to_paths", "conflict_graph",
    "count_colliding_pairs", "dapf_step", "is_valid_transition", "lacam_search", "lns2_plan", "make_planner",
    "path_cost", "pibt_step", "prioritized_plan", "select_neighborhood", "solve", "solve_dapf", "solve_lacam",
    "solve_lns2", "solve_pibt", "solve_prp", "stream", "validate",
]
