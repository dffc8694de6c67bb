"""Constrained single-agent planners."""
from .astar import SearchResult, plan_temporal_astar
from .constraints import ConstraintTables, path_violations, soft_collisions
from .sipps import SippsResult, build_safe_intervals, plan_sipps

__all__ = [
    "ConstraintTables",
    "SearchResult",
    "SippsResult",
    "build_safe_intervals",
    "path_violations",
    "plan_sipps",
    "plan_temporal_astar",
    "soft_collisions",
]
