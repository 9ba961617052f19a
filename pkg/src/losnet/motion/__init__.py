from .dubins import DubinsPath, dubins_shortest, dubins_to_point, plan_dubins
from .mobility import Nomadic, RandomWaypoint, make_model, mobility_step
from .planner import DubinsParams, Path, PlannerConfig, geodesic, motion_cost, plan_path, plan_to_point, region_distance
from .tour import Tour, patrol_tour

__all__ = [
    "DubinsParams",
    "DubinsPath",
    "Nomadic",
    "Path",
    "PlannerConfig",
    "RandomWaypoint",
    "Tour",
    "dubins_shortest",
    "dubins_to_point",
    "geodesic",
    "make_model",
    "mobility_step",
    "motion_cost",
    "patrol_tour",
    "plan_dubins",
    "plan_path",
    "plan_to_point",
    "region_distance",
]
