from .metrics import metrics_report
from .plans import deployment_to_dict, recovery_to_dict, region_from_list, region_to_list
from .render import render_svg
from .scenario import (
    MobilityConfig,
    Scenario,
    load_plan,
    load_scenario,
    loads_scenario,
    save_plan,
    save_scenario,
    scenario_from_dict,
)
from .simulate import SimReport, simulate

__all__ = [
    "MobilityConfig",
    "Scenario",
    "SimReport",
    "deployment_to_dict",
    "load_plan",
    "load_scenario",
    "loads_scenario",
    "metrics_report",
    "recovery_to_dict",
    "region_from_list",
    "region_to_list",
    "render_svg",
    "save_plan",
    "save_scenario",
    "scenario_from_dict",
    "simulate",
]
