"""Line-of-sight relay networks of vehicles and mobile units in polygonal environments."""

from .connectivity import (
    CheckResult,
    SystemState,
    Verdict,
    VehiclePose,
    VisGraph,
    algebraic_connectivity,
    build_relay_graph,
    build_unit_graph,
    communication_check,
    distributed_check,
    laplacian,
)
from .errors import (
    BudgetExhausted,
    EmptyRegion,
    LosnetError,
    NoPath,
    NoVehicles,
    ParseError,
    PointOutsideFreeSpace,
    RelayBroken,
    Unreachable,
    ValidationError,
)
from .geometry import (
    Environment,
    Point2,
    Polygon,
    Region,
    box,
    environment_from_coords,
    largest_part,
    los_visible,
    region_boolean,
    visibility_polygon,
    visibility_region,
)
from .placement import ScoreParams, deploy, greedy_cover, label_faces, place
from .recovery import single_move_recover

__version__ = "0.1.0"
