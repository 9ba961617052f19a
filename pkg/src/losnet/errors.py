class LosnetError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LosnetError, ValueError):
    """Geometry or scenario content violates a structural invariant."""


class PointOutsideFreeSpace(LosnetError, ValueError):
    def __init__(self, point):
        super().__init__(f"point {tuple(point)} is not in the free space")
        self.point = point


class EmptyRegion(LosnetError, ValueError):
    pass


class RelayBroken(LosnetError):
    """Single-vehicle recovery was requested while the relay graph is disconnected."""


class NoVehicles(LosnetError, ValueError):
    pass


class NoPath(LosnetError):
    pass


class BudgetExhausted(LosnetError):
    """Sampling planner hit its iteration cap without reaching the goal."""


class Unreachable(LosnetError):
    pass


class ParseError(LosnetError, ValueError):
    """Malformed scenario or plan file.

    ``field`` is a dotted path into the document (``environment.obstacles[2]``)
    and ``line`` the 1-based line number when the failure is lexical.
    """

    def __init__(self, message, field=None, line=None):
        where = []
        if field:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line
