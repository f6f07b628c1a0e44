"""Exception types shared across the solvers and the measurement front-end."""


class LocalizationError(Exception):
    """Base class for numerical failures during localization."""


class SensorSingularityError(LocalizationError):
    """An evaluation point coincides with a sensor (unit vectors undefined)."""

    def __init__(self, sensor_index: int, message: str | None = None):
        self.sensor_index = sensor_index  # 1-based
        super().__init__(message or f"point coincides with sensor {sensor_index}")


class SingularSystemError(LocalizationError):
    """The per-iteration linear system is numerically singular."""


class DegenerateMeasurementError(LocalizationError):
    """A range difference is geometrically infeasible (exceeds the focal distance)."""


class RayMeasurementError(DegenerateMeasurementError):
    """A range difference equals the focal distance exactly: the hyperbola collapses to a ray."""
