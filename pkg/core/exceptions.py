class ConfigError(ValueError):
    """Invalid run/experiment configuration or CLI override."""


class InvariantViolation(RuntimeError):
    """A simulator state that is never legal. Halts the run."""


class SchedulingError(InvariantViolation):
    """An event was scheduled before the current virtual clock."""


class SimulationHalted(InvariantViolation):
    """The event queue ran dry before every source reached its packet target."""


class ReportError(OSError):
    """A CSV or event-log destination could not be written."""
