"""Exception types raised across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class InvalidParameterError(SimulationError, ValueError):
    """A value violates the documented domain of an operation."""


class NoCandidateError(SimulationError):
    """Association was asked to choose from an empty candidate set."""


class DegenerateTrialError(SimulationError):
    """A trial has no base stations in any tier."""


class ConfigError(InvalidParameterError):
    """A configuration document failed to parse or validate."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
