"""Exception types shared across the analytics, simulator, and CLI layers."""


class SpinLabError(Exception):
    """Base class for all spinlab errors."""


class DomainError(SpinLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NoSolution(SpinLabError):
    """The fixed-point equation has no root at the requested (E, beta)."""


class OutsideRsRegime(SpinLabError):
    """The slice free energy is not replica symmetric here; the closed form
    would be wrong and a 1-RSB solver is out of scope."""


class EmptyFeasibleSet(SpinLabError):
    """No energy level admits a band overlap at this temperature (T >= T_BBM)."""


class EmptyWindow(SpinLabError):
    """No temperature on the scan grid satisfies the shattering certificate."""


class MemoryBound(SpinLabError):
    """Requested coupling tensor would exceed the desk-scale memory envelope."""


class Unstable(SpinLabError):
    """The Langevin drift step grew too large for the chosen dt."""


class DegenerateSample(SpinLabError):
    """Importance-sampling weights collapsed (effective sample size too small)."""


class NotConverged(SpinLabError):
    """Gradient descent hit the iteration cap; carries the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ConfigError(SpinLabError, ValueError):
    """A CLI configuration file failed to parse or validate."""
