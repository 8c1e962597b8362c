"""Exception and warning types raised across the package."""


class DimensionError(ValueError):
    """Operator/state dimensions are invalid or do not match."""


class StiffnessError(RuntimeError):
    """The adaptive integrator could not make progress."""

    def __init__(self, message, fastest_rate=None):
        super().__init__(message)
        self.fastest_rate = fastest_rate


class ConvergenceError(RuntimeError):
    """A long-time average did not settle between consecutive windows."""


class MultipleSteadyStatesError(RuntimeError):
    """The Liouvillian kernel is more than one-dimensional."""


class ConditioningError(RuntimeError):
    """The trace-constrained steady-state system is numerically singular."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class UndefinedCorrelationError(ValueError):
    """g2 requested for a state with vanishing mean phonon number."""


class NoResonanceError(ValueError):
    """No qubit detuning makes the dressed splitting match the resonator."""


class ValidityWarning(UserWarning):
    """Parameters leave the regime where the effective model is justified."""
