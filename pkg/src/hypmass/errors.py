"""Exception hierarchy shared by all hypmass modules."""


class HypmassError(Exception):
    """Base class for all errors raised by hypmass."""


class DomainError(HypmassError, ValueError):
    """A point lies outside the coordinate domain of a metric."""


class GeometryError(HypmassError):
    """A curve is degenerate (vanishing velocity, non-positive length element)."""


class InputError(HypmassError, ValueError):
    """Malformed or inadmissible input data."""


class HypothesisError(InputError):
    """Boundary data violates a hypothesis of the extension (e.g. k <= 0)."""


class SolverError(HypmassError):
    """The flow integrator failed."""


class StiffnessError(SolverError):
    """Step size underflow."""


class BarrierViolationError(SolverError):
    """The discrete solution left the barrier envelope.

    The continuum solution cannot do this, so this always indicates a
    numerical defect.
    """


class TailFitError(SolverError):
    """The asymptotic tail fit did not converge; try a larger ``r_max``."""
