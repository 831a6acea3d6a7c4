"""Exception hierarchy shared across the library and the CLI exit codes."""


class ChargeDiagramError(Exception):
    """Base class for all library errors."""


class InvalidStateError(ChargeDiagramError):
    """Matrix fails Hermiticity / positivity / trace validation."""


class ShapeError(ChargeDiagramError):
    """Dimension or arity mismatch between operands."""


class CapacityError(ChargeDiagramError):
    """Requested construction exceeds the configured dimension cap."""


class InfeasibleTargetError(ChargeDiagramError):
    """Charge target lies outside (or on the boundary of) the achievable set."""

    def __init__(self, message, beta=None, residual=None):
        super().__init__(message)
        self.beta = beta
        self.residual = residual


class ConvergenceError(ChargeDiagramError):
    """Iterative solver exhausted its iteration budget."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BoundaryProximityError(ChargeDiagramError):
    """Finite-difference stencil would step across the achievable boundary."""


class InfeasibleScenarioError(ChargeDiagramError):
    """Work transformation violates the second law (negative gap)."""


class UnboundedRateError(ChargeDiagramError):
    """No feasible bath rate found below the configured maximum."""


class DegenerateTrimError(ChargeDiagramError):
    """Trimming discarded every eigenvalue; retry with larger alpha or n."""


class NotEquivalentError(ChargeDiagramError):
    """Input states differ in entropy or charges beyond the declared slack."""


class SamplingError(ChargeDiagramError):
    """Rejection sampling produced an empty class."""

    def __init__(self, message, accepted=0, attempted=0):
        super().__init__(message)
        self.accepted = accepted
        self.attempted = attempted
