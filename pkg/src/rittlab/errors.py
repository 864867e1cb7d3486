"""Exception hierarchy shared by all rittlab modules."""


class RittLabError(Exception):
    """Base class for errors raised by rittlab."""


class DimensionError(RittLabError, ValueError):
    """Operand shapes or spaces do not fit together."""


class SpectralProximityError(RittLabError):
    """A resolvent was requested at (or numerically near) a spectral point.

    ``distance`` is the smallest singular value of the shifted matrix, a
    lower estimate of the distance to the spectrum.
    """

    def __init__(self, message, distance):
        super().__init__(message)
        self.distance = distance


class DecompositionError(RittLabError):
    """The eigenvalue 1 is defective, so the ergodic splitting does not exist."""


class DefectiveError(RittLabError):
    """An eigen-decomposition based routine received a (near) defective matrix."""


class BranchError(RittLabError):
    """A fractional power was requested across the negative real axis."""


class ConvergenceError(RittLabError):
    """An iterative procedure (eigen solver, quadrature, refinement) failed."""


class SpectrumError(RittLabError):
    """The spectrum violates the precondition of the requested operation."""


class HypothesisViolation(RittLabError):
    """Parameters such as (alpha, beta) violate a theorem's hypotheses."""
