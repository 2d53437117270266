"""Exception types shared across the package."""


class LassoTuneError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteInput(LassoTuneError):
    """Input array contains NaN or infinity."""


class ZeroVarianceColumn(LassoTuneError):
    """A design-matrix column is constant and cannot be standardized."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class DegenerateResponse(LassoTuneError):
    """The response is orthogonal to every predictor (lambda_max = 0)."""


class InvalidConfig(LassoTuneError):
    """Solver configuration violates its constraints (tau > 0, n_lambda >= 100)."""


class MaxIterationsExceeded(LassoTuneError):
    """Coordinate descent did not converge within the sweep cap."""


class SingularGram(LassoTuneError):
    """Active Gram matrix is not invertible within the conditioning tolerance."""


class NumericalFailure(LassoTuneError):
    """A numerical routine failed (ill-conditioning, non-termination, ...)."""


class MismatchedProblem(LassoTuneError):
    """Two solution paths do not refer to the same problem (p or lambda_max differ)."""


class SpeRangeError(LassoTuneError):
    """lambda_max does not exceed the reference lambda_start, so the SPE
    reference sequence is empty; the start value is absolute by design."""


class LengthMismatch(LassoTuneError):
    """Vectors that must have equal length do not."""


class DimensionMismatch(LassoTuneError):
    """Matrix dimensions are incompatible with the trained problem."""


class InvalidRho(LassoTuneError):
    """Correlation parameter outside (0, 1)."""


class InvalidPattern(LassoTuneError):
    """Unknown coefficient pattern id, or pattern infeasible for this p."""


class NotPositiveDefinite(LassoTuneError):
    """Covariance matrix is not symmetric positive definite."""


class EigenFailure(LassoTuneError):
    """Eigenvalue computation failed."""


class MalformedRow(LassoTuneError):
    """A CSV row could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class NonFiniteLoss(LassoTuneError):
    """Training loss became NaN or infinite; carries the epoch index."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class WrongModelKind(LassoTuneError):
    """Model of the wrong kind passed to a prediction routine."""


class VersionMismatch(LassoTuneError):
    """Model file written with an unsupported format version."""


class CorruptFile(LassoTuneError):
    """Model file is truncated or structurally invalid."""


class InvalidRange(LassoTuneError):
    """Configuration sampling range is empty (2p < 100)."""
