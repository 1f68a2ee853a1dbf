"""Exception hierarchy shared by every twinlab module."""


class TwinlabError(Exception):
    """Base class for all twinlab errors."""


class ValidationError(TwinlabError, ValueError):
    """Input does not satisfy an operation's preconditions."""


class TwinRejection(ValidationError):
    """The supplied operators are not twins for the given state.

    ``residual`` is the operator norm of ``A1 rho - A2 rho``.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class DegenerateSplitError(ValidationError):
    """A projector splits the state into a zero-weight and a full-weight part."""


class InternalConsistencyError(TwinlabError, RuntimeError):
    """Two routes that must agree mathematically disagreed numerically.

    Usually signals a tolerance misconfiguration rather than bad input.
    """
