"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class ParseError(ValueError):
    """Malformed graph or point-cloud file. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IndexOutOfRange(ParseError):
    pass


class ConvergenceFailure(RuntimeError):
    """Power iteration ran out of iterations.

    ``lower_bound`` is the last Rayleigh-quotient estimate, which never
    exceeds the true norm.
    """

    def __init__(self, message, lower_bound, iterations):
        super().__init__(message)
        self.lower_bound = lower_bound
        self.iterations = iterations


class IntegrationFailure(RuntimeError):
    pass
