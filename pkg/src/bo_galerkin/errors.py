class ConfigurationError(ValueError):
    """Invalid problem or scheme configuration."""


class IterationLimitExceeded(RuntimeError):
    """The fixed-point iteration did not meet its stopping rule.

    Usually means the time step is too large for the contraction to hold.
    """

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class NonFiniteState(RuntimeError):
    """A NaN or Inf appeared in the discrete state."""
