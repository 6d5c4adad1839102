"""Error taxonomy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class LabError(Exception):
    exit_code = 1


class ParameterError(LabError, ValueError):
    """Invalid argument or configuration value."""

    exit_code = 2


class DivergenceError(LabError, RuntimeError):
    """A fixed-point iteration did not converge within its budget."""

    exit_code = 3


class DomainError(LabError, ValueError):
    """A point left the domain on which an object is defined."""

    exit_code = 3


class HypothesisError(LabError, ValueError):
    """A quantitative hypothesis of a construction is violated.

    ``inequality`` names the failing condition, ``step`` the normal-form step
    (if any) in which it failed.
    """

    exit_code = 4

    def __init__(self, message, inequality=None, step=None):
        super().__init__(message)
        self.inequality = inequality
        self.step = step

    def __str__(self):
        msg = super().__str__()
        if self.inequality:
            msg += f" [{self.inequality}]"
        if self.step is not None:
            msg += f" (step {self.step})"
        return msg


class NonresonanceError(HypothesisError):
    """A small denominator fell below the nonresonance level."""


class RepresentationError(LabError, ArithmeticError):
    """Polynomial degree or Fourier cutoff too small for the requested accuracy."""

    exit_code = 5
