"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """An inadmissible parameter, gain or scenario entry.

    ``problems`` holds one human-readable line per failed check so callers can
    print a structured report instead of only the first failure.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [message])


class DegenerateDistanceError(ArithmeticError):
    """The robot sits exactly on a point feature or disc center."""
