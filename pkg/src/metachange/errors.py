"""Exception types shared across the package."""


class MetachangeError(Exception):
    """Base class for all package-specific errors."""


class FormatError(MetachangeError):
    """A malformed input file (corpus, matrix, test set, judgments)."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class UndefinedMeasureError(MetachangeError):
    """A measure has no defined value for the requested word."""


class InsufficientDataError(MetachangeError):
    """Not enough occurrences or contexts to carry out an operation."""

    def __init__(self, message: str, missing: tuple[str, ...] = ()):
        super().__init__(message)
        self.missing = tuple(missing)


class DegenerateFitError(MetachangeError):
    """A regression cannot be fitted (too few or collinear points)."""


class KeyMismatchError(MetachangeError):
    """Predicted and gold key sets differ where they must agree."""

    def __init__(self, message: str, unexpected: tuple[str, ...] = ()):
        super().__init__(message)
        self.unexpected = tuple(unexpected)
