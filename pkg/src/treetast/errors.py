"""Exception types shared across the package."""


class TreeTastError(Exception):
    """Base class for all package errors."""


class InvalidConstellation(TreeTastError):
    """Constellation request is malformed (e.g. non-square QAM order)."""


class EncodeError(TreeTastError):
    """Symbol vector does not match the code's dimensions or alphabet."""


class ShapeError(TreeTastError):
    """Matrix dimensions do not conform."""


class InvalidInput(TreeTastError):
    """An argument violates an operation's precondition."""


class Refused(TreeTastError):
    """Exhaustive search space exceeds the safety guard."""
