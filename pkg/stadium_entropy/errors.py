# This file holds the custom error types raised by the library and the CLI.


class ConfigError(RuntimeError):
    """An error encountered during reading the config file or the command line.

    Args:
        msg: The message displayed to the user on error.
    """

    def __init__(self, msg: str):
        super(ConfigError, self).__init__("%s" % (msg,))


class StadiumError(RuntimeError):
    """Base class of every error raised by the stadium computations.

    Args:
        msg: The message displayed to the user on error.
    """

    def __init__(self, msg: str):
        super(StadiumError, self).__init__("%s" % (msg,))


class GeometryError(StadiumError):
    """A ray found no boundary intersection. Impossible for valid input."""


class TangentialCollisionError(StadiumError):
    """A ray meets the boundary with |theta| within tolerance of pi/2."""


class GrazingError(StadiumError):
    """A reflection was requested for a direction (almost) parallel to the wall."""


class SingularOrbitError(StadiumError):
    """An orbit hit a junction corner within tolerance.

    Args:
        msg: The message displayed to the user on error.
        step: Index of the collision at which the corner was hit.
    """

    def __init__(self, msg: str, step: int = 0):
        super(SingularOrbitError, self).__init__(msg)
        self.step = step


class UnrealizablePairError(StadiumError):
    """A code word contains TT, BB or a mixed-sign arc pair."""


class EmptyArcRunError(StadiumError):
    """A code word has no arc collision, so it has no signed composition."""


class DomainError(StadiumError, ValueError):
    """A function was evaluated outside of its domain."""


class ConvergenceError(StadiumError):
    """An iteration did not converge within its iteration cap."""


class BracketError(StadiumError):
    """A bisection was started on an interval without a sign change."""


class BoundCheckError(StadiumError):
    """One of the inequalities of the entropy bound chain failed."""
