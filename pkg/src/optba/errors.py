"""Exception hierarchy shared by every optba module."""


class OptBAError(Exception):
    """Base class for all optba errors."""


class InvalidConfig(OptBAError, ValueError):
    pass


class InvalidSpace(InvalidConfig):
    pass


class NeighborhoodEmpty(OptBAError):
    """Every coordinate's neighborhood collapses onto the center."""


class SpaceTooLarge(OptBAError):
    pass


class DimensionMismatch(OptBAError, ValueError):
    pass


class ConstructionUnverifiable(OptBAError):
    """A surface's argmax cannot be checked because the space is too large to enumerate."""


class ObjectiveFailure(OptBAError):
    """An objective evaluation failed or returned a non-finite fitness.

    ``params`` and ``eval_id`` identify the offending evaluation when known.
    ``trace`` is set by the engine to the partial run trace when a run aborts.
    """

    def __init__(self, message, params=None, eval_id=None):
        super().__init__(message)
        self.params = params
        self.eval_id = eval_id
        self.trace = None


class EvalTimeout(ObjectiveFailure):
    pass


class ProtocolError(ObjectiveFailure):
    pass


class ChildExited(ObjectiveFailure):
    pass
