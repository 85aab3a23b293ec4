"""Exception types shared across the package."""


class TraceAttackError(Exception):
    """Base class for every error raised by this package."""


class ZeroInverse(TraceAttackError, ZeroDivisionError):
    pass


class DimensionMismatch(TraceAttackError, ValueError):
    pass


class OutsideRoot(TraceAttackError, ValueError):
    pass


class Unsplittable(TraceAttackError):
    pass


class InvalidParams(TraceAttackError, ValueError):
    pass


class NoContainingChild(TraceAttackError):
    def __init__(self, node, message=None):
        self.node = node
        super().__init__(message or f"no child of node {node} accepts the point")


class PickupTooCloseToOrigin(TraceAttackError, ValueError):
    pass


class RecoveryError(TraceAttackError):
    """A batch of the quadtree attack did not produce a unique solution."""

    def __init__(self, status, rank, batch):
        self.status = status
        self.rank = rank
        self.batch = tuple(batch)
        super().__init__(f"batch {self.batch}: {status} (rank {rank})")


class AmbiguousIntersection(TraceAttackError):
    def __init__(self, candidates):
        self.candidates = sorted(candidates)
        super().__init__(f"{len(self.candidates)} candidate locations survive intersection")


class EmptyIntersection(TraceAttackError):
    pass


class ConfigError(TraceAttackError, ValueError):
    pass
