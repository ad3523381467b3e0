"""Exception hierarchy shared by every shearlab module."""


class ShearlabError(Exception):
    """Base class for all library errors."""


class GeometryError(ShearlabError):
    """A geometric precondition does not hold."""


class NotHyperbolic(GeometryError):
    pass


class DegeneratePoints(GeometryError):
    pass


class SharedEndpoint(GeometryError):
    pass


class Intersecting(GeometryError):
    pass


class PointOffGeodesic(GeometryError):
    pass


class LeafMissesAxis(GeometryError):
    pass


class LeavesCross(GeometryError):
    pass


class DuplicateCrossing(GeometryError):
    pass


class DegenerateResult(GeometryError):
    pass


class CrossingLost(GeometryError):
    pass


class BadSeedLeaves(GeometryError):
    pass


class ProbeOutOfRange(GeometryError):
    pass


class SingleCrossing(GeometryError):
    pass


class HypothesesFail(ShearlabError):
    pass


class UnsupportedOrder(ShearlabError):
    pass


class NonFiniteSample(ShearlabError):
    pass


class TraceTooClose(ShearlabError):
    pass


class SceneError(ShearlabError):
    """A scene file could not be turned into library objects.

    ``pointer`` is a JSON pointer to the offending part of the document.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class SceneIOError(SceneError):
    pass


class SchemaError(SceneError):
    pass


class SceneGeometryError(SceneError):
    """Schema-valid scene rejected by a geometry check; ``__cause__`` has the details."""
