"""Exception hierarchy shared by all pipeline stages."""


class RoadprioError(Exception):
    """Base class; the CLI maps subclasses of ValidationError to exit code 3."""


class InputParseError(RoadprioError):
    """An input file could not be parsed."""


class ValidationError(RoadprioError):
    pass


class DegenerateGeometry(ValidationError):
    pass


class RoadTooShort(ValidationError):
    pass


class EmptySequence(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class OrphanRequirement(ValidationError):
    pass


class MissingScore(ValidationError):
    pass


class EmptySuite(ValidationError):
    pass


class NoFailures(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass
