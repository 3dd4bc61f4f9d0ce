"""Exception hierarchy shared by every module."""


class MfshiftError(ValueError):
    """Base class for all library errors."""


class InvalidRangeError(MfshiftError):
    pass


class InvalidInputError(MfshiftError):
    pass


class UnsupportedModulusError(MfshiftError):
    pass


class NonUnitError(MfshiftError):
    pass


class InvalidParameterError(MfshiftError):
    pass


class InvalidConstructionError(MfshiftError):
    pass


class DegeneratePairError(MfshiftError):
    pass


class ConstraintConflictError(MfshiftError):
    pass
