"""Exception hierarchy shared by all modules."""


class RiaError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(RiaError, ValueError):
    """An argument is outside its documented domain."""


class EmptyResultError(RiaError):
    """The requested object would be empty (e.g. no annihilator exists)."""


class RegionError(RiaError):
    """The antenna configuration lies outside the region an operation supports."""

    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class InfeasibleError(RiaError):
    """The scheme parameters violate one of the feasibility constraints."""


class DegenerateInstanceError(RiaError):
    """A random draw failed to attain its generic rank."""
