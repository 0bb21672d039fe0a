"""Exception types raised across the package."""


class IPDynamicsError(Exception):
    """Base class for all package errors."""


class NotHermitian(IPDynamicsError, ValueError):
    pass


class NoConvergence(IPDynamicsError, RuntimeError):
    pass


class DimensionMismatch(IPDynamicsError, ValueError):
    pass


class InvalidState(IPDynamicsError, ValueError):
    pass


class NotXShaped(IPDynamicsError, ValueError):
    """A matrix has weight outside the diagonal and anti-diagonal."""


class ParamOutOfRange(IPDynamicsError, ValueError):
    pass


class NotCPTP(IPDynamicsError, ValueError):
    pass


class QuadratureFailure(IPDynamicsError, RuntimeError):
    pass


class UnknownChannel(IPDynamicsError, ValueError):
    pass


class ChannelSpecError(IPDynamicsError, ValueError):
    """Malformed channel spec string (bad key, missing value, ...)."""


class ConstantIP(IPDynamicsError, ValueError):
    """The common-bath evolution leaves IP constant (c1 == c2)."""


class RouteMismatch(IPDynamicsError, RuntimeError):
    """Closed-form coefficient map and Kraus route disagree."""


class DegenerateFallback(UserWarning):
    """A closed form was singular and a slower general route was used."""
