"""Exception hierarchy shared across the package."""


class InlsLabError(Exception):
    """Base class for all errors raised by inlslab."""


# -- parameter validation -------------------------------------------------

class DimensionTooSmall(InlsLabError):
    pass


class BOutOfRange(InlsLabError):
    pass


class SigmaNotIntercritical(InlsLabError):
    pass


class CouplingBelowHardy(InlsLabError):
    pass


# -- grids and fields ------------------------------------------------------

class InvalidResolution(InlsLabError):
    pass


class SizeMismatch(InlsLabError):
    pass


class ZeroField(InlsLabError):
    pass


# -- ground state ----------------------------------------------------------

class NoConvergence(InlsLabError):
    pass


class NegativeProfile(InlsLabError):
    pass


class MissingGroundState(InlsLabError):
    pass


class ScaleOutOfRange(InlsLabError):
    pass


# -- evolution -------------------------------------------------------------

class ConfigInvalid(InlsLabError):
    pass


class InsufficientSnapshots(InlsLabError):
    pass


# -- virial ------------------------------------------------------------------

class CutoffInfeasible(InlsLabError):
    pass


# -- classifier ---------------------------------------------------------------

class MissingVariance(InlsLabError):
    pass


class EmptyTrajectory(InlsLabError):
    pass


# -- harness / IO ------------------------------------------------------------

class ConfigParseError(InlsLabError):
    pass


class CacheMiss(InlsLabError):
    pass


class IoError(InlsLabError):
    pass
