"""Exception hierarchy shared by the construction, covering and CLI layers."""


class BadApproxError(Exception):
    exit_code = 1


class ConfigError(BadApproxError, ValueError):
    exit_code = 2


class InvalidScale(BadApproxError, ValueError):
    pass


class PreconditionError(BadApproxError, ValueError):
    pass


class OutOfWindow(BadApproxError, ValueError):
    pass


class DegenerateWindow(BadApproxError):
    exit_code = 3


class ConstructionInfeasible(BadApproxError):
    exit_code = 3


class WindowTruncation(BadApproxError):
    exit_code = 3


class SimplexViolation(BadApproxError, AssertionError):
    """Rationals of a small grid cell were found off a common line."""


class DensityShortfall(BadApproxError):
    exit_code = 4

    def __init__(self, message, ratio, family=()):
        super().__init__(message)
        self.ratio = ratio
        self.family = list(family)


class DepthExhausted(BadApproxError):
    exit_code = 5


class InsufficientData(BadApproxError):
    pass


class VerificationFailure(BadApproxError):
    exit_code = 6
