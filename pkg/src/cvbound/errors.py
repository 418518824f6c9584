"""Exception hierarchy shared by all modules."""


class CertificationError(Exception):
    """Base class; every subclass maps to a distinct CLI exit code."""

    exit_code = 1


class InvalidParameter(CertificationError, ValueError):
    exit_code = 3


class CutoffExceeded(CertificationError, ValueError):
    exit_code = 4


class NonHermitian(CertificationError, ValueError):
    exit_code = 5


class EmptyInput(CertificationError, ValueError):
    exit_code = 6


class ZeroTrace(CertificationError, ValueError):
    exit_code = 7


class BlockLeakage(CertificationError):
    """Partial transpose has weight outside the requested blocks.

    The decomposition computed before the check is attached so that the
    caller can still inspect it.
    """

    exit_code = 8

    def __init__(self, message, decomposition=None):
        super().__init__(message)
        self.decomposition = decomposition


class FilterOverflow(CertificationError, OverflowError):
    """Local filter weights leave the floating-point range at this cutoff."""

    exit_code = 9

    def __init__(self, message, max_admissible_n=None):
        super().__init__(message)
        self.max_admissible_n = max_admissible_n


class FactorOverflow(CertificationError, OverflowError):
    exit_code = 10


class InvalidScaling(CertificationError, ValueError):
    exit_code = 11


class DegenerateAngle(CertificationError, ValueError):
    exit_code = 12


class ConfigError(CertificationError):
    exit_code = 2
