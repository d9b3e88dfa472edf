"""Exception types raised by the molrelay library."""


class MolrelayError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(MolrelayError, ValueError):
    """A physical or configuration parameter is outside its valid range."""


class ContractError(MolrelayError, ValueError):
    """A call violates an interface contract (e.g. slot/history bookkeeping)."""


class NumericalError(MolrelayError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target.

    Attributes:
        error_estimate: the achieved error estimate, when the failing
            routine can report one (else None).
    """

    def __init__(self, message: str, error_estimate: float | None = None):
        super().__init__(message)
        self.error_estimate = error_estimate


class UninformativeRelayError(MolrelayError, ValueError):
    """Upstream detection performance makes the effective prior odds undefined.

    Raised when the numerator or denominator of the effective prior ratio is
    not strictly positive, i.e. the relay's decisions carry no usable
    information about the source bit at the given prior.
    """


class IndistinguishableHypothesesError(MolrelayError, ValueError):
    """Both hypotheses have identical mean and variance; no test exists."""


class ConfigError(MolrelayError, ValueError):
    """An experiment configuration file is malformed or inconsistent."""
