"""Exception types shared across the laboratory."""


class DwlabError(Exception):
    """Base class for all errors raised by dwlab."""


class DefinitenessError(DwlabError):
    """A matrix required to be Hermitian positive definite is not.

    ``pivot`` is the 1-based index of the leading minor at which the
    Cholesky factorization broke down.
    """

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class SingularMatrixError(DwlabError):
    """A linear solve hit a (numerically) singular matrix."""

    def __init__(self, message: str, cond_estimate: float | None = None):
        super().__init__(message)
        self.cond_estimate = cond_estimate


class MatrixRangeError(DwlabError):
    """Matrix-function evaluation left the supported argument range."""


class NumericalError(DwlabError):
    """An internal numerical consistency check failed."""


class CoefficientError(DwlabError):
    """A PDE coefficient violates its sign or regularity constraints."""


class StepError(DwlabError):
    """A time step could not be completed (e.g. singular implicit system)."""

    def __init__(self, message: str, dt: float | None = None, step: int | None = None):
        super().__init__(message)
        self.dt = dt
        self.step = step


class NonlinearityError(DwlabError):
    """The user-supplied nonlinearity returned nonfinite values."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class BlowUpError(DwlabError):
    """The blow-up guard tripped: the state norm exceeded the cap."""

    def __init__(self, message: str, last_time: float, last_norm: float):
        super().__init__(message)
        self.last_time = last_time
        self.last_norm = last_norm


class ConfigError(DwlabError):
    """A run configuration failed to parse or validate.

    ``line`` is the 1-based line number in the config text when known,
    ``key`` the offending ``section.key``.
    """

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        super().__init__(message)
        self.line = line
        self.key = key
