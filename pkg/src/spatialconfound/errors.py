"""Exception types shared across the package.

Plain invalid arguments raise built-in ``ValueError``.  The classes here
mark *statistical* failure modes that callers may want to catch and treat
as data (a Monte Carlo run records them instead of aborting), plus the
aliasing guard for spectral sampling.
"""


class AliasingError(ValueError):
    """A requested frequency exceeds what the grid can represent."""


class DegeneracyError(Exception):
    """Base class for statistical-degeneracy failures (CLI exit code 4)."""


class CollinearityError(DegeneracyError):
    """A design matrix is (numerically) rank deficient.

    ``columns`` names the columns implicated in the near-null direction.
    """

    def __init__(self, message: str, columns: tuple[str, ...] = ()):
        super().__init__(message)
        self.columns = tuple(columns)


class DegenerateResidualError(DegeneracyError):
    """Exposure residuals are numerically zero (fully spatial exposure)."""


class DegenerateExposureError(DegeneracyError):
    """The exposure has no variance; diagnostics on it are undefined."""


class EstimandUndefinedError(DegeneracyError):
    """A population conditioning block is singular; the target does not exist."""


class ConfigError(ValueError):
    """A scenario configuration document is malformed; names the field."""
