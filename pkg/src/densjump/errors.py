"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError (and FloatingPointError) -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad flag values, malformed config files."""


class DataError(ValueError):
    """Input data violates a contract (missing columns, too few rows, ...)."""


class DegenerateWindowError(DataError):
    """Trimming window retains too few samples, or none on one side of t."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed (non-convergence, separation, ...)."""


class ConvergenceError(NumericalError):
    """An iterative numeric routine hit its iteration cap."""


class SeparationError(NumericalError):
    """Logistic regression diverged: the trimmed data are separable."""
