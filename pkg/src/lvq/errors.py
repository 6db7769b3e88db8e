"""Exception hierarchy shared by all lvq modules."""


class LVQError(Exception):
    """Base class for every error raised by lvq."""


class FormatError(LVQError, ValueError):
    """Input could not be parsed.

    ``line`` (1-based) and ``path`` (JSON path such as ``$.slides[0].height``)
    are filled in when the location is known.
    """

    def __init__(self, message, *, line=None, path=None):
        self.line = line
        self.path = path
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path is not None:
            where.append(path)
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class UnsupportedError(LVQError):
    """Well-formed input using a variant this toolkit does not handle."""


class ValidationError(LVQError, ValueError):
    """Parsed values violate a domain invariant."""


class InsufficientDataError(LVQError):
    """Not enough signal or samples to compute the requested quantity."""


class ConfigurationError(LVQError):
    """Missing or invalid configuration (lexicon file, config keys)."""


class UndefinedCorrelation(LVQError):
    """Correlation is undefined, typically because one input is constant."""


class DegenerateVariance(LVQError):
    """Pooled score spread is zero so normalization is impossible."""
