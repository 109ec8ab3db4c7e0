"""Exception hierarchy shared across the toolkit."""


class GausspolyError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(GausspolyError, ValueError):
    """A parameter is outside its documented domain."""


class BelowThresholdError(InvalidParameterError):
    """Intensity too small for the critical radius to be admissible."""

    def __init__(self, lam, d, minimal_lambda):
        self.lam = lam
        self.d = d
        self.minimal_lambda = minimal_lambda
        super().__init__(
            f"lambda={lam:g} is below the admissible threshold for d={d}; "
            f"minimal admissible lambda is {minimal_lambda:.6g}"
        )


class OrderingError(InvalidParameterError):
    """Coupled-path intensities must be strictly increasing."""


class DegenerateInputError(GausspolyError, ValueError):
    """Too few points to span a full-dimensional hull."""


class GeneralPositionError(GausspolyError, ValueError):
    """Input points are affinely degenerate."""


class InvalidOriginError(GausspolyError, ValueError):
    """Reference origin is not strictly inside the polytope."""


class DomainError(GausspolyError, ValueError):
    """A rescaled point lies outside its window."""


class ContextError(GausspolyError, ValueError):
    """Operands carry mismatched lambda contexts."""


class RangeError(GausspolyError, ValueError):
    """Combinatorial argument outside the exact-arithmetic guard."""


class InsufficientDataError(GausspolyError, ValueError):
    """Not enough samples for the requested estimator order."""


class WindowError(GausspolyError, ValueError):
    """Argument outside a bound's validity window."""

    def __init__(self, y, limit):
        self.y = y
        self.limit = limit
        super().__init__(f"y={y:g} is outside the validity window [0, {limit:g}]")


class ConfigError(GausspolyError, ValueError):
    """Experiment or CLI configuration is invalid."""


class SchemaError(ConfigError):
    """Configuration file violates the documented schema."""


class UnknownKeyError(ConfigError):
    """Configuration contains a key outside the documented schema."""
