"""
Error hierarchy for the spectrum sensing toolkit.
"""


class SensingError(Exception):
    """Base class for every error raised by the sensing core."""


class DegenerateStats(SensingError):
    """Statistics make a derived quantity undefined (e.g. alpha in {0, 1} for rho)."""


class InvalidPmf(SensingError):
    """A probability vector is outside [0, 1] or does not normalize."""


class SizeLimit(SensingError):
    """Requested node count exceeds what the dense matrices can hold."""


class Infeasible(SensingError):
    """No joint pmf (or LP point) satisfies the given constraints."""


class Unbounded(SensingError):
    """The linear program has no finite optimum."""


class NumericFailure(SensingError):
    """Iteration limit or loss of precision inside a numeric routine."""
