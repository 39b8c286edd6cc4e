"""Exception types raised across the package.

Every error a user can trigger from a model file or the command line derives
from :class:`ModelError`, so the CLI can turn them into exit code 1 without a
traceback.
"""

from __future__ import annotations


class ModelError(Exception):
    """Base class for validation and numerical-contract errors."""


class SchemaError(ModelError):
    """A model document is missing a field or has a field of the wrong type."""


class DimensionMismatch(ModelError, ValueError):
    pass


class RankDeficient(ModelError, ValueError):
    pass


class EmptySubset(ModelError, ValueError):
    pass


class NotHermitian(ModelError, ValueError):
    pass


class NotPositiveDefinite(ModelError, ValueError):
    pass


class OddDimension(ModelError, ValueError):
    pass


class IndexOutOfRange(ModelError, IndexError):
    pass


class OverlappingSets(ModelError, ValueError):
    pass


class IncompletePartition(ModelError, ValueError):
    pass


class NotNormalized(ModelError, ValueError):
    pass


class NotInConditioningSubspace(ModelError, ValueError):
    pass


class NotSubset(ModelError, ValueError):
    pass


class ZeroMassOutcome(ModelError, ValueError):
    pass


class NotKUnitary(ModelError, ValueError):
    pass


class NotBijection(ModelError, ValueError):
    pass


class InsufficientSamples(ModelError, ValueError):
    pass


class NotSelfAdjoint(ModelError, ValueError):
    pass


class GridTooCoarse(ModelError, ValueError):
    pass


class OutOfDomain(ModelError, ValueError):
    pass


class IllConditioned(UserWarning):
    """Warning: the Gram kernel's condition number exceeds 1e10."""


# Alias matching the name used for partition overlap in spectral measures.
OverlapError = OverlappingSets
