"""Exception hierarchy shared across the engine."""


class MorphcheckError(Exception):
    """Base class for every error raised by this package."""


class InvalidViewKind(MorphcheckError):
    """Operation received a score vector of the wrong kind."""


class DimensionMismatch(MorphcheckError):
    """Two vectors that must share a dimension do not."""


class DegenerateVector(MorphcheckError):
    """A vector with zero Euclidean norm where a direction is required."""


class PlaceholderMissing(MorphcheckError):
    """Template text does not contain the placeholder token."""


class NoApplicableSite(MorphcheckError):
    """A replacement transform found no word it could act on."""


class EvaluationError(MorphcheckError):
    """A property atom could not be evaluated; carries the offending slot."""

    def __init__(self, message, slot=None):
        super().__init__(message)
        self.slot = slot


class PlanStructureError(MorphcheckError):
    """A relation plan violates the structural contract of its class."""


class EmptyEnumeration(MorphcheckError):
    """Dataset too small for the requested tuple arity."""


class RankOutOfBounds(MorphcheckError):
    """Unranking index outside [0, count)."""


class DegenerateLabels(MorphcheckError):
    """Probe training set contains a single class."""


class UnsupportedView(MorphcheckError):
    """Model port cannot produce the requested view."""


class PortUnavailable(MorphcheckError):
    """Model port gave up after bounded retries."""


class ConfigError(MorphcheckError):
    """Run configuration failed validation; message carries a JSON pointer."""
