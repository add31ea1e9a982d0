"""Exception types shared across the package."""


class DnsIdsError(Exception):
    """Base class for every package-specific error."""


class InvalidConfig(DnsIdsError):
    """A scenario configuration violates a constraint."""


class ParseError(DnsIdsError):
    """Malformed trace, dataset, or report input."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ZeroVector(DnsIdsError):
    """A vector with no nonzero component cannot be normalized."""


class InvalidWidth(DnsIdsError):
    """Hidden-layer width outside the supported range."""


class SingularUpdate(DnsIdsError):
    """Damped normal equations unsolvable even at maximum damping."""


class TooFewPoints(DnsIdsError):
    """Not enough (distinct) points for the requested cluster count."""


class NeedTwoCenters(DnsIdsError):
    """The width rule needs at least two centers."""


class DegenerateDesign(DnsIdsError):
    """Regularized least-squares system unsolvable."""


class EmptyData(DnsIdsError):
    """An operation received an empty training set."""


class Unlabeled(DnsIdsError):
    """Classification requested before neuron labeling."""


class LengthMismatch(DnsIdsError):
    """Prediction and truth lists differ in length."""


class Empty(DnsIdsError):
    """An operation received no samples."""


class UndefinedMetric(DnsIdsError):
    """A metric denominator is zero; the value is absent, not 0 or 100."""


class TooFewSamples(DnsIdsError):
    """Fewer samples than cross-validation folds."""


class ConfigError(DnsIdsError):
    """Pipeline configuration file invalid or missing."""


class TrainingError(DnsIdsError):
    """Classifier training failed."""
