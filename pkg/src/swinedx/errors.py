"""Exception types shared across the package."""


class SwineDxError(Exception):
    """Base class for all package errors."""


# --- query routing ---

class EmptyQuery(SwineDxError, ValueError):
    """Query text is blank after whitespace trimming."""


class BackendUnavailable(SwineDxError):
    """A model backend could not be reached, or retries were exhausted."""


# --- symptom dialogue ---

class TurnLimitReached(SwineDxError):
    """The three-exchange symptom collection cap has been hit."""


class EmptySession(SwineDxError):
    """Finalization attempted with no facts and no initial complaint."""


# --- fusion ---

class NoOpinions(SwineDxError, ValueError):
    """Fusion called with an empty opinion list."""


class ZeroTotalWeight(SwineDxError, ValueError):
    """Agent weights sum to zero, so they cannot be normalized."""


class OutOfRange(SwineDxError, ValueError):
    """A confidence value lies outside [0, 1]."""


class NotOOD(SwineDxError, ValueError):
    """Escalation requested for an outcome whose prediction set is non-empty."""


# --- knowledge store ---

class DimensionMismatch(SwineDxError, ValueError):
    """Vector length does not match the store dimension."""


class EmptyStore(SwineDxError):
    """Retrieval attempted against a store with no records."""


# --- model gateway ---

class TransientBackendError(SwineDxError):
    """A retryable transport-level failure from a backend."""


class FixtureMissing(SwineDxError, KeyError):
    """A scripted mock has no fixture for the request; not retryable."""


class NoBackend(SwineDxError):
    """No backend is registered or selected."""


class DuplicateBackend(SwineDxError, ValueError):
    """A backend id was registered twice."""


class UnknownBackend(SwineDxError, KeyError):
    """Backend selection named an unregistered id."""


class RetriesExhausted(SwineDxError):
    """All backoff attempts failed.

    Carries the per-attempt errors in ``attempts``.
    """

    def __init__(self, message: str, attempts: list[Exception]):
        super().__init__(message)
        self.attempts = list(attempts)


# --- evaluation harness ---

class EmptyMatrix(SwineDxError, ValueError):
    """Confusion matrix has no nonzero counts."""


class EmptyRecords(SwineDxError, ValueError):
    """Metric computation called with no records."""


class EmptyScores(SwineDxError, ValueError):
    """Rubric aggregation called with no scores."""


class LengthMismatch(SwineDxError, ValueError):
    """Paired samples differ in length."""


class DegenerateVariance(SwineDxError, ValueError):
    """Paired differences are all identical; the t statistic is undefined."""


class ParseError(SwineDxError, ValueError):
    """A dataset line failed to parse.

    ``line`` is the 1-based line number of the offending record.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaError(SwineDxError, ValueError):
    """A dataset record is missing a required field, named in ``field``."""

    def __init__(self, message: str, field: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.field = field
        self.line = line


# --- service ---

class UnknownSession(SwineDxError, KeyError):
    """No session with the given id exists."""


class StorageFailure(SwineDxError):
    """Session or store persistence could not be written."""


class ConfigError(SwineDxError, ValueError):
    """Service configuration failed validation."""
