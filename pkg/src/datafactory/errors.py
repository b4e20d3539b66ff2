"""Exception hierarchy shared across the datafactory modules.

Every domain failure raised by this package derives from
:class:`DataFactoryError` so callers (CLI, HTTP gateway) can map them to
exit codes / status codes uniformly.
"""

from __future__ import annotations


class DataFactoryError(Exception):
    """Base class for all domain errors."""


# --- ingest ---------------------------------------------------------------

class EmptyTable(DataFactoryError):
    """Raised when a raw table has no columns (or no usable header)."""


class NameCollision(DataFactoryError):
    """A table (or other named object) already exists under that name."""


# --- relational store -----------------------------------------------------

class StoreError(DataFactoryError):
    """Generic relational-store failure."""


class SqlSyntaxError(StoreError):
    """The engine rejected the statement; message carries the engine text."""


class UnknownRelation(StoreError):
    """The statement references a table that does not exist."""


class NonSelectRejected(StoreError):
    """A mutating (non-SELECT) statement was passed to the read-only port."""


# --- knowledge graph construction ------------------------------------------

class ConfigInvalid(DataFactoryError):
    """Entity/relationship configuration failed validation."""


class MissingIdValue(DataFactoryError):
    """An identifier column is null or absent for the given row."""


class IdMismatch(DataFactoryError):
    """Attempted to merge entities with different ids or types."""


class ZeroVector(DataFactoryError):
    """Cosine similarity is undefined for a zero-length vector."""


class DimensionMismatch(DataFactoryError):
    """Vector operands have different dimensions."""


class UnknownAttribute(DataFactoryError):
    """Strict rule evaluation hit an attribute absent from an entity."""


# --- graph query ------------------------------------------------------------

class CypherSyntaxError(DataFactoryError):
    """Parse failure; carries the byte offset and the expected tokens."""

    def __init__(self, message: str, offset: int, expected: list[str] | None = None):
        super().__init__(message)
        self.offset = offset
        self.expected = expected or []


class UnsupportedFeature(DataFactoryError):
    """The query uses a construct outside the read-only subset."""


# --- memory -----------------------------------------------------------------

class EmptyText(DataFactoryError):
    """Embedding requested for empty text."""


class KindMismatch(DataFactoryError):
    """Structural scoring across different query kinds (sql vs cypher)."""


class StorageError(DataFactoryError):
    """The QA record store could not persist or load a record."""


# --- llm ----------------------------------------------------------------------

class LlmUnavailable(DataFactoryError):
    """No provider configured and no replay transcript loaded."""


class ProviderError(DataFactoryError):
    """The provider returned a non-retryable error response."""

    def __init__(self, status: int, body: str):
        super().__init__(f"provider error {status}: {body[:200]}")
        self.status = status
        self.body = body


class LlmTimeout(DataFactoryError):
    """The provider did not answer within the transport deadline."""


class ReplayExhausted(DataFactoryError):
    """The replay transcript has no entry left for this request."""


class ReplayKeyMismatch(DataFactoryError):
    """The next transcript entry was recorded for a different prompt."""


# --- agents -------------------------------------------------------------------

class GenerationFailed(DataFactoryError):
    """Query generation failed after exhausting the repair budget."""


class UnparseableSuggestion(DataFactoryError):
    """The LLM's KG-config suggestion could not be parsed."""


class InvalidSuggestion(DataFactoryError):
    """The LLM's KG-config suggestion failed validation."""


# --- leader ---------------------------------------------------------------------

class ReActParseError(DataFactoryError):
    """A leader completion did not follow the thought/action block format."""


# --- bench -----------------------------------------------------------------------

class FormatError(DataFactoryError):
    """A benchmark file did not match the dataset's published format."""


class DegenerateSample(DataFactoryError):
    """Effect size is undefined (pooled standard deviation is zero)."""
