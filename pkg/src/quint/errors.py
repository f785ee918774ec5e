"""Exception types raised across the engine.

Every error the engine raises on purpose derives from :class:`QuintError`,
so callers (and the CLI) can separate engine failures from genuine bugs.
"""

from __future__ import annotations


class QuintError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QuintError):
    """A precondition on caller-supplied data does not hold."""


# --- catalog ---------------------------------------------------------------

class DuplicateSource(QuintError):
    """A source registration collides with an existing, different source."""


class UnknownDomain(QuintError):
    """The named domain has not been registered."""


class SchemaMismatch(QuintError):
    """A data file's header does not match the declared columns."""


class RowFormatError(QuintError):
    """A data row could not be parsed; carries the offending row number."""

    def __init__(self, message: str, row_number: int):
        super().__init__(f"{message} (row {row_number})")
        self.row_number = row_number


class DuplicateReferenceKey(QuintError):
    """Two reference rows share the same key value."""


class NullReferenceKey(QuintError):
    """A reference row has a null key value."""


class MappingConflict(QuintError):
    """A source column is already mapped to a different global column."""


class UnsupportedCatalogVersion(QuintError):
    """The catalog file declares a format version this build cannot read."""


class CatalogParseError(QuintError):
    """The catalog file is corrupt or truncated."""


# --- assessment ------------------------------------------------------------

class EmptyReference(QuintError):
    """A reference relation is missing or empty where one is required."""


class MissingKeyMapping(QuintError):
    """A relation maps into a global table but not into its key columns."""


class InvariantViolation(QuintError):
    """Computed quantities contradict a structural invariant."""


class EmptyProjection(QuintError):
    """A scaled aggregate was requested over zero queried attributes."""


class EmptyInput(QuintError):
    """An aggregate over a non-empty collection received an empty one."""


# --- query frontend --------------------------------------------------------

class ParseError(QuintError):
    """Query text is not grammatical; carries the source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownColumn(QuintError):
    """A projected or filtered name does not resolve in the global schema."""


class UnknownFeature(QuintError):
    """A name used where a quality feature is expected is not one."""


class UnresolvedTerm(QuintError):
    """A qualitative term has no entry in the term table."""


class UnsupportedGoalShape(QuintError):
    """The quality goal mixes AND and OR connectives."""


# --- planning --------------------------------------------------------------

class NoCandidateSources(QuintError):
    """No registered source supplies any projected column."""


class StaleAssessment(QuintError):
    """A queried column's quality scores are missing or out of date."""


class TooManySources(QuintError):
    """Candidate source count exceeds the exhaustive-combination cap."""


class UnsatisfiableGoal(QuintError):
    """No source combination can meet the requested quality goal."""


# --- ranking ---------------------------------------------------------------

class RejectedScoringFunction(QuintError):
    """A scoring function was registered without a monotonicity guarantee."""


class EmptyRanking(QuintError):
    """A ranking was requested over zero alternatives."""


# --- fusion ----------------------------------------------------------------

class MissingKey(QuintError):
    """A member result set lacks the key column needed for clustering."""
