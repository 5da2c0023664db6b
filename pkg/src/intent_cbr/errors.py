"""Exception hierarchy for the whole package.

Every error carries an ``exit_code`` so the CLI can map failures onto its
stable contract: 1 I/O, 2 validation, 3 empty repository, 4 analysis
failure.
"""


class IntentCbrError(Exception):
    """Base class for all package errors."""

    exit_code = 2


# --- I/O ---------------------------------------------------------------


class IoFailure(IntentCbrError):
    """Filesystem operation failed (unreadable path, permission, ...)."""

    exit_code = 1


# --- validation / data shape --------------------------------------------


class ValidationFailure(IntentCbrError, ValueError):
    """A value violates a domain invariant."""


class IllegalTransition(IntentCbrError):
    """Requested case status change is not a legal life-cycle edge."""


class UnnormalizedWeights(IntentCbrError):
    """Precedent evidence weights do not sum to 1."""


class DuplicateCaseId(IntentCbrError):
    """A record with this id is already stored."""


class UnknownCaseId(IntentCbrError):
    """No stored record under this id."""


class SchemaVersionMismatch(IntentCbrError):
    """Repository was written with an unsupported schema version."""


class CorruptRecord(IntentCbrError):
    """One or more stored records fail validation or cannot be parsed."""

    def __init__(self, details: dict[str, str]):
        self.details = dict(details)
        ids = ", ".join(sorted(details))
        super().__init__(f"corrupt records: {ids}")


# --- ingest --------------------------------------------------------------


class MalformedRecord(IntentCbrError):
    """An input record cannot be parsed; carries the offending line."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateEvidenceId(MalformedRecord):
    """Two evidence records in one file share an id."""


class ConfidenceOutOfRange(MalformedRecord):
    """Evidence confidence outside [0, 1]."""


# --- inference ------------------------------------------------------------


class UnknownEvidence(IntentCbrError):
    """Evidence id not covered by the causal network."""


class NoHypothesis(IntentCbrError):
    """No hypothesis (specific or wildcard) applies to an intention."""


class EmptyPosteriors(IntentCbrError):
    """Mass function requested over an empty posterior map."""

    exit_code = 4


class AllZeroPosteriors(IntentCbrError):
    """Every posterior is zero; no mass can be assigned."""

    exit_code = 4


class ZeroMarginal(IntentCbrError):
    """Observed evidence has probability 0 under every intention."""

    exit_code = 4


class FrameMismatch(IntentCbrError):
    """Two mass functions live on different frames of discernment."""


class SubsetOutsideFrame(IntentCbrError):
    """Belief/plausibility queried for ids outside the frame."""


class TotalConflict(IntentCbrError):
    """Dempster combination degenerate: the sources fully contradict."""

    exit_code = 4

    def __init__(self, conflict: float):
        self.conflict = conflict
        super().__init__(f"total conflict between sources (K={conflict!r})")


# --- retrieval ------------------------------------------------------------


class EmptyRepository(IntentCbrError):
    """No eligible precedent case stored."""

    exit_code = 3


class EmptyRanking(IntentCbrError):
    """Reuse requested on a ranking with no entries."""

    exit_code = 4
