"""Exception types shared across the package."""
from __future__ import annotations


class SemwerError(Exception):
    """Base class for all package errors."""


class UnbalancedMarkupError(SemwerError):
    """Raw transcript markup is not well-nested."""

    def __init__(self, position: int, message: str | None = None):
        self.position = position
        super().__init__(message or f"unbalanced markup at position {position}")


class EmptyResultError(SemwerError):
    """Both reference variants normalized to zero tokens."""


class EmptyReferenceError(SemwerError):
    """An operation that requires a non-empty reference received an empty one."""


class BothReferencesEmptyError(SemwerError):
    """Neither reference variant contains any token."""


class EmptyBatchError(SemwerError):
    """A corpus-level aggregation received no items."""


class NonAlphabeticError(SemwerError):
    """A token contains no letter that Soundex can encode."""


class BackendUnavailableError(SemwerError):
    """The scorer backend could not be reached; safe to retry."""


class BackendMalformedResponseError(SemwerError):
    """The scorer backend answered with a payload that violates the protocol."""


class RankDeficientError(SemwerError):
    """The component matrix does not have full column rank."""


class TooFewSamplesError(SemwerError):
    """Fewer rated pairs than cross-validation folds."""


class DegenerateVarianceError(SemwerError):
    """Pearson correlation is undefined when either series has zero variance."""


class TooFewSpeakersError(SemwerError):
    """A manifest needs at least four speakers to be split."""


class IdMismatchError(SemwerError):
    """Reference and hypothesis files do not cover the same utterance ids."""

    def __init__(self, missing: list[str], extra: list[str]):
        self.missing = sorted(missing)
        self.extra = sorted(extra)
        parts = []
        if self.missing:
            parts.append(f"{len(self.missing)} ids missing from hypotheses")
        if self.extra:
            parts.append(f"{len(self.extra)} hypothesis ids not in references")
        super().__init__("; ".join(parts) or "id mismatch")


class UnknownTeamError(SemwerError):
    """Submission from a team that was never registered."""


class MissingUtterancesError(SemwerError):
    """A submission does not cover every unshared test utterance."""

    def __init__(self, missing: list[str]):
        self.missing = sorted(missing)
        super().__init__(f"{len(self.missing)} unshared utterances missing")


class DuplicateUtterancesError(SemwerError):
    """A submission contains an unshared test utterance more than once."""

    def __init__(self, duplicates: list[str]):
        self.duplicates = sorted(duplicates)
        super().__init__(f"{len(self.duplicates)} utterances appear more than once")


class RateLimitedError(SemwerError):
    """A team exceeded its daily submission quota."""


class UnauthorizedError(SemwerError):
    """Admin credential missing or wrong."""


class AlreadyConcludedError(SemwerError):
    """The challenge was already concluded; the transition is irreversible."""
