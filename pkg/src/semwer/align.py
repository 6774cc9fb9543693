"""Word-level alignment and capped dual-reference WER.

Per-utterance WER is the smaller of the error rates against the two reference
variants, clamped to 100%. The corpus number is the word-count-weighted mean
of per-utterance WERs, where each utterance contributes the word count of
whichever reference variant it was scored against (N*).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BothReferencesEmptyError, EmptyBatchError, EmptyReferenceError
from .normalize import ReferencePair

_SUB, _DEL, _INS = 1, 2, 3  # backtrace op markers, in preference order


@dataclass(frozen=True)
class AlignmentCounts:
    """Substitution / deletion / insertion / reference-word counts."""

    S: int
    D: int
    I: int
    N: int

    @property
    def distance(self) -> int:
        return self.S + self.D + self.I

    @property
    def error_rate(self) -> float:
        return self.distance / self.N


@dataclass(frozen=True)
class UtteranceWer:
    """One utterance's capped WER and the reference variant that produced it.

    ``wer_by_ref`` keeps the uncapped per-variant error rates (None where the
    variant is empty) so downstream reports can tell which variant strictly
    won. ``wer`` is capped at 1.0; ``n_star`` is the chosen variant's word
    count even when the cap binds.
    """

    wer: float
    chosen_j: int
    n_star: int
    wer_by_ref: tuple[float | None, float | None] = (None, None)


@dataclass(frozen=True)
class CorpusWer:
    """N*-weighted corpus WER over a batch of utterances."""

    wer: float
    total_n_star: int


def align_words(ref: Sequence[str], hyp: Sequence[str]) -> AlignmentCounts:
    """Minimal-edit-distance alignment with unit costs.

    The S/D/I split among equal-cost alignments is fixed by the backtrace
    preference substitution > deletion > insertion; the sum S+D+I is the
    token Levenshtein distance regardless.
    """
    if not ref:
        raise EmptyReferenceError("cannot align against an empty reference")
    n, m = len(ref), len(hyp)
    # dist[i][j]: distance between ref[:i] and hyp[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, above = dist[i], dist[i - 1]
        for j in range(1, m + 1):
            sub = above[j - 1] + (ref[i - 1] != hyp[j - 1])
            row[j] = min(sub, above[j] + 1, row[j - 1] + 1)

    s = d = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i - 1][j - 1] == here:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i - 1][j - 1] + 1 == here:
            s += 1
            i, j = i - 1, j - 1
        elif i > 0 and dist[i - 1][j] + 1 == here:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return AlignmentCounts(S=s, D=d, I=ins, N=n)


def utterance_wer(refs: ReferencePair, hyp: Sequence[str]) -> UtteranceWer:
    """Capped WER against the better of the two reference variants.

    The variant with the smaller uncapped error rate wins; ties go to j=1
    (without disfluencies). Empty variants are skipped; if both are empty
    the utterance cannot be scored.
    """
    rates: list[float | None] = [None, None]
    for j in (0, 1):
        variant = refs.variant(j)
        if variant:
            rates[j] = align_words(variant, hyp).error_rate
    if rates[0] is None and rates[1] is None:
        raise BothReferencesEmptyError("both reference variants are empty")
    if rates[1] is not None and (rates[0] is None or rates[1] <= rates[0]):
        chosen = 1
    else:
        chosen = 0
    return UtteranceWer(
        wer=min(1.0, rates[chosen]),
        chosen_j=chosen,
        n_star=len(refs.variant(chosen)),
        wer_by_ref=(rates[0], rates[1]),
    )


def corpus_wer(items: Iterable[UtteranceWer]) -> CorpusWer:
    """N*-weighted mean of per-utterance WERs."""
    total_weighted = 0.0
    total_n = 0
    for item in items:
        total_weighted += item.wer * item.n_star
        total_n += item.n_star
    if total_n == 0:
        raise EmptyBatchError("no utterances to aggregate")
    return CorpusWer(wer=total_weighted / total_n, total_n_star=total_n)
