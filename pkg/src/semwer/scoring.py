"""Batch scoring pipeline: join references with hypotheses, score both metrics.

This is the shared path behind the score command and the evaluation service.
Per-utterance work is independent and order never affects any score.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .align import utterance_wer
from .backends import ScorerBackend
from .corpus import Etiology
from .errors import IdMismatchError
from .normalize import ReferencePair
from .report import ScoredUtterance
from .semantic import ScorerWeights, batch_semscore


@dataclass(frozen=True)
class ReferenceEntry:
    """A normalized reference pair with its scoring metadata."""

    utterance_id: str
    refs: ReferencePair
    speaker_id: str = ""
    etiology: Etiology = Etiology.UNKNOWN


def check_id_alignment(
    reference_ids: Sequence[str], hypothesis_ids: Sequence[str]
) -> None:
    """Require the two id sets to be identical."""
    refs = set(reference_ids)
    hyps = set(hypothesis_ids)
    if refs != hyps:
        raise IdMismatchError(
            missing=list(refs - hyps), extra=list(hyps - refs)
        )


def score_batch(
    references: Sequence[ReferenceEntry],
    hypotheses: Mapping[str, Sequence[str]],
    weights: ScorerWeights,
    backend: ScorerBackend | None,
    with_semscore: bool = True,
) -> list[ScoredUtterance]:
    """Score every reference against its hypothesis tokens.

    ``hypotheses`` maps utterance_id to normalized hypothesis tokens and must
    cover every reference id (extra ids are the caller's concern; see
    check_id_alignment for strict matching).
    """
    missing = [r.utterance_id for r in references if r.utterance_id not in hypotheses]
    if missing:
        raise IdMismatchError(missing=missing, extra=[])

    wers = [
        utterance_wer(entry.refs, tuple(hypotheses[entry.utterance_id]))
        for entry in references
    ]
    sems = None
    if with_semscore:
        if backend is None:
            raise ValueError("semantic scoring requires a backend")
        sems = batch_semscore(
            [(entry.refs, tuple(hypotheses[entry.utterance_id])) for entry in references],
            weights,
            backend,
        )

    return [
        ScoredUtterance(
            utterance_id=entry.utterance_id,
            speaker_id=entry.speaker_id,
            wer=wer,
            sem=sems[i] if sems is not None else None,
            etiology=entry.etiology,
        )
        for i, (entry, wer) in enumerate(zip(references, wers))
    ]
