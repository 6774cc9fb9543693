"""Corpus-level evaluation reports: aggregates, preference breakdown, Pearson.

The disfluency-preference breakdown classifies each utterance by which
reference variant its score favored: Type 1 when the variant with
disfluencies strictly wins, Type 2 when the variant without them strictly
wins, and no preference when the two scores are identical (which covers
utterances whose references are the same).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .align import UtteranceWer, corpus_wer
from .corpus import Etiology
from .errors import DegenerateVarianceError, EmptyBatchError
from .semantic import UtteranceSem


@dataclass(frozen=True)
class ScoredUtterance:
    """Per-utterance scores joined with speaker/etiology metadata."""

    utterance_id: str
    speaker_id: str
    wer: UtteranceWer
    sem: UtteranceSem | None = None
    etiology: Etiology = Etiology.UNKNOWN


@dataclass(frozen=True)
class PreferenceBreakdown:
    """Fractions of utterances favoring each reference variant; sums to 1."""

    type1: float
    type2: float
    none: float


@dataclass(frozen=True)
class EvaluationReport:
    corpus_wer: float
    total_n_star: int
    corpus_semscore: float | None
    per_utterance: tuple[ScoredUtterance, ...]
    disfluency_preference: dict[str, PreferenceBreakdown]
    per_speaker_wer: dict[str, float]
    per_etiology: dict[str, tuple[float, float | None]]
    speaker_wer_mean_std: tuple[float, float]
    # population (not sample) std over speakers; recorded so readers of the
    # report know which convention produced the spread number
    speaker_std_convention: str = "population"


def _classify(score0: float | None, score1: float | None, higher_wins: bool) -> str:
    if score0 is None and score1 is None:
        return "none"
    if score1 is None:
        return "type1"
    if score0 is None:
        return "type2"
    if score0 == score1:
        return "none"
    j0_wins = (score0 > score1) if higher_wins else (score0 < score1)
    return "type1" if j0_wins else "type2"


def _preference(labels: Sequence[str]) -> PreferenceBreakdown:
    n = len(labels)
    return PreferenceBreakdown(
        type1=labels.count("type1") / n,
        type2=labels.count("type2") / n,
        none=labels.count("none") / n,
    )


def build_report(scores: Sequence[ScoredUtterance]) -> EvaluationReport:
    """Aggregate per-utterance scores into the full evaluation report."""
    if not scores:
        raise EmptyBatchError("no scored utterances")

    overall = corpus_wer([s.wer for s in scores])

    sems = [s.sem for s in scores if s.sem is not None]
    overall_sem = float(np.mean([s.semscore for s in sems])) if sems else None

    preference = {
        "wer": _preference(
            [_classify(s.wer.wer_by_ref[0], s.wer.wer_by_ref[1], higher_wins=False)
             for s in scores]
        )
    }
    if len(sems) == len(scores):
        preference["semscore"] = _preference(
            [_classify(s.sem.sem_by_ref[0], s.sem.sem_by_ref[1], higher_wins=True)
             for s in scores]
        )

    by_speaker: dict[str, list[ScoredUtterance]] = {}
    for s in scores:
        by_speaker.setdefault(s.speaker_id, []).append(s)
    per_speaker_wer = {
        speaker: corpus_wer([s.wer for s in items]).wer
        for speaker, items in by_speaker.items()
    }
    speaker_wers = list(per_speaker_wer.values())
    mean = float(np.mean(speaker_wers))
    std = float(np.std(speaker_wers))  # population std

    by_etiology: dict[str, list[ScoredUtterance]] = {}
    for s in scores:
        by_etiology.setdefault(s.etiology.value, []).append(s)
    per_etiology = {}
    for etiology, items in by_etiology.items():
        wer_value = corpus_wer([s.wer for s in items]).wer
        etiology_sems = [s.sem.semscore for s in items if s.sem is not None]
        sem_value = float(np.mean(etiology_sems)) if etiology_sems else None
        per_etiology[etiology] = (wer_value, sem_value)

    return EvaluationReport(
        corpus_wer=overall.wer,
        total_n_star=overall.total_n_star,
        corpus_semscore=overall_sem,
        per_utterance=tuple(scores),
        disfluency_preference=preference,
        per_speaker_wer=per_speaker_wer,
        per_etiology=per_etiology,
        speaker_wer_mean_std=(mean, std),
    )


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient, clamped into [-1, 1]."""
    if len(xs) != len(ys):
        raise ValueError("series lengths differ")
    if len(xs) < 2:
        raise DegenerateVarianceError("need at least 2 points")
    mean_x = math.fsum(xs) / len(xs)
    mean_y = math.fsum(ys) / len(ys)
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = math.fsum(a * a for a in dx)
    var_y = math.fsum(b * b for b in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateVarianceError("zero variance in input series")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class SystemComparison:
    """Cross-system view of (WER, SemScore) with rank-order diagnostics.

    ``correlation`` is None when either metric is constant across systems
    (identical reports), where Pearson is undefined but ranks still are.
    """

    wers: tuple[float, ...]
    semscores: tuple[float, ...]
    correlation: float | None
    rank_differences: tuple[float, ...] = field(default=())


def _average_ranks(values: Sequence[float]) -> list[float]:
    # ties share the mean of the positions they occupy
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def compare_metric_pairs(
    wers: Sequence[float], semscores: Sequence[float]
) -> SystemComparison:
    """Compare systems by their (WER, SemScore) corpus numbers."""
    if len(wers) < 2:
        raise EmptyBatchError("need at least 2 systems to compare")
    try:
        correlation = pearson(wers, semscores)
    except DegenerateVarianceError:
        correlation = None
    wer_ranks = _average_ranks(wers)  # ascending: best WER first
    sem_ranks = _average_ranks([-s for s in semscores])  # best SemScore first
    diffs = tuple(w - s for w, s in zip(wer_ranks, sem_ranks))
    return SystemComparison(
        wers=tuple(wers),
        semscores=tuple(semscores),
        correlation=correlation,
        rank_differences=diffs,
    )


def compare_systems(reports: Sequence[EvaluationReport]) -> SystemComparison:
    """Compare systems: WER vs SemScore correlation and per-system rank gaps."""
    if len(reports) < 2:
        raise EmptyBatchError("need at least 2 system reports to compare")
    semscores = [r.corpus_semscore for r in reports]
    if any(s is None for s in semscores):
        raise EmptyBatchError("every report needs a corpus SemScore to compare")
    return compare_metric_pairs([r.corpus_wer for r in reports], semscores)
