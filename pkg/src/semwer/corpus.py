"""Manifest ingestion, speaker-disjoint splitting, and unshared filtering.

Speakers (never single utterances) are assigned to Train/Dev/Test by total
speech duration against 70:10:20 targets; the Test speakers are then divided
into two duration-balanced halves. Test utterances whose disfluency-free
reference text also occurs in the training split are marked as shared and
excluded from challenge scoring.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import EmptyResultError, SemwerError, TooFewSpeakersError
from .normalize import DEFAULT_OPTIONS, NormalizeOptions, normalize, render


class Etiology(str, Enum):
    PD = "PD"
    DS = "DS"
    ALS = "ALS"
    CP = "CP"
    STROKE = "Stroke"
    UNKNOWN = "Unknown"


class Split(str, Enum):
    TRAIN = "Train"
    DEV = "Dev"
    TEST1 = "Test1"
    TEST2 = "Test2"


@dataclass(frozen=True)
class UtteranceRecord:
    """One manifest row: who spoke, for how long, and the raw transcript."""

    utterance_id: str
    speaker_id: str
    duration_s: float
    raw_transcript: str
    etiology: Etiology = Etiology.UNKNOWN


@dataclass(frozen=True)
class SplitAssignment:
    split: Split
    unshared: bool = False


def load_manifest(lines: Iterable[str]) -> list[UtteranceRecord]:
    """Parse JSON-lines manifest records, enforcing id uniqueness."""
    records = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
            record = UtteranceRecord(
                utterance_id=row["utterance_id"],
                speaker_id=row["speaker_id"],
                duration_s=float(row["duration_s"]),
                raw_transcript=row["raw_transcript"],
                etiology=Etiology(row.get("etiology", "Unknown")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SemwerError(f"manifest line {lineno}: {exc}") from exc
        if record.duration_s <= 0:
            raise SemwerError(f"manifest line {lineno}: duration must be positive")
        if record.utterance_id in seen:
            raise SemwerError(
                f"manifest line {lineno}: duplicate utterance_id {record.utterance_id!r}"
            )
        seen.add(record.utterance_id)
        records.append(record)
    return records


def split_manifest(
    manifest: Sequence[UtteranceRecord],
    ratios: tuple[float, float, float] = (0.70, 0.10, 0.20),
    seed: int = 0,
) -> dict[str, SplitAssignment]:
    """Assign every utterance to Train/Dev/Test1/Test2, speaker-disjoint.

    Speakers are ordered by descending total duration (seeded shuffle breaks
    ties) and each goes to whichever of Train/Dev/Test is currently furthest
    below its duration target; Test speakers are then dealt greedily into the
    half with less accumulated duration. Deterministic for a fixed seed.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    durations: dict[str, float] = {}
    for record in manifest:
        durations[record.speaker_id] = durations.get(record.speaker_id, 0.0) + record.duration_s
    if len(durations) < 4:
        raise TooFewSpeakersError(
            f"need at least 4 speakers, manifest has {len(durations)}"
        )

    speakers = sorted(durations)
    random.Random(seed).shuffle(speakers)
    speakers.sort(key=lambda s: -durations[s])  # stable: shuffle settles ties

    total = sum(durations.values())
    targets = [r * total for r in ratios]
    filled = [0.0, 0.0, 0.0]
    buckets: list[list[str]] = [[], [], []]
    for speaker in speakers:
        deficits = [targets[k] - filled[k] for k in range(3)]
        k = max(range(3), key=lambda idx: deficits[idx])
        buckets[k].append(speaker)
        filled[k] += durations[speaker]

    test_half: dict[str, Split] = {}
    half_durations = {Split.TEST1: 0.0, Split.TEST2: 0.0}
    for speaker in buckets[2]:
        half = min((Split.TEST1, Split.TEST2), key=lambda h: half_durations[h])
        test_half[speaker] = half
        half_durations[half] += durations[speaker]

    speaker_split: dict[str, Split] = {}
    for speaker in buckets[0]:
        speaker_split[speaker] = Split.TRAIN
    for speaker in buckets[1]:
        speaker_split[speaker] = Split.DEV
    speaker_split.update(test_half)

    return {
        record.utterance_id: SplitAssignment(split=speaker_split[record.speaker_id])
        for record in manifest
    }


def _reference_key(raw_transcript: str, options: NormalizeOptions) -> str | None:
    # Text identity uses the disfluency-free normalized form; utterances that
    # normalize to nothing compare as empty text.
    try:
        return render(normalize(raw_transcript, options).without_disfluencies)
    except EmptyResultError:
        return ""


def mark_unshared(
    manifest: Sequence[UtteranceRecord],
    assignments: Mapping[str, SplitAssignment],
    options: NormalizeOptions = DEFAULT_OPTIONS,
) -> dict[str, SplitAssignment]:
    """Flag test utterances whose text never occurs in the training split."""
    missing = [r.utterance_id for r in manifest if r.utterance_id not in assignments]
    if missing:
        raise SemwerError(f"assignments missing for {len(missing)} utterances")

    train_texts = {
        _reference_key(record.raw_transcript, options)
        for record in manifest
        if assignments[record.utterance_id].split is Split.TRAIN
    }
    out: dict[str, SplitAssignment] = {}
    for record in manifest:
        assignment = assignments[record.utterance_id]
        if assignment.split in (Split.TEST1, Split.TEST2):
            unshared = _reference_key(record.raw_transcript, options) not in train_texts
            out[record.utterance_id] = SplitAssignment(assignment.split, unshared)
        else:
            out[record.utterance_id] = SplitAssignment(assignment.split, False)
    return out
