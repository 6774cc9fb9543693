"""Speaker-disjoint splitting and unshared filtering."""
from __future__ import annotations

import json
import random

import pytest

from semwer import Split, UtteranceRecord, load_manifest, mark_unshared, split_manifest
from semwer.errors import SemwerError, TooFewSpeakersError


def make_manifest(speaker_durations, text="hello there"):
    records = []
    for speaker, durations in speaker_durations.items():
        for i, duration in enumerate(durations):
            records.append(
                UtteranceRecord(
                    utterance_id=f"{speaker}-{i}",
                    speaker_id=speaker,
                    duration_s=duration,
                    raw_transcript=text,
                )
            )
    return records


def split_speakers(manifest, assignments):
    by_split = {}
    for record in manifest:
        split = assignments[record.utterance_id].split
        by_split.setdefault(split, set()).add(record.speaker_id)
    return by_split


def test_equal_speakers_exact_ratio():
    manifest = make_manifest({f"s{i}": [60.0] for i in range(10)})
    assignments = split_manifest(manifest, seed=0)
    by_split = split_speakers(manifest, assignments)
    assert len(by_split[Split.TRAIN]) == 7
    assert len(by_split[Split.DEV]) == 1
    assert len(by_split.get(Split.TEST1, set())) == 1
    assert len(by_split.get(Split.TEST2, set())) == 1


def test_speaker_disjointness():
    rng = random.Random(1)
    manifest = make_manifest(
        {f"s{i}": [rng.uniform(5, 50) for _ in range(rng.randint(1, 5))] for i in range(30)}
    )
    assignments = split_manifest(manifest, seed=4)
    speaker_to_splits = {}
    for record in manifest:
        split = assignments[record.utterance_id].split
        speaker_to_splits.setdefault(record.speaker_id, set()).add(split)
    assert all(len(splits) == 1 for splits in speaker_to_splits.values())


def test_deterministic_given_seed():
    rng = random.Random(2)
    manifest = make_manifest(
        {f"s{i}": [rng.uniform(5, 50)] for i in range(25)}
    )
    assert split_manifest(manifest, seed=9) == split_manifest(manifest, seed=9)


def test_duration_ratios_within_tolerance_on_200_speakers():
    rng = random.Random(11)
    manifest = make_manifest(
        {
            f"s{i:03d}": [rng.lognormvariate(3.0, 0.8) for _ in range(rng.randint(2, 12))]
            for i in range(200)
        }
    )
    assignments = split_manifest(manifest, seed=7)
    totals = {split: 0.0 for split in Split}
    for record in manifest:
        totals[assignments[record.utterance_id].split] += record.duration_s
    grand_total = sum(totals.values())
    for split, share in [
        (Split.TRAIN, 0.70), (Split.DEV, 0.10), (Split.TEST1, 0.10), (Split.TEST2, 0.10),
    ]:
        assert totals[split] / grand_total == pytest.approx(share, abs=0.05)


def test_too_few_speakers():
    manifest = make_manifest({"a": [10.0], "b": [10.0], "c": [10.0]})
    with pytest.raises(TooFewSpeakersError):
        split_manifest(manifest)


def test_bad_ratios_rejected():
    manifest = make_manifest({f"s{i}": [10.0] for i in range(5)})
    with pytest.raises(ValueError):
        split_manifest(manifest, ratios=(0.5, 0.2, 0.2))


class TestMarkUnshared:
    def build(self, texts_by_split):
        # one speaker per utterance keeps split assignment controllable
        manifest = []
        assignments = {}
        counter = 0
        for split, texts in texts_by_split.items():
            for text in texts:
                utt_id = f"u{counter:03d}"
                manifest.append(
                    UtteranceRecord(utt_id, f"spk{counter:03d}", 5.0, text)
                )
                from semwer import SplitAssignment

                assignments[utt_id] = SplitAssignment(split)
                counter += 1
        return manifest, assignments

    def test_shared_text_flagged_false(self):
        manifest, assignments = self.build(
            {Split.TRAIN: ["good morning"], Split.TEST1: ["good morning"]}
        )
        marked = mark_unshared(manifest, assignments)
        assert marked["u001"].unshared is False

    def test_unique_text_flagged_true(self):
        manifest, assignments = self.build(
            {Split.TRAIN: ["good morning"], Split.TEST1: ["good evening"]}
        )
        marked = mark_unshared(manifest, assignments)
        assert marked["u001"].unshared is True

    def test_train_dev_never_flagged(self):
        manifest, assignments = self.build(
            {Split.TRAIN: ["a b"], Split.DEV: ["a b"], Split.TEST2: ["c d"]}
        )
        marked = mark_unshared(manifest, assignments)
        assert marked["u000"].unshared is False
        assert marked["u001"].unshared is False
        assert marked["u002"].unshared is True

    def test_identity_uses_disfluency_free_form(self):
        # "(um) hi there" reduces to "hi there" without disfluencies, which
        # matches the training text
        manifest, assignments = self.build(
            {Split.TRAIN: ["hi there"], Split.TEST1: ["(um) hi there"]}
        )
        marked = mark_unshared(manifest, assignments)
        assert marked["u001"].unshared is False

    def test_no_training_data_makes_everything_unshared(self):
        manifest, assignments = self.build(
            {Split.TEST1: ["a b", "c d"], Split.TEST2: ["e f"]}
        )
        marked = mark_unshared(manifest, assignments)
        assert all(marked[r.utterance_id].unshared for r in manifest)

    def test_matches_brute_force_oracle(self):
        rng = random.Random(5)
        vocab = ["go", "stop", "home", "now", "please", "again"]
        manifest = []
        for i in range(500):
            text = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 3)))
            manifest.append(UtteranceRecord(f"u{i}", f"s{i % 40}", 3.0, text))
        assignments = split_manifest(manifest, seed=2)
        marked = mark_unshared(manifest, assignments)

        # oracle: direct pairwise comparison of uppercase texts
        train_texts = [
            r.raw_transcript.upper()
            for r in manifest
            if assignments[r.utterance_id].split is Split.TRAIN
        ]
        for record in manifest:
            assignment = marked[record.utterance_id]
            if assignment.split in (Split.TEST1, Split.TEST2):
                expected = all(
                    record.raw_transcript.upper() != t for t in train_texts
                )
                assert assignment.unshared == expected, record.utterance_id

    def test_missing_assignment_rejected(self):
        manifest, assignments = self.build({Split.TRAIN: ["a"], Split.TEST1: ["b"]})
        del assignments["u001"]
        with pytest.raises(SemwerError):
            mark_unshared(manifest, assignments)


class TestLoadManifest:
    def test_round_trip(self):
        lines = [
            json.dumps(
                {
                    "utterance_id": "u1",
                    "speaker_id": "s1",
                    "duration_s": 3.5,
                    "raw_transcript": "hi",
                    "etiology": "PD",
                }
            )
        ]
        records = load_manifest(lines)
        assert records[0].etiology.value == "PD"

    def test_duplicate_id_rejected(self):
        row = json.dumps(
            {"utterance_id": "u1", "speaker_id": "s1", "duration_s": 1, "raw_transcript": "x"}
        )
        with pytest.raises(SemwerError, match="duplicate"):
            load_manifest([row, row])

    def test_nonpositive_duration_rejected(self):
        row = json.dumps(
            {"utterance_id": "u1", "speaker_id": "s1", "duration_s": 0, "raw_transcript": "x"}
        )
        with pytest.raises(SemwerError, match="duration"):
            load_manifest([row])
