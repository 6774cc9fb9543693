#!/usr/bin/env python3
"""Build a speaker-disjoint 70:10:20 split and the unshared test subsets.

A synthetic 200-speaker manifest with lognormal utterance durations lands
within a few percent of the duration targets; the test halves are balanced;
utterances whose text also appears in training get unshared=False.
"""
import random
from collections import Counter

from semwer import Split, UtteranceRecord, mark_unshared, split_manifest


def synthesize_manifest(n_speakers: int = 200, seed: int = 1) -> list[UtteranceRecord]:
    rng = random.Random(seed)
    prompts = [f"common phrase number {i}" for i in range(60)]
    records = []
    for s in range(n_speakers):
        speaker = f"spk{s:03d}"
        for u in range(rng.randint(2, 10)):
            if rng.random() < 0.5:   # half shared prompts, half free speech
                text = rng.choice(prompts)
            else:
                text = f"spontaneous remark {s} {u} about topic {rng.randint(0, 999)}"
            records.append(
                UtteranceRecord(
                    utterance_id=f"{speaker}-{u:02d}",
                    speaker_id=speaker,
                    duration_s=rng.lognormvariate(2.5, 0.9),
                    raw_transcript=text,
                )
            )
    return records


def main() -> None:
    manifest = synthesize_manifest()
    assignments = mark_unshared(manifest, split_manifest(manifest, seed=42))

    durations = Counter()
    speakers: dict[Split, set] = {split: set() for split in Split}
    unshared = Counter()
    test_counts = Counter()
    for record in manifest:
        assignment = assignments[record.utterance_id]
        durations[assignment.split] += record.duration_s
        speakers[assignment.split].add(record.speaker_id)
        if assignment.split in (Split.TEST1, Split.TEST2):
            test_counts[assignment.split] += 1
            if assignment.unshared:
                unshared[assignment.split] += 1

    total = sum(durations.values())
    print(f"{'split':8s} {'speakers':>9s} {'hours':>8s} {'share':>7s}")
    for split in Split:
        hours = durations[split] / 3600
        print(f"{split.value:8s} {len(speakers[split]):9d} {hours:8.2f}"
              f" {durations[split] / total * 100:6.1f}%")
    print()
    for split in (Split.TEST1, Split.TEST2):
        print(f"{split.value}: {unshared[split]}/{test_counts[split]} utterances unshared")

    overlap = speakers[Split.TRAIN] & (
        speakers[Split.DEV] | speakers[Split.TEST1] | speakers[Split.TEST2]
    )
    print(f"\nspeaker overlap across splits: {len(overlap)} (must be 0)")


if __name__ == "__main__":
    main()
